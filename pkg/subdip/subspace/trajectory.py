import os
import shutil
from typing import List, Optional, Iterator

import numpy as np

from subdip.network.param_vector import ParamVector, ParamLayout
from subdip.storage import sdip_format
from subdip.utils import file_util
from subdip.utils.exception import DimensionMismatch

LAYOUT_FILE = 'layout.txt'


class TrajectoryStore:
	"""
	Ordered parameter snapshots of a pre-training run, all sharing one layout

	With a directory the snapshots are spilled to disk as they arrive and only read back when iterated,
	otherwise they are kept in memory
	"""
	def __init__(self, layout: ParamLayout, directory: Optional[str] = None, stride: int = 1):
		self.layout = layout
		self.directory = directory
		self.stride = stride
		self.__count = 0
		self.__memory: List[np.ndarray] = []
		if directory is not None:
			file_util.touch_directory(directory)
			with file_util.safe_write(os.path.join(directory, LAYOUT_FILE), encoding='utf8') as file:
				file.write(layout.to_text())

	@classmethod
	def open(cls, directory: str) -> 'TrajectoryStore':
		"""
		Reopen a spilled store written by an earlier run
		"""
		with open(os.path.join(directory, LAYOUT_FILE), encoding='utf8') as file:
			layout = ParamLayout.from_text(file.read())
		store = cls.__new__(cls)
		store.layout = layout
		store.directory = directory
		store.stride = 1
		store.__memory = []
		store.__count = len(file_util.list_file_with_suffix(directory, '.sdip'))
		return store

	def __checkpoint_path(self, index: int) -> str:
		return os.path.join(self.directory, 'checkpoint_{:06d}.sdip'.format(index))

	def append(self, theta: ParamVector):
		if theta.layout != self.layout:
			raise DimensionMismatch('Checkpoint layout differs from the store layout')
		if self.directory is not None:
			sdip_format.write(self.__checkpoint_path(self.__count), theta.data)
		else:
			self.__memory.append(theta.data.copy())
		self.__count += 1

	def __len__(self) -> int:
		return self.__count

	@property
	def d_theta(self) -> int:
		return self.layout.size

	def get(self, index: int) -> ParamVector:
		if not 0 <= index < self.__count:
			raise IndexError('Checkpoint index {} out of range [0, {})'.format(index, self.__count))
		if self.directory is not None:
			array, _ = sdip_format.read(self.__checkpoint_path(index))
			return ParamVector(array.reshape(-1), self.layout)
		return ParamVector(self.__memory[index], self.layout)

	def __iter__(self) -> Iterator[ParamVector]:
		for i in range(self.__count):
			yield self.get(i)

	def matrix(self) -> np.ndarray:
		"""
		The d_theta x d_pre matrix of raw stacked checkpoints
		"""
		result = np.empty((self.d_theta, self.__count))
		for i, theta in enumerate(self):
			result[:, i] = theta.data
		return result

	def discard(self):
		if self.directory is not None and os.path.isdir(self.directory):
			shutil.rmtree(self.directory)
		self.__memory.clear()
		self.__count = 0
