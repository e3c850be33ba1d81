"""
Images and measurements, the two kinds of vectors the forward models map between
"""
from typing import Optional, Tuple

import numpy as np

from subdip.storage import sdip_format, pgm
from subdip.utils.exception import DimensionMismatch


def _as_finite_array(data, ndim: int, what: str) -> np.ndarray:
	array = np.array(data, dtype=np.float64)
	if array.ndim != ndim:
		raise DimensionMismatch('{} needs a {}-D array, got shape {}'.format(what, ndim, array.shape))
	if not np.all(np.isfinite(array)):
		raise ValueError('{} contains non-finite values'.format(what))
	return array


class Image:
	"""
	A dense height x width grayscale intensity grid, stored row-major. Row 0 is the top row
	"""
	def __init__(self, data: np.ndarray):
		self.__data = _as_finite_array(data, 2, 'Image')
		self.__data.setflags(write=False)

	@classmethod
	def zeros(cls, height: int, width: int) -> 'Image':
		return cls(np.zeros((height, width)))

	@classmethod
	def from_vector(cls, vector: np.ndarray, height: int, width: int) -> 'Image':
		vector = np.asarray(vector, dtype=np.float64)
		if vector.size != height * width:
			raise DimensionMismatch('Vector of length {} cannot form a {}x{} image'.format(vector.size, height, width))
		return cls(vector.reshape(height, width))

	@property
	def data(self) -> np.ndarray:
		return self.__data

	@property
	def height(self) -> int:
		return self.__data.shape[0]

	@property
	def width(self) -> int:
		return self.__data.shape[1]

	@property
	def shape(self) -> Tuple[int, int]:
		return self.height, self.width

	@property
	def size(self) -> int:
		return self.__data.size

	def vector(self) -> np.ndarray:
		return self.__data.reshape(-1)

	def save_sdip(self, file_path: str):
		sdip_format.write(file_path, self.__data)

	def save_pgm(self, file_path: str):
		pgm.write(file_path, self.__data)

	@classmethod
	def load_sdip(cls, file_path: str) -> 'Image':
		array, _ = sdip_format.read(file_path)
		return cls(array)

	@classmethod
	def load_pgm(cls, file_path: str) -> 'Image':
		return cls(pgm.read(file_path))

	def __eq__(self, other):
		return isinstance(other, Image) and np.array_equal(self.__data, other.__data)

	def __repr__(self):
		return 'Image[{}x{}]'.format(self.height, self.width)


class Measurement:
	"""
	A measurement vector of length d_y. Sinograms remember their (n_angles, n_detectors) shape
	"""
	def __init__(self, data: np.ndarray, shape: Optional[Tuple[int, int]] = None):
		self.__data = _as_finite_array(np.asarray(data).reshape(-1), 1, 'Measurement')
		self.__data.setflags(write=False)
		if shape is not None and shape[0] * shape[1] != self.__data.size:
			raise DimensionMismatch('Shape {} does not fit a measurement of length {}'.format(shape, self.__data.size))
		self.__shape = shape

	@property
	def data(self) -> np.ndarray:
		return self.__data

	@property
	def shape(self) -> Optional[Tuple[int, int]]:
		return self.__shape

	@property
	def size(self) -> int:
		return self.__data.size

	def as_2d(self) -> np.ndarray:
		if self.__shape is None:
			return self.__data.reshape(1, -1)
		return self.__data.reshape(self.__shape)

	def save_sdip(self, file_path: str):
		sdip_format.write(file_path, self.as_2d())

	@classmethod
	def load_sdip(cls, file_path: str) -> 'Measurement':
		array, _ = sdip_format.read(file_path)
		return cls(array.reshape(-1), shape=(array.shape[0], array.shape[1]) if array.shape[0] > 1 else None)

	def __eq__(self, other):
		return isinstance(other, Measurement) and np.array_equal(self.__data, other.__data)

	def __repr__(self):
		return 'Measurement[{}]'.format(self.__data.size if self.__shape is None else '{}x{}'.format(*self.__shape))
