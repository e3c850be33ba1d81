"""
Flat network parameter vectors and their layer layout
"""
from typing import List, Tuple, Dict, NamedTuple, Optional

import numpy as np
import parse

from subdip.storage import sdip_format
from subdip.utils.exception import DimensionMismatch, DecodeError

_LAYOUT_LINE = parse.compile('{name} {shape} @{offset:d}')
_LAYOUT_HEADER = '# layout'


class LayerSlot(NamedTuple):
	name: str
	shape: Tuple[int, ...]
	offset: int

	@property
	def size(self) -> int:
		return int(np.prod(self.shape, dtype=np.int64))

	@property
	def end(self) -> int:
		return self.offset + self.size

	def to_line(self) -> str:
		return '{} {} @{}'.format(self.name, 'x'.join(map(str, self.shape)), self.offset)

	@classmethod
	def from_line(cls, line: str) -> 'LayerSlot':
		result = _LAYOUT_LINE.parse(line.strip())
		if result is None:
			raise DecodeError('Malformed layout line {!r}'.format(line))
		try:
			shape = tuple(int(s) for s in result['shape'].split('x'))
		except ValueError:
			raise DecodeError('Malformed layer shape in {!r}'.format(line)) from None
		return cls(result['name'], shape, result['offset'])


class ParamLayout:
	def __init__(self, slots: List[LayerSlot]):
		position = 0
		for slot in slots:
			if slot.offset != position:
				raise DimensionMismatch('Layer {} starts at {} but the previous one ends at {}'.format(slot.name, slot.offset, position))
			position = slot.end
		self.slots = list(slots)
		self.size = position

	@classmethod
	def from_shapes(cls, shapes: List[Tuple[str, Tuple[int, ...]]]) -> 'ParamLayout':
		slots = []
		offset = 0
		for name, shape in shapes:
			slot = LayerSlot(name, tuple(shape), offset)
			slots.append(slot)
			offset = slot.end
		return cls(slots)

	def to_text(self) -> str:
		return '\n'.join([_LAYOUT_HEADER] + [slot.to_line() for slot in self.slots]) + '\n'

	@classmethod
	def from_text(cls, text: str) -> 'ParamLayout':
		lines = [line for line in text.splitlines() if len(line.strip()) > 0]
		if len(lines) == 0 or lines[0].strip() != _LAYOUT_HEADER:
			raise DecodeError('Missing layout header')
		return cls([LayerSlot.from_line(line) for line in lines[1:]])

	def __eq__(self, other):
		return isinstance(other, ParamLayout) and self.slots == other.slots

	def __len__(self):
		return len(self.slots)


class ParamVector:
	"""
	The flattened parameter vector theta of length d_theta together with its layout
	"""
	def __init__(self, data: np.ndarray, layout: ParamLayout):
		data = np.array(data, dtype=np.float64).reshape(-1)
		if data.size != layout.size:
			raise DimensionMismatch('Parameter vector of length {} does not match a layout of size {}'.format(data.size, layout.size))
		self.data = data
		self.layout = layout

	@property
	def size(self) -> int:
		return self.data.size

	def unflatten(self) -> Dict[str, np.ndarray]:
		return {slot.name: self.data[slot.offset:slot.end].reshape(slot.shape) for slot in self.layout.slots}

	@classmethod
	def flatten(cls, layout: ParamLayout, arrays: Dict[str, np.ndarray]) -> 'ParamVector':
		data = np.zeros(layout.size)
		for slot in layout.slots:
			array = np.asarray(arrays[slot.name], dtype=np.float64)
			if array.shape != slot.shape:
				raise DimensionMismatch('Layer {} expects shape {}, got {}'.format(slot.name, slot.shape, array.shape))
			data[slot.offset:slot.end] = array.reshape(-1)
		return cls(data, layout)

	def with_data(self, data: np.ndarray) -> 'ParamVector':
		return ParamVector(data, self.layout)

	def norm(self) -> float:
		return float(np.linalg.norm(self.data))

	def save(self, file_path: str):
		sdip_format.write(file_path, self.data, footer=self.layout.to_text())

	@classmethod
	def load(cls, file_path: str, layout: Optional[ParamLayout] = None) -> 'ParamVector':
		array, footer = sdip_format.read(file_path)
		stored = ParamLayout.from_text(footer) if footer is not None else None
		if layout is None:
			if stored is None:
				raise DecodeError('{} carries no layout'.format(file_path))
			layout = stored
		elif stored is not None and stored != layout:
			raise DimensionMismatch('{} was written for another network layout'.format(file_path))
		return cls(array.reshape(-1), layout)

	def __eq__(self, other):
		return isinstance(other, ParamVector) and self.layout == other.layout and np.array_equal(self.data, other.data)

	def __repr__(self):
		return 'ParamVector[size={}, layers={}]'.format(self.size, len(self.layout))
