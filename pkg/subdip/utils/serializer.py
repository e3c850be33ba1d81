"""
Typed conversion between json/yaml-like trees and config objects
"""
import copy
import functools
from abc import ABC
from enum import Enum, EnumMeta
from typing import Union, TypeVar, List, Dict, Type, get_type_hints, Any, Literal, Tuple

from typing_extensions import Self

T = TypeVar('T')


def _get_origin(cls: Type):
	return getattr(cls, '__origin__', None)


def _get_args(cls: Type) -> tuple:
	return getattr(cls, '__args__', ())


def _field_hints(cls: Type) -> Dict[str, Type]:
	try:
		hints = get_type_hints(cls)
	except Exception:
		hints = get_type_hints(cls, globalns={})
	return {name: hint for name, hint in hints.items() if not name.startswith('_')}


def serialize(obj: Any) -> Union[None, int, float, str, bool, list, dict]:
	"""
	Convert an object into a tree made of None, int, float, str, bool, list and dict

	*   Enum members are serialized into their names
	*   Tuples become lists
	*   Other objects become a dict of their public fields. For :class:`Serializable`, the field order follows the annotations
	"""
	if type(obj) in (type(None), int, float, str, bool):
		return obj
	if isinstance(obj, (list, tuple)):
		return [serialize(item) for item in obj]
	if isinstance(obj, dict):
		return {key: serialize(value) for key, value in obj.items()}
	if isinstance(obj, Enum):
		return obj.name
	# numpy scalars
	if hasattr(obj, 'item') and callable(obj.item) and getattr(obj, 'shape', None) == ():
		return obj.item()

	try:
		fields = {name: value for name, value in vars(obj).items() if not name.startswith('_')}
	except TypeError:
		raise TypeError('Unsupported input type {}'.format(type(obj))) from None
	if isinstance(obj, Serializable):
		order = list(type(obj).get_field_annotations().keys())
		fields = dict(sorted(fields.items(), key=lambda item: order.index(item[0]) if item[0] in order else len(order)))
	return serialize(fields)


def deserialize(data: Any, cls: Type[T], *, error_at_missing: bool = False, error_at_redundancy: bool = False, key_path: str = '') -> T:
	"""
	Convert a json/yaml-like tree into an object of class ``cls``

	Supported targets: None, bool, int, float (also accepting int), str, list, dict, ``List[X]``, ``Dict[K, V]``, ``Tuple[...]``,
	``Optional`` / ``Union``, ``Literal``, ``Any``, Enum classes (by member name) and classes with annotated fields
	and a no-argument constructor

	:keyword error_at_missing: Raise if an annotated field is absent from the input
	:keyword error_at_redundancy: Raise if the input has keys that the class doesn't declare
	:keyword key_path: The dotted location of ``data`` inside the whole tree, used in error messages
	:raise TypeError: If the input doesn't match the target class
	:raise ValueError: If the input is invalid, e.g. Literal mismatch, missing / unknown fields, or failed validation
	"""
	where = ' at "{}"'.format(key_path) if len(key_path) > 0 else ''
	kwargs = dict(error_at_missing=error_at_missing, error_at_redundancy=error_at_redundancy)

	def child_path(key: Any) -> str:
		return '{}.{}'.format(key_path, key) if len(key_path) > 0 else str(key)

	def mismatch(expected: str):
		raise TypeError('Mismatched input type{}: expected {} but found {} ({!r})'.format(where, expected, type(data).__name__, data))

	if cls is None:
		cls = type(None)
	if cls is Any:
		return data

	origin = _get_origin(cls)
	if origin is Union:
		for candidate in _get_args(cls):
			try:
				return deserialize(data, candidate, **kwargs, key_path=key_path)
			except (TypeError, ValueError):
				pass
		raise TypeError('Data {!r}{} cannot match any candidate of {}'.format(data, where, cls))

	if origin is Literal:
		if data in _get_args(cls):
			return data
		raise ValueError('Value {!r}{} is not one of {}'.format(data, where, list(_get_args(cls))))

	if cls in (type(None), bool, int, float, str, list, dict):
		if type(data) is cls:
			return data
		if cls is float and type(data) is int:
			return float(data)
		mismatch(cls.__name__)

	if origin in (list, List):
		if not isinstance(data, list):
			mismatch('list')
		element_type = _get_args(cls)[0]
		return [deserialize(item, element_type, **kwargs, key_path=child_path(i)) for i, item in enumerate(data)]

	if origin in (tuple, Tuple):
		if not isinstance(data, (list, tuple)):
			mismatch('list')
		element_types = _get_args(cls)
		if len(element_types) == 2 and element_types[1] is Ellipsis:
			element_types = (element_types[0],) * len(data)
		if len(element_types) != len(data):
			raise ValueError('Expected {} elements{} but found {}'.format(len(element_types), where, len(data)))
		return tuple(deserialize(item, et, **kwargs, key_path=child_path(i)) for i, (item, et) in enumerate(zip(data, element_types)))

	if origin in (dict, Dict):
		if not isinstance(data, dict):
			mismatch('dict')
		key_type, value_type = _get_args(cls)
		return {
			deserialize(key, key_type, **kwargs, key_path=key_path): deserialize(value, value_type, **kwargs, key_path=child_path(key))
			for key, value in data.items()
		}

	if isinstance(cls, EnumMeta):
		if isinstance(data, str) and data in cls.__members__:
			return cls[data]
		raise ValueError('Value {!r}{} is not one of {}'.format(data, where, list(cls.__members__.keys())))

	if isinstance(cls, type):
		if not isinstance(data, dict):
			mismatch('dict')
		result = cls()
		remaining = set(data.keys())
		for name, hint in _field_hints(cls).items():
			if name in data:
				value = deserialize(data[name], hint, **kwargs, key_path=child_path(name))
				if isinstance(result, Serializable):
					result.validate_attribute(name, value, key_path=child_path(name))
				setattr(result, name, value)
				remaining.discard(name)
			elif error_at_missing:
				raise ValueError('Missing field "{}"{} for {}'.format(name, where, cls.__name__))
			elif hasattr(cls, name):
				setattr(result, name, copy.copy(getattr(cls, name)))
		if error_at_redundancy and len(remaining) > 0:
			raise ValueError('Unknown key(s) {}{} for {}'.format(sorted(map(str, remaining)), where, cls.__name__))
		if isinstance(result, Serializable):
			result.on_deserialization()
		return result

	raise TypeError('Unsupported target class: {}'.format(cls))


_NONE = object()


class Serializable(ABC):
	"""
	Base class of the typed config nodes. Declare the fields with annotations and default values::

		class GeometryConfig(Serializable):
			n_angles: int = 30
			n_detectors: int = 95

	Missing values take a :func:`copy.copy` of the class default, both in the constructor and in :meth:`deserialize`
	"""

	def __init__(self, **kwargs):
		annotations = self.get_field_annotations()
		for key in kwargs.keys():
			if key not in annotations:
				raise KeyError('Unknown key received in __init__ of class {}: {}'.format(type(self).__name__, key))
		cls = type(self)
		for name in annotations:
			if name in kwargs:
				setattr(self, name, kwargs[name])
			elif hasattr(cls, name):
				setattr(self, name, copy.copy(getattr(cls, name)))

	@classmethod
	@functools.lru_cache()
	def get_field_annotations(cls) -> Dict[str, Type]:
		return _field_hints(cls)

	def serialize(self) -> dict:
		return serialize(self)

	@classmethod
	def deserialize(cls, data: dict, **kwargs) -> Self:
		return deserialize(data, cls, **kwargs)

	@classmethod
	def get_default(cls) -> Self:
		return cls()

	def copy(self) -> Self:
		"""
		Make a deep copy through a serialize / deserialize round trip
		"""
		return type(self).deserialize(self.serialize())

	def validate_attribute(self, attr_name: str, attr_value: Any, **kwargs):
		"""
		Invoked before an attribute is set during deserialization. Raise :class:`ValueError` for bad values

		:keyword key_path: The dotted path of the attribute in the whole tree
		"""
		pass

	def on_deserialization(self, **kwargs):
		"""
		Invoked after being fully deserialized, e.g. for cross-field checks
		"""
		pass

	def __eq__(self, other: Any) -> bool:
		if self is other:
			return True
		if not isinstance(other, type(self)):
			return False
		for name in self.get_field_annotations():
			if getattr(self, name, _NONE) != getattr(other, name, _NONE):
				return False
		return True

	def __repr__(self) -> str:
		fields = ['{}={!r}'.format(name, getattr(self, name)) for name in self.get_field_annotations() if hasattr(self, name)]
		return '{}[{}]'.format(type(self).__name__, ', '.join(fields))
