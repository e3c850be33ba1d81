import functools
import os
from logging import Logger
from threading import RLock
from typing import Tuple, Dict, Union, Any

from ruamel.yaml import YAML
from ruamel.yaml.comments import CommentedMap

from subdip.utils import resources_util, file_util


class YamlDataStorage:
	"""
	A yaml document merged over a packaged default document

	Options missing in the user's file are filled from the default and reported with a warning.
	Options the default doesn't know are kept, so the typed deserialization after it can reject them
	"""
	def __init__(self, logger: Logger, file_path: str, default_file_path: str):
		self._logger = logger
		self.__file_path = file_path
		self.__default_file_path = default_file_path
		self._data = CommentedMap()
		self._data_operation_lock = RLock()

	@functools.cached_property
	def default_data(self) -> CommentedMap:
		return resources_util.get_yaml(self.__default_file_path)

	def to_dict(self) -> dict:
		with self._data_operation_lock:
			return _plain_copy(self._data)

	def file_presents(self) -> bool:
		return os.path.isfile(self.__file_path)

	def read_config(self, allowed_missing_file: bool) -> bool:
		"""
		:param allowed_missing_file: If set to False, a missing data file will result in a FileNotFoundError,
			otherwise it is treated as an empty file
		:return: if there is any missing data entry
		:raise: FileNotFoundError
		"""
		if self.file_presents():
			with open(self.__file_path, encoding='utf8') as file:
				users_data = YAML().load(file)
		else:
			if not allowed_missing_file:
				raise FileNotFoundError(self.__file_path)
			users_data = {}
		if users_data is None:
			users_data = {}
		fixed_result, has_missing = self.__fix(self.default_data, users_data)
		with self._data_operation_lock:
			self._data = fixed_result
		return has_missing

	def __fix(self, current_data: dict, users_data: Any, key_path='') -> Tuple[Any, bool]:
		"""
		:return: pair of (fixed result, has missing)
		"""
		if not isinstance(users_data, dict):
			return users_data, False
		result = users_data.copy()
		has_missing = False
		divider = '.' if len(key_path) > 0 else ''
		for key in current_data.keys():
			current_key_path = key_path + divider + key
			if key in users_data:
				if isinstance(current_data[key], dict) and users_data[key] is not None:
					result[key], missing = self.__fix(current_data[key], users_data[key], current_key_path)
					has_missing |= missing
				elif users_data[key] is None and current_data[key] is not None:
					result[key] = _plain_copy(current_data[key])
				else:
					result[key] = users_data[key]
			else:
				result[key] = _plain_copy(current_data[key])
				has_missing = True
				self._logger.warning('Option "{}" missing, use default value "{}"'.format(current_key_path, _short_repr(current_data[key])))
		return result, has_missing

	def set_values(self, changes: Dict[Union[Tuple[str, ...], str], Any]):
		"""
		Example keys: 'optimizer.ngd.n_probes', ('optimizer', 'ngd', 'n_probes')
		:param changes: change map
		"""
		with self._data_operation_lock:
			for keys, value in changes.items():
				if isinstance(keys, str):
					keys = tuple(keys.split('.'))
				assert len(keys) > 0
				data = self._data
				for i, key in enumerate(keys):
					if not isinstance(data, dict) or key not in data:
						raise KeyError('Unknown config key {} at index {}'.format('.'.join(keys), i))
					if i < len(keys) - 1:
						data = data[key]
					else:
						data[key] = value

	def save_default(self):
		with file_util.safe_write(self.__file_path, encoding='utf8') as file:
			file.write(resources_util.get_text(self.__default_file_path))


def _plain_copy(value: Any) -> Any:
	"""
	Deep copy into builtin containers and scalars, dropping the round-trip wrapper types of ruamel
	"""
	if isinstance(value, dict):
		return {str(k): _plain_copy(v) for k, v in value.items()}
	if isinstance(value, (list, tuple)):
		return [_plain_copy(v) for v in value]
	if isinstance(value, bool):
		return bool(value)
	if isinstance(value, int):
		return int(value)
	if isinstance(value, float):
		return float(value)
	if isinstance(value, str):
		return str(value)
	return value


def _short_repr(value: Any) -> str:
	text = str(_plain_copy(value))
	return text if len(text) <= 80 else text[:77] + '...'
