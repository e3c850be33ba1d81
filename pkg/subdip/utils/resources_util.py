"""
Access to the files packaged under subdip/, such as the default experiment config
"""
import pkgutil

from ruamel.yaml import YAML
from ruamel.yaml.comments import CommentedMap

from subdip.constants import core_constant


def get_data(path: str) -> bytes:
	"""
	:param path: Path relative to the package root. A leading slash is ignored
	:raise FileNotFoundError: if the package doesn't ship the resource
	"""
	data = pkgutil.get_data(core_constant.PACKAGE_NAME, path.lstrip('/'))
	if data is None:
		raise FileNotFoundError('Resource {} not found in package {}'.format(path, core_constant.PACKAGE_NAME))
	return data


def get_text(path: str) -> str:
	# ruamel keeps the CR of CRLF files as extra blank lines
	return get_data(path).decode('utf8').replace('\r\n', '\n')


def get_yaml(path: str) -> CommentedMap:
	"""
	Round-trip load, so the comments of the resource survive a later dump
	"""
	return YAML().load(get_text(path))
