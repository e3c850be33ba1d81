"""
Logging of subdip runs: a coloured console, the log file of the current run directory and per-subsystem debug switches
"""
import functools
import logging
import os
import sys
from enum import Enum, unique, auto
from threading import RLock
from typing import Dict, Optional, Set

from colorlog import ColoredFormatter

from subdip.constants import core_constant
from subdip.utils import file_util


@unique
class DebugOption(Enum):
	# keep in sync with the debug block of the default config
	ALL = auto()
	OPERATORS = auto()
	NETWORK = auto()
	SUBSPACE = auto()
	OBJECTIVE = auto()
	OPTIM = auto()
	HARNESS = auto()


# comparisons run in worker processes, so records name their process instead of their thread
CONSOLE_FORMAT = '[%(name)s] [%(asctime)s] [%(processName)s/%(log_color)s%(levelname)s%(reset)s]: %(message_log_color)s%(message)s%(reset)s'
FILE_FORMAT = '[%(asctime)s] [%(processName)s/%(levelname)s]: %(message)s'
LEVEL_COLORS = {
	'DEBUG': 'blue',
	'INFO': 'green',
	'WARNING': 'yellow',
	'ERROR': 'red',
	'CRITICAL': 'bold_red',
}
MESSAGE_COLORS = {
	'message': {
		'WARNING': 'yellow',
		'ERROR': 'red',
		'CRITICAL': 'red'
	}
}


def console_formatter() -> logging.Formatter:
	return ColoredFormatter(CONSOLE_FORMAT, log_colors=LEVEL_COLORS, secondary_log_colors=MESSAGE_COLORS, datefmt='%H:%M:%S')


def file_formatter() -> logging.Formatter:
	return logging.Formatter(FILE_FORMAT, datefmt='%Y-%m-%d %H:%M:%S')


class LockedStreamHandler(logging.StreamHandler):
	# the tracing workers of the tomography operator log concurrently
	__write_lock = RLock()

	def emit(self, record) -> None:
		with self.__write_lock:
			super().emit(record)


class SubDipLogger(logging.Logger):
	def __init__(self, name: str = core_constant.NAME_SHORT):
		super().__init__(name)
		self.setLevel(logging.DEBUG)
		self.__debug_enabled: Set[DebugOption] = set()
		self.console_handler = LockedStreamHandler(sys.stdout)
		self.console_handler.setFormatter(console_formatter())
		self.addHandler(self.console_handler)
		self.file_handler: Optional[logging.FileHandler] = None

	def set_debug_options(self, debug_options: Dict[str, bool]):
		"""
		:param debug_options: Lower case option name -> enabled, the debug block of an experiment config
		"""
		self.__debug_enabled = {DebugOption[key.upper()] for key, enabled in debug_options.items() if enabled}
		for option in sorted(self.__debug_enabled, key=lambda o: o.value):
			self.debug('Debug logging of {} enabled'.format(option.name.lower()), option=option)

	def should_log_debug(self, option: Optional[DebugOption] = None) -> bool:
		if DebugOption.ALL in self.__debug_enabled:
			return True
		return option is not None and option in self.__debug_enabled

	def debug(self, *args, option: Optional[DebugOption] = None, **kwargs):
		"""
		Debug records are dropped unless their subsystem, or every subsystem, has been switched on
		"""
		if self.should_log_debug(option):
			super().debug(*args, **kwargs)

	def set_console_level(self, level: int):
		self.console_handler.setLevel(level)

	@property
	def log_file(self) -> Optional[str]:
		return self.file_handler.baseFilename if self.file_handler is not None else None

	def set_file(self, directory: str) -> str:
		"""
		Mirror the records into the log file of a run directory, replacing the previous one

		:return: The path of the log file
		"""
		self.unset_file()
		file_util.touch_directory(directory)
		self.file_handler = logging.FileHandler(os.path.join(directory, core_constant.LOGGING_FILE_NAME), encoding='utf8')
		self.file_handler.setFormatter(file_formatter())
		self.addHandler(self.file_handler)
		return self.file_handler.baseFilename

	def unset_file(self):
		if self.file_handler is not None:
			self.removeHandler(self.file_handler)
			self.file_handler.close()
			self.file_handler = None


@functools.lru_cache(maxsize=None)
def get_logger() -> SubDipLogger:
	"""
	The process-wide logger, created on first use
	"""
	return SubDipLogger()
