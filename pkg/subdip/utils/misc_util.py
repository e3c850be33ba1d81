import os
import time
from typing import Optional

import psutil


def resident_memory_bytes(pid: Optional[int] = None) -> int:
	try:
		return psutil.Process(pid if pid is not None else os.getpid()).memory_info().rss
	except psutil.NoSuchProcess:
		return 0


def format_bytes(size: float) -> str:
	for unit in ('B', 'KiB', 'MiB', 'GiB'):
		if abs(size) < 1024 or unit == 'GiB':
			return '{:.1f}{}'.format(size, unit)
		size /= 1024


class Stopwatch:
	def __init__(self):
		self.__start = time.perf_counter()

	def elapsed(self) -> float:
		return time.perf_counter() - self.__start
