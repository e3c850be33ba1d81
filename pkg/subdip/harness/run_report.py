"""
Outcome of one reconstruction run and its files: the per-step trace, the summary and the images
"""
import csv
import math
import os
from typing import List, NamedTuple, Optional, Dict, Any

from ruamel.yaml import YAML

from subdip.constants import core_constant
from subdip.operators.image import Image
from subdip.utils import file_util
from subdip.utils.exception import DecodeError

TRACE_FILE = 'trace.csv'
REPORT_FILE = 'report.yml'
CONFIG_SNAPSHOT_FILE = 'config.yml'


class TraceRow(NamedTuple):
	step: int
	wall_clock_s: float
	loss: float
	raw_psnr: float
	minloss_psnr: float


# wall_clock_s changes between identical runs and is left out of the digest
DETERMINISTIC_COLUMNS = ('step', 'loss', 'raw_psnr', 'minloss_psnr')


def write_trace(file_path: str, trace: List[TraceRow]):
	with file_util.safe_write(file_path, encoding='utf8') as file:
		writer = csv.writer(file, lineterminator='\n')
		writer.writerow(TraceRow._fields)
		for row in trace:
			writer.writerow([row.step] + [repr(float(value)) for value in row[1:]])


def read_trace(file_path: str) -> List[TraceRow]:
	with open(file_path, encoding='utf8', newline='') as file:
		reader = csv.reader(file)
		header = next(reader, None)
		if header is None or tuple(header) != TraceRow._fields:
			raise DecodeError('{} is not a trace file, header {}'.format(file_path, header))
		try:
			return [TraceRow(int(row[0]), *map(float, row[1:])) for row in reader if len(row) > 0]
		except (ValueError, TypeError) as e:
			raise DecodeError('Malformed trace row in {}: {}'.format(file_path, e)) from e


def trace_digest(trace: List[TraceRow]) -> str:
	lines = [','.join(repr(getattr(row, column)) for column in DETERMINISTIC_COLUMNS) for row in trace]
	return file_util.sha256_of_text('\n'.join(lines))


class RunReport:
	"""
	Everything a run produced. A failed run keeps the trace up to the failure and names the failed stage
	"""
	def __init__(self, name: str, run_directory: str):
		self.name = name
		self.run_directory = run_directory
		self.header: Dict[str, Any] = {}
		self.trace: List[TraceRow] = []
		self.stop_rule: Optional[str] = None
		self.stop_fired = False
		self.stop_index: Optional[int] = None
		self.termination: Optional[str] = None
		self.conv_image: Optional[Image] = None
		self.best_image: Optional[Image] = None
		self.failed_stage: Optional[str] = None
		self.failure: Optional[str] = None
		self.exit_code = core_constant.EXIT_OK
		self.total_time_s = 0.0
		self.peak_rss_bytes = 0
		self.svd_peak_bytes = 0

	@property
	def complete(self) -> bool:
		return self.failed_stage is None

	def fail(self, stage: str, error: BaseException, exit_code: int):
		self.failed_stage = stage
		self.failure = '{}: {}'.format(type(error).__name__, error)
		self.exit_code = exit_code

	@property
	def conv_index(self) -> Optional[int]:
		"""
		The accepted index of the stopping rule once it fired, the last logged step otherwise
		"""
		if len(self.trace) == 0:
			return None
		if self.stop_fired and self.stop_index is not None:
			return self.stop_index
		return len(self.trace) - 1

	def __at_conv(self, column: str) -> float:
		index = self.conv_index
		return math.nan if index is None else getattr(self.trace[index], column)

	@property
	def max_psnr(self) -> float:
		return max((row.minloss_psnr for row in self.trace), default=math.nan)

	@property
	def max_raw_psnr(self) -> float:
		return max((row.raw_psnr for row in self.trace), default=math.nan)

	@property
	def conv_psnr(self) -> float:
		return self.__at_conv('minloss_psnr')

	@property
	def conv_raw_psnr(self) -> float:
		return self.__at_conv('raw_psnr')

	@property
	def gap(self) -> float:
		return self.max_psnr - self.conv_psnr

	@property
	def time_to_convergence_s(self) -> float:
		return self.__at_conv('wall_clock_s')

	@property
	def final_loss(self) -> float:
		return self.trace[-1].loss if len(self.trace) > 0 else math.nan

	def summary(self) -> Dict[str, Any]:
		return {
			'name': self.name,
			'complete': self.complete,
			'failed_stage': self.failed_stage,
			'failure': self.failure,
			'header': dict(self.header),
			'steps': max(0, len(self.trace) - 1),
			'termination': self.termination,
			'stop_rule': self.stop_rule,
			'stop_fired': self.stop_fired,
			'conv_index': self.conv_index,
			'max_psnr': self.max_psnr,
			'conv_psnr': self.conv_psnr,
			'gap': self.gap,
			'max_raw_psnr': self.max_raw_psnr,
			'conv_raw_psnr': self.conv_raw_psnr,
			'time_to_convergence_s': self.time_to_convergence_s,
			'total_time_s': self.total_time_s,
			'final_loss': self.final_loss,
			'trace_digest': trace_digest(self.trace),
			'peak_rss_bytes': self.peak_rss_bytes,
			'svd_peak_bytes': self.svd_peak_bytes,
		}

	def save(self, directory: Optional[str] = None, *, images: bool = True):
		directory = directory if directory is not None else self.run_directory
		file_util.touch_directory(directory)
		write_trace(os.path.join(directory, TRACE_FILE), self.trace)
		with file_util.safe_write(os.path.join(directory, REPORT_FILE), encoding='utf8') as file:
			YAML().dump(self.summary(), file)
		if images:
			for label, image in (('conv', self.conv_image), ('best', self.best_image)):
				if image is not None:
					image.save_sdip(os.path.join(directory, 'reconstruction_{}.sdip'.format(label)))
					image.save_pgm(os.path.join(directory, 'reconstruction_{}.pgm'.format(label)))

	def __repr__(self):
		if not self.complete:
			return 'RunReport[{}, failed at {}: {}]'.format(self.name, self.failed_stage, self.failure)
		return 'RunReport[{}, steps={}, max={:.2f}dB, conv={:.2f}dB, gap={:.2f}dB]'.format(
			self.name, max(0, len(self.trace) - 1), self.max_psnr, self.conv_psnr, self.gap
		)


def load_summary(directory: str) -> Dict[str, Any]:
	with open(os.path.join(directory, REPORT_FILE), encoding='utf8') as file:
		return YAML(typ='safe').load(file)
