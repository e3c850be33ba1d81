"""
Method comparison over seeds: mean and standard deviation of the run metrics, Pareto flags, CSV and text tables
"""
import concurrent.futures
import csv
import math
import os
from typing import Callable, List, Optional, Sequence, Dict

import numpy as np

from subdip.harness.experiment_config import ExperimentConfig
from subdip.harness.pipeline import run_pipeline
from subdip.harness.run_report import RunReport
from subdip.utils import file_util
from subdip.utils.exception import IllegalArgument
from subdip.utils.logger import get_logger

SUMMARY_CSV_FILE = 'summary.csv'
SUMMARY_TABLE_FILE = 'summary.txt'
METRICS = ('max_psnr', 'conv_psnr', 'gap', 'time_to_convergence_s')

Runner = Callable[[ExperimentConfig], RunReport]


class MetricStats:
	def __init__(self, values: Sequence[float]):
		values = np.asarray(values, dtype=np.float64)
		self.count = len(values)
		# population deviation, a single run gives 0
		self.mean = float(np.mean(values)) if self.count > 0 else math.nan
		self.std = float(np.std(values)) if self.count > 0 else math.nan

	def __repr__(self):
		return '{:.4g}+-{:.3g}'.format(self.mean, self.std)


class MethodSummary:
	def __init__(self, name: str, reports: List[RunReport], expected_runs: int):
		self.name = name
		self.reports = reports
		self.expected_runs = expected_runs
		completed = [report for report in reports if report.complete]
		self.completed_runs = len(completed)
		self.stats: Dict[str, MetricStats] = {metric: MetricStats([getattr(report, metric) for report in completed]) for metric in METRICS}
		self.pareto = False

	@property
	def incomplete(self) -> bool:
		return self.completed_runs < self.expected_runs

	def dominated_by(self, other: 'MethodSummary') -> bool:
		"""
		Other is at least as fast and as accurate, and strictly better in one of them
		"""
		t, p = self.stats['time_to_convergence_s'].mean, self.stats['conv_psnr'].mean
		ot, op = other.stats['time_to_convergence_s'].mean, other.stats['conv_psnr'].mean
		return ot <= t and op >= p and (ot < t or op > p)


class ComparisonTable:
	def __init__(self, rows: List[MethodSummary]):
		self.rows = rows
		flag_pareto(rows)

	def row(self, name: str) -> MethodSummary:
		for row in self.rows:
			if row.name == name:
				return row
		raise KeyError(name)

	def header(self) -> List[str]:
		columns = ['method', 'runs', 'completed', 'incomplete', 'pareto']
		for metric in METRICS:
			columns += ['{}_mean'.format(metric), '{}_std'.format(metric)]
		return columns

	def write_csv(self, file_path: str):
		with file_util.safe_write(file_path, encoding='utf8') as file:
			writer = csv.writer(file, lineterminator='\n')
			writer.writerow(self.header())
			for row in self.rows:
				line = [row.name, row.expected_runs, row.completed_runs, row.incomplete, row.pareto]
				for metric in METRICS:
					line += [repr(row.stats[metric].mean), repr(row.stats[metric].std)]
				writer.writerow(line)

	def format_table(self) -> str:
		titles = ['Method', 'Runs', 'Max PSNR', 'Conv PSNR', 'Gap', 'Time (s)', 'Pareto']
		lines = []
		for row in self.rows:
			runs = '{}/{}'.format(row.completed_runs, row.expected_runs)
			if row.incomplete:
				runs += ' (incomplete)'
			cells = [row.name, runs]
			for metric in METRICS:
				stats = row.stats[metric]
				cells.append('{:.2f} +- {:.2f}'.format(stats.mean, stats.std))
			cells.append('yes' if row.pareto else 'no')
			lines.append(cells)
		widths = [max(len(titles[i]), *(len(cells[i]) for cells in lines)) if len(lines) > 0 else len(titles[i]) for i in range(len(titles))]

		def render(cells: List[str]) -> str:
			return ' | '.join(cell.ljust(width) for cell, width in zip(cells, widths)).rstrip()

		return '\n'.join([render(titles), '-+-'.join('-' * w for w in widths)] + [render(cells) for cells in lines])

	def save(self, directory: str):
		file_util.touch_directory(directory)
		self.write_csv(os.path.join(directory, SUMMARY_CSV_FILE))
		with file_util.safe_write(os.path.join(directory, SUMMARY_TABLE_FILE), encoding='utf8') as file:
			file.write(self.format_table() + '\n')


def flag_pareto(rows: List[MethodSummary]):
	"""
	Mark the methods that no other method beats in both mean time to convergence and mean conv PSNR. Methods without
	any completed run are never on the front
	"""
	candidates = [row for row in rows if row.completed_runs > 0]
	for row in rows:
		row.pareto = row in candidates and not any(other is not row and row.dominated_by(other) for other in candidates)


def seeded_config(cfg: ExperimentConfig, seed: int, phantom_seed: Optional[int] = None) -> ExperimentConfig:
	"""
	A copy running with the given seeds in its own sub-directory, still sharing the pre-training and subspace
	directories of the original
	"""
	result = cfg.copy()
	result.pin_shared_directories()
	result.seed = seed
	sub_directory = 'seed_{}'.format(seed)
	if phantom_seed is not None:
		result.phantom.seed = phantom_seed
		sub_directory = 'phantom_{}_{}'.format(phantom_seed, sub_directory)
	result.output_directory = os.path.join(cfg.output_directory, sub_directory)
	return result


def _run_jobs(jobs: List[ExperimentConfig], runner: Runner, workers: int) -> List[RunReport]:
	if workers <= 1 or len(jobs) <= 1:
		return [runner(job) for job in jobs]
	# the first job creates the shared pre-training and subspace, the others only read them
	first = runner(jobs[0])
	with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
		return [first] + list(executor.map(runner, jobs[1:]))


def compare_methods(
		configs: List[ExperimentConfig], seeds: List[int], *,
		phantom_seeds: Optional[List[int]] = None, runner: Runner = run_pipeline, workers: int = 1,
		output_directory: Optional[str] = None
) -> ComparisonTable:
	"""
	Run every config for every seed (and phantom seed) and summarise per config name

	:param runner: Executes one config. Must be picklable when workers > 1
	:param workers: Processes running the (config, seed) jobs of one config concurrently
	:param output_directory: Where the summary CSV and table are saved, if given
	"""
	if len(configs) == 0 or len(seeds) == 0:
		raise IllegalArgument('At least one config and one seed are needed, found {} and {}'.format(len(configs), len(seeds)))
	logger = get_logger()
	phantom_choices = phantom_seeds if phantom_seeds is not None and len(phantom_seeds) > 0 else [None]
	rows = []
	for cfg in configs:
		jobs = [seeded_config(cfg, seed, phantom_seed) for phantom_seed in phantom_choices for seed in seeds]
		logger.info('Comparing {}: {} runs'.format(cfg.name, len(jobs)))
		reports = _run_jobs(jobs, runner, workers)
		for report in reports:
			if not report.complete:
				logger.warning('Run {} of {} failed at {}: {}'.format(report.run_directory, cfg.name, report.failed_stage, report.failure))
		rows.append(MethodSummary(cfg.name, reports, len(jobs)))
	table = ComparisonTable(rows)
	if output_directory is not None:
		table.save(output_directory)
	logger.info('Summary\n{}'.format(table.format_table()))
	return table
