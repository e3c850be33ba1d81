import csv
import math
import os
import tempfile
import unittest

import numpy as np

from subdip.constants import core_constant
from subdip.harness.compare import compare_methods, seeded_config, MethodSummary, flag_pareto, SUMMARY_CSV_FILE, SUMMARY_TABLE_FILE
from subdip.harness.experiment_config import ExperimentConfig
from subdip.harness.run_report import RunReport, TraceRow
from subdip.utils.exception import ConfigError, IllegalArgument

# (max psnr, conv psnr, seconds to convergence) offsets of the fake methods
PROFILES = {
	'fast_good': (30.0, 29.5, 1.0),
	'slow_good': (31.0, 30.0, 5.0),
	'slow_bad': (28.0, 25.0, 6.0),
}


def fake_report(cfg: ExperimentConfig) -> RunReport:
	"""
	A two-step trace whose metrics are a function of the method name and the seed, with the stop accepted at step 0
	"""
	max_psnr, conv_psnr, seconds = PROFILES[cfg.name]
	wobble = 0.1 * cfg.seed
	report = RunReport(cfg.name, cfg.output_directory)
	report.trace.append(TraceRow(0, seconds + wobble, 2.0, conv_psnr + wobble, conv_psnr + wobble))
	report.trace.append(TraceRow(1, seconds + 1, 1.0, max_psnr + 2 * wobble, max_psnr + 2 * wobble))
	report.stop_fired = True
	report.stop_index = 0
	return report


def failing_on_seed_1(cfg: ExperimentConfig) -> RunReport:
	report = fake_report(cfg)
	if cfg.seed == 1:
		report.fail('reconstruct', ConfigError('boom'), core_constant.EXIT_CONFIG_ERROR)
	return report


def method(name: str) -> ExperimentConfig:
	return ExperimentConfig(name=name, output_directory=os.path.join('runs', name))


class MyTestCase(unittest.TestCase):
	def test_0_single_run(self):
		table = compare_methods([method('fast_good')], [0], runner=fake_report)
		row = table.row('fast_good')
		self.assertEqual(1, row.completed_runs)
		self.assertFalse(row.incomplete)
		for stats in row.stats.values():
			self.assertEqual(0.0, stats.std)
		self.assertEqual(29.5, row.stats['conv_psnr'].mean)
		self.assertEqual(0.5, row.stats['gap'].mean)

	def test_1_means_match_recomputation(self):
		seeds = [0, 1, 2]
		table = compare_methods([method('slow_good')], seeds, runner=fake_report)
		reports = [fake_report(seeded_config(method('slow_good'), seed)) for seed in seeds]
		row = table.row('slow_good')
		for metric in ('max_psnr', 'conv_psnr', 'gap', 'time_to_convergence_s'):
			values = [getattr(report, metric) for report in reports]
			self.assertAlmostEqual(sum(values) / len(values), row.stats[metric].mean, delta=1e-12)
			self.assertAlmostEqual(float(np.std(values)), row.stats[metric].std, delta=1e-12)
		self.assertGreater(row.stats['conv_psnr'].std, 0)

	def test_2_pareto(self):
		table = compare_methods([method(name) for name in PROFILES], [0], runner=fake_report)
		self.assertTrue(table.row('fast_good').pareto)
		self.assertTrue(table.row('slow_good').pareto)
		self.assertFalse(table.row('slow_bad').pareto)

	def test_3_incomplete(self):
		table = compare_methods([method('fast_good')], [0, 1, 2], runner=failing_on_seed_1)
		row = table.row('fast_good')
		self.assertTrue(row.incomplete)
		self.assertEqual(2, row.completed_runs)
		self.assertEqual(3, row.expected_runs)
		self.assertAlmostEqual(29.6, row.stats['conv_psnr'].mean, delta=1e-12)
		self.assertIn('incomplete', table.format_table())

		nothing = MethodSummary('nothing', [], 2)
		self.assertTrue(math.isnan(nothing.stats['gap'].mean))
		flag_pareto([nothing])
		self.assertFalse(nothing.pareto)

	def test_4_files(self):
		with tempfile.TemporaryDirectory() as directory:
			compare_methods([method(name) for name in PROFILES], [0, 2], runner=fake_report, output_directory=directory)
			with open(os.path.join(directory, SUMMARY_CSV_FILE), encoding='utf8') as file:
				rows = list(csv.DictReader(file))
			self.assertEqual(list(PROFILES.keys()), [row['method'] for row in rows])
			self.assertEqual(['True', 'True', 'False'], [row['pareto'] for row in rows])
			self.assertAlmostEqual(29.6, float(rows[0]['conv_psnr_mean']), delta=1e-12)
			with open(os.path.join(directory, SUMMARY_TABLE_FILE), encoding='utf8') as file:
				text = file.read()
			for name in PROFILES:
				self.assertIn(name, text)

	def test_5_seeded_config(self):
		cfg = method('fast_good')
		seeded = seeded_config(cfg, 7, phantom_seed=2)
		self.assertEqual(7, seeded.seed)
		self.assertEqual(2, seeded.phantom.seed)
		self.assertEqual(os.path.join('runs', 'fast_good', 'phantom_2_seed_7'), seeded.output_directory)
		self.assertEqual(cfg.pretraining_directory(), seeded.pretraining_directory())
		self.assertEqual(cfg.subspace_directory(), seeded.subspace_directory())
		self.assertEqual(0, cfg.seed)
		self.assertIsNone(cfg.pretraining.directory)

		table = compare_methods([cfg], [0, 1], phantom_seeds=[3, 4, 5], runner=fake_report)
		self.assertEqual(6, table.row('fast_good').expected_runs)

	def test_6_arguments(self):
		self.assertRaises(IllegalArgument, compare_methods, [], [0], runner=fake_report)
		self.assertRaises(IllegalArgument, compare_methods, [method('fast_good')], [], runner=fake_report)


if __name__ == '__main__':
	unittest.main()
