import os
import tempfile
import unittest
from unittest import mock

import numpy as np

from subdip.harness import pipeline
from subdip.harness.experiment_config import PretrainingConfig
from subdip.harness.pipeline import run_pipeline
from subdip.harness.run_report import read_trace, load_summary, trace_digest, TRACE_FILE, REPORT_FILE, CONFIG_SNAPSHOT_FILE
from subdip.network.evaluator import NetworkEvaluator, NetworkInput
from subdip.operators.image import Image, Measurement
from subdip.optim.stopping import StopState
from subdip.subspace.subspace_model import SubspaceModel, init_coefficients
from subdip.utils.exception import ConfigError, NumericalFailure
from tests.harness.tiny_experiment import tiny_experiment


def deterministic_columns(trace):
	return [(row.step, row.loss, row.raw_psnr, row.minloss_psnr) for row in trace]


class MyTestCase(unittest.TestCase):
	def test_0_subspace_run(self):
		with tempfile.TemporaryDirectory() as directory:
			cfg = tiny_experiment(directory)
			report = run_pipeline(cfg)
			self.assertTrue(report.complete, report.failure)
			self.assertEqual(0, report.exit_code)
			self.assertEqual(list(range(6)), [row.step for row in report.trace])
			for name in (TRACE_FILE, REPORT_FILE, CONFIG_SNAPSHOT_FILE, 'subdip.log', 'reconstruction_conv.sdip', 'reconstruction_best.pgm', pipeline.FINAL_ITERATE_FILE):
				self.assertTrue(os.path.isfile(os.path.join(directory, name)), name)
			self.assertEqual(3, report.header['d_sub'])
			self.assertEqual(6, report.header['d_pre'])

			trace = read_trace(os.path.join(directory, TRACE_FILE))
			self.assertEqual(report.trace, trace)
			summary = load_summary(directory)
			self.assertFalse(summary['stop_fired'])
			self.assertEqual(5, summary['conv_index'])
			gap = max(row.minloss_psnr for row in trace) - trace[summary['conv_index']].minloss_psnr
			self.assertAlmostEqual(gap, summary['gap'], places=9)
			self.assertGreaterEqual(summary['gap'], 0)

	def test_1_determinism(self):
		with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
			a = run_pipeline(tiny_experiment(first))
			b = run_pipeline(tiny_experiment(second))
			self.assertTrue(a.complete and b.complete)
			self.assertEqual(deterministic_columns(a.trace), deterministic_columns(b.trace))
			self.assertEqual(trace_digest(a.trace), trace_digest(b.trace))
			with open(os.path.join(first, TRACE_FILE), encoding='utf8') as fa, open(os.path.join(second, TRACE_FILE), encoding='utf8') as fb:
				strip = lambda lines: [line.split(',')[:1] + line.split(',')[2:] for line in lines]
				self.assertEqual(strip(fa.readlines()), strip(fb.readlines()))

	def test_2_zero_steps(self):
		with tempfile.TemporaryDirectory() as directory:
			cfg = tiny_experiment(directory, optimizer='adam', max_steps=0)
			report = run_pipeline(cfg)
			self.assertTrue(report.complete, report.failure)
			self.assertEqual(1, len(report.trace))
			model = SubspaceModel.load(cfg.subspace_directory())
			c0 = init_coefficients(cfg.subspace.d_sub, cfg.run_seeds().init)
			network_input = Image.load_sdip(os.path.join(directory, 'network_input.sdip'))
			expected = NetworkEvaluator(cfg.network, NetworkInput(network_input)).forward(model.gamma(c0).data)
			np.testing.assert_allclose(report.conv_image.data, expected, rtol=0, atol=1e-12)
			self.assertEqual(report.conv_image, Image.load_sdip(os.path.join(directory, 'reconstruction_conv.sdip')))

	def test_3_artifacts_reused(self):
		with tempfile.TemporaryDirectory() as directory:
			self.assertTrue(run_pipeline(tiny_experiment(directory, max_steps=1)).complete)
			cfg = tiny_experiment(directory, max_steps=1, seed=4)
			cfg.pin_shared_directories()
			cfg.output_directory = os.path.join(directory, 'again')
			with mock.patch('subdip.harness.pipeline.pretrain', side_effect=AssertionError('pre-trained again')), \
					mock.patch('subdip.harness.pipeline.batch_svd', side_effect=AssertionError('extracted again')):
				report = run_pipeline(cfg)
			self.assertTrue(report.complete, report.failure)

	def test_4_settings_change_invalidates(self):
		with tempfile.TemporaryDirectory() as directory:
			cfg = tiny_experiment(directory, max_steps=1)
			first = pipeline.run_extraction(cfg, force=False)
			cfg.subspace.d_sub = 2
			second = pipeline.run_extraction(cfg, force=False)
			self.assertEqual(3, first.model.d_sub)
			self.assertEqual(2, second.model.d_sub)
			self.assertEqual(2, SubspaceModel.load(cfg.subspace_directory()).d_sub)

	def test_5_baselines(self):
		with tempfile.TemporaryDirectory() as directory:
			dip = run_pipeline(tiny_experiment(os.path.join(directory, 'dip'), method='dip', optimizer='adam', stop='auto'))
			self.assertTrue(dip.complete, dip.failure)
			self.assertEqual('variance', dip.stop_rule)
			self.assertNotIn('d_sub', dip.header)
			self.assertFalse(os.path.isdir(os.path.join(directory, 'dip', 'pretrain')))

			edip = run_pipeline(tiny_experiment(os.path.join(directory, 'edip'), method='edip', optimizer='lbfgs', max_steps=3))
			self.assertTrue(edip.complete, edip.failure)
			self.assertTrue(os.path.isdir(os.path.join(directory, 'edip', 'pretrain')))
			self.assertLessEqual(len(edip.trace), 4)

	def test_6_stop_replay(self):
		with tempfile.TemporaryDirectory() as directory:
			cfg = tiny_experiment(directory, optimizer='adam', max_steps=40, stop='loss')
			cfg.stop.patience = 3
			report = run_pipeline(cfg)
			self.assertTrue(report.complete, report.failure)
			self.assertEqual('loss', report.stop_rule)
			replay = StopState(0.995, 3)
			for row in report.trace:
				replay.check(row.loss)
			self.assertEqual(replay.i_min, report.stop_index)
			if report.stop_fired:
				self.assertEqual(report.stop_index + 3, report.trace[-1].step)
				self.assertEqual(report.stop_index, report.conv_index)
			else:
				self.assertEqual(40, report.trace[-1].step)

	def test_7_denoise(self):
		with tempfile.TemporaryDirectory() as directory:
			cfg = tiny_experiment(directory, task='denoise', optimizer='adam', max_steps=2)
			self.assertEqual(0.0, cfg.tv_weight())
			report = run_pipeline(cfg)
			self.assertTrue(report.complete, report.failure)
			y = Measurement.load_sdip(os.path.join(directory, 'measurement.sdip'))
			x0 = Image.load_sdip(os.path.join(directory, 'network_input.sdip'))
			np.testing.assert_array_equal(y.data, x0.vector())

	def test_8_failures(self):
		with tempfile.TemporaryDirectory() as directory:
			small = os.path.join(directory, 'small.pgm')
			Image(np.zeros((4, 4))).save_pgm(small)
			report = run_pipeline(tiny_experiment(os.path.join(directory, 'a'), ground_truth_file=small))
			self.assertFalse(report.complete)
			self.assertEqual('setup', report.failed_stage)
			self.assertEqual(2, report.exit_code)
			self.assertEqual('setup', load_summary(os.path.join(directory, 'a'))['failed_stage'])

			with mock.patch('subdip.harness.pipeline.optimise', side_effect=NumericalFailure('Non-finite loss', {'step': 3})):
				report = run_pipeline(tiny_experiment(os.path.join(directory, 'b')))
			self.assertEqual('reconstruct', report.failed_stage)
			self.assertEqual(3, report.exit_code)
			self.assertIn('step=3', report.failure)

	def test_9_randomised_degradation(self):
		with tempfile.TemporaryDirectory() as directory:
			cfg = tiny_experiment(directory, task='denoise', optimizer='adam', max_steps=1, noise_p=0.1)
			cfg.pretraining.degradation = 'random'
			self.assertTrue(run_pipeline(cfg).complete)
			again = tiny_experiment(directory, task='denoise', optimizer='adam', max_steps=1, noise_p=0.3)
			again.pretraining.degradation = 'random'
			again.pin_shared_directories()
			again.output_directory = os.path.join(directory, 'again')
			self.assertEqual(pipeline.pretraining_fingerprint(cfg), pipeline.pretraining_fingerprint(again))
			with mock.patch('subdip.harness.pipeline.pretrain', side_effect=AssertionError('pre-trained again')), \
					mock.patch('subdip.harness.pipeline.batch_svd', side_effect=AssertionError('extracted again')):
				report = run_pipeline(again)
			self.assertTrue(report.complete, report.failure)

			cfg.pretraining.degradation = again.pretraining.degradation = 'fixed'
			self.assertNotEqual(pipeline.pretraining_fingerprint(cfg), pipeline.pretraining_fingerprint(again))

	def test_10_degradation_levels(self):
		with tempfile.TemporaryDirectory() as directory:
			cfg = tiny_experiment(directory, task='deblur', noise_p=0.2)
			self.assertEqual([(None, 0.2)] * 3, pipeline.degradation_levels(cfg, 3, np.random.default_rng(0)))
			cfg.pretraining.degradation = 'random'
			levels = pipeline.degradation_levels(cfg, 50, np.random.default_rng(0))
			self.assertTrue(all(0.4 <= kappa <= 2.0 and p == 0.05 for kappa, p in levels))
			self.assertEqual(levels, pipeline.degradation_levels(cfg, 50, np.random.default_rng(0)))
			cfg.task = 'denoise'
			levels = pipeline.degradation_levels(cfg, 50, np.random.default_rng(1))
			self.assertTrue(all(kappa is None and 0.05 <= p <= 0.5 for kappa, p in levels))
			self.assertGreater(len({p for _, p in levels}), 1)
			self.assertEqual(cfg.pretraining.dataset_size, len(pipeline.pretraining_dataset(cfg, *pipeline.build_operator(cfg))))
			self.assertRaises(ConfigError, PretrainingConfig.deserialize, {'noise_p_range': [0.5, 0.1]})
			self.assertRaises(ConfigError, PretrainingConfig.deserialize, {'blur_kappa_range': [0.0, 2.0]})


if __name__ == '__main__':
	unittest.main()
