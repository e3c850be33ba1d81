import os
import tempfile
import unittest

from subdip.constants import core_constant, numeric_constant
from subdip.harness.experiment_config import ExperimentConfig, ExperimentConfigStorage, RunSeeds, load_config, parse_config, parse_override
from subdip.utils import resources_util
from subdip.utils.exception import ConfigError
from subdip.utils.logger import get_logger
from subdip.utils.yaml_data_storage import _plain_copy


def write_text(directory: str, name: str, text: str) -> str:
	path = os.path.join(directory, name)
	with open(path, 'w', encoding='utf8') as file:
		file.write(text)
	return path


class MyTestCase(unittest.TestCase):
	def test_0_default_file_matches_classes(self):
		data = _plain_copy(resources_util.get_yaml(core_constant.DEFAULT_CONFIG_RESOURCE_PATH))
		self.assertEqual(ExperimentConfig.get_default(), parse_config(data))

	def test_1_partial_file(self):
		with tempfile.TemporaryDirectory() as directory:
			path = write_text(directory, 'exp.yml', 'task: deblur\noptimizer:\n  kind: adam\n  max_steps: 7\n')
			cfg = load_config(path)
			self.assertEqual('deblur', cfg.task)
			self.assertEqual('adam', cfg.optimizer.kind)
			self.assertEqual(7, cfg.optimizer.max_steps)
			self.assertEqual(numeric_constant.NGD_BETA, cfg.optimizer.ngd.beta)
			self.assertEqual(256, cfg.subspace.d_sub)

	def test_2_unknown_keys(self):
		with tempfile.TemporaryDirectory() as directory:
			self.assertRaises(ConfigError, load_config, write_text(directory, 'a.yml', 'no_such_option: 1\n'))
			self.assertRaises(ConfigError, load_config, write_text(directory, 'b.yml', 'optimizer:\n  ngd:\n    n_probs: 5\n'))
			self.assertRaises(ConfigError, load_config, write_text(directory, 'c.yml', 'task: mri\n'))
			self.assertRaises(ConfigError, load_config, os.path.join(directory, 'missing.yml'))

	def test_3_overrides(self):
		with tempfile.TemporaryDirectory() as directory:
			path = write_text(directory, 'exp.yml', 'name: overridden\n')
			cfg = load_config(path, dict([parse_override('optimizer.ngd.n_probes=50'), parse_override('subspace.basis=random')]))
			self.assertEqual(50, cfg.optimizer.ngd.n_probes)
			self.assertEqual('random', cfg.subspace.basis)
			self.assertRaises(ConfigError, load_config, path, {'optimizer.ngd.no_such_key': 1})
			self.assertRaises(ConfigError, load_config, path, {'subspace.d_sub': -3})
		self.assertEqual(('stop.delta', 0.99), parse_override('stop.delta=0.99'))
		self.assertEqual(('network.channels', [8, 8, 8]), parse_override('network.channels=[8, 8, 8]'))
		self.assertRaises(ConfigError, parse_override, 'stop.delta')

	def test_4_consistency(self):
		self.assertRaises(ConfigError, parse_config, {'method': 'dip', 'optimizer': {'kind': 'ngd'}})
		parse_config({'method': 'dip', 'optimizer': {'kind': 'adam'}})
		self.assertRaises(ConfigError, parse_config, {'subspace': {'d_pre': 10, 'd_sub': 20}})
		parse_config({'subspace': {'d_pre': 10, 'd_sub': 20, 'basis': 'random'}})
		self.assertRaises(ConfigError, parse_config, {'pretraining': {'phantom': {'size': 32}}})
		self.assertRaises(ConfigError, parse_config, {'ground_truth_file': '/no/such/file.pgm'})
		self.assertRaises(ConfigError, parse_config, {'network': {'scales': 2}})
		self.assertRaises(ConfigError, parse_config, {'debug': {'plugin': True}})
		self.assertRaises(ConfigError, parse_config, {'noise_p': -0.1})

	def test_5_task_defaults(self):
		self.assertEqual(numeric_constant.TV_WEIGHT_CT, parse_config({'task': 'ct'}).tv_weight())
		self.assertEqual(0.0, parse_config({'task': 'denoise'}).tv_weight())
		self.assertEqual(1e-4, parse_config({'task': 'deblur', 'objective': {'tv_weight': 1e-4}}).tv_weight())
		self.assertEqual(numeric_constant.ADAM_LR_DIP, parse_config({'method': 'dip', 'optimizer': {'kind': 'adam'}}).adam_lr())
		self.assertEqual(numeric_constant.ADAM_LR_EDIP, parse_config({'method': 'edip', 'optimizer': {'kind': 'adam'}}).adam_lr())
		self.assertEqual(0.5, parse_config({'optimizer': {'adam_lr': 0.5}}).adam_lr())

	def test_6_directories(self):
		cfg = parse_config({'output_directory': 'out'})
		self.assertEqual(os.path.join('out', 'pretrain'), cfg.pretraining_directory())
		self.assertEqual(os.path.join('out', 'subspace_svd'), cfg.subspace_directory())
		copied = cfg.copy()
		copied.pin_shared_directories()
		copied.output_directory = 'elsewhere'
		self.assertEqual(os.path.join('out', 'pretrain'), copied.pretraining_directory())
		self.assertEqual(os.path.join('out', 'subspace_svd'), copied.subspace_directory())
		self.assertEqual('out', cfg.output_directory)

	def test_7_run_seeds(self):
		a, b = RunSeeds(0), RunSeeds(0)
		self.assertEqual((a.noise, a.init, a.probes), (b.noise, b.init, b.probes))
		self.assertEqual(3, len({a.noise, a.init, a.probes}))
		self.assertNotEqual(a.noise, RunSeeds(1).noise)

	def test_8_default_file_generation(self):
		with tempfile.TemporaryDirectory() as directory:
			storage = ExperimentConfigStorage(get_logger(), os.path.join(directory, core_constant.CONFIG_FILE))
			storage.save_default()
			self.assertFalse(storage.read_config(allowed_missing_file=False))
			self.assertEqual(ExperimentConfig.get_default(), storage.to_config())


if __name__ == '__main__':
	unittest.main()
