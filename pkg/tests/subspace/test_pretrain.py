import tempfile
import unittest

import numpy as np

from subdip.harness.phantoms import PhantomSpec, generate
from subdip.network.arch_config import ArchConfig
from subdip.network.unet import init_params
from subdip.operators.image import Image
from subdip.subspace.pretrain import pretrain, build_dataset, checkpoint_stride, PretrainSample
from subdip.subspace.trajectory import TrajectoryStore
from subdip.utils.exception import NumericalFailure


def tiny_config() -> ArchConfig:
	return ArchConfig(scales=2, channels=[4, 4], skip=[True, False], skip_channels=2)


def noisy_dataset(count: int, seed: int):
	rng = np.random.default_rng(seed)
	truths = generate(PhantomSpec(kind='ellipses', size=16, seed=seed), count)
	inputs = [Image(gt.data + 0.05 * rng.normal(size=gt.shape)) for gt in truths]
	return build_dataset(truths, inputs)


class MyTestCase(unittest.TestCase):
	def test_0_no_epoch(self):
		cfg = tiny_config()
		result = pretrain(cfg, noisy_dataset(4, 0), epochs=0, d_pre=10, seed=3)
		self.assertEqual(1, len(result.store))
		self.assertEqual(init_params(cfg, 3), result.theta_pre)
		self.assertEqual(result.theta_pre, result.store.get(0))

	def test_1_stride(self):
		self.assertEqual(5, checkpoint_stride(10000, 2000))
		self.assertEqual(1, checkpoint_stride(10, 2000))
		result = pretrain(tiny_config(), noisy_dataset(20, 1), epochs=2, d_pre=5, seed=0, batch_size=4)
		self.assertEqual(2, result.store.stride)
		self.assertEqual(5, len(result.store))

	def test_2_loss_decreases(self):
		result = pretrain(tiny_config(), noisy_dataset(200, 2), epochs=5, d_pre=50, seed=0)
		self.assertEqual(5, len(result.epoch_losses))
		self.assertLess(result.epoch_losses[-1], result.epoch_losses[0])
		self.assertEqual(50, len(result.store))

	def test_3_spilled_store(self):
		cfg = tiny_config()
		with tempfile.TemporaryDirectory() as directory:
			store = TrajectoryStore(init_params(cfg, 0).layout, directory)
			result = pretrain(cfg, noisy_dataset(6, 3), epochs=1, d_pre=4, seed=0, store=store)
			reopened = TrajectoryStore.open(directory)
			self.assertEqual(len(result.store), len(reopened))
			np.testing.assert_array_equal(result.store.matrix(), reopened.matrix())

	def test_4_non_finite(self):
		sample = PretrainSample(Image(np.full((8, 8), 1e200)), Image(np.zeros((8, 8))))
		self.assertRaises(NumericalFailure, pretrain, tiny_config(), [sample], epochs=1, d_pre=2, seed=0)


if __name__ == '__main__':
	unittest.main()
