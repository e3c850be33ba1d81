import unittest

import numpy as np
import scipy.linalg

from subdip.network.param_vector import ParamLayout, ParamVector
from subdip.subspace.svd import batch_svd, incremental_svd, memory_budget_bytes, fix_signs
from subdip.subspace.trajectory import TrajectoryStore
from subdip.utils.exception import IllegalArgument


def gapped_stream(rng: np.random.Generator, d: int, n: int, spectrum, tail: float) -> np.ndarray:
	u, _ = np.linalg.qr(rng.normal(size=(d, d)))
	v, _ = np.linalg.qr(rng.normal(size=(n, n)))
	s = np.full(min(d, n), tail)
	s[:len(spectrum)] = spectrum
	return (u[:, :len(s)] * s) @ v[:, :len(s)].T


class MyTestCase(unittest.TestCase):
	def setUp(self):
		self.rng = np.random.default_rng(7)

	def test_0_repeated_checkpoint(self):
		v = self.rng.normal(size=30)
		layout = ParamLayout.from_shapes([('w', (30,))])
		store = TrajectoryStore(layout)
		for _ in range(10):
			store.append(ParamVector(v, layout))
		result = batch_svd(store, 3)
		self.assertTrue(result.rank_deficient)
		self.assertEqual(1, result.u.shape[1])
		self.assertAlmostEqual(np.linalg.norm(v) * np.sqrt(10), result.s[0], delta=1e-10)
		direction = v / np.linalg.norm(v)
		self.assertAlmostEqual(1.0, abs(result.u[:, 0] @ direction), delta=1e-12)

	def test_1_dense_oracle(self):
		matrix = self.rng.normal(size=(50, 20))
		result = batch_svd(matrix, 5)
		self.assertFalse(result.rank_deficient)
		np.testing.assert_allclose(result.s, np.linalg.svd(matrix, compute_uv=False)[:5], rtol=0, atol=1e-10)
		np.testing.assert_allclose(result.u.T @ result.u, np.eye(5), atol=1e-10)
		self.assertTrue(np.all(np.diff(result.s) <= 0))
		self.assertRaises(IllegalArgument, batch_svd, matrix, 21)

	def test_2_sign_convention(self):
		u = np.array([[0.6, -0.8], [-0.8, -0.6]])
		fixed = fix_signs(u)
		self.assertTrue(np.array_equal(fixed, np.array([[-0.6, 0.8], [0.8, 0.6]])))

	def test_3_isotropic_stream(self):
		q, _ = np.linalg.qr(self.rng.normal(size=(100, 12)))
		for d_sub in (12, 5):
			result = incremental_svd(list(3 * q.T), d_sub, 4)
			self.assertEqual(d_sub, len(result.s))
			np.testing.assert_allclose(result.s, 3.0, rtol=0, atol=1e-8)

	def test_4_incremental_vs_batch(self):
		d_sub = 5
		matrix = gapped_stream(self.rng, 200, 60, [100, 80, 60, 50, 40], 0.1)
		batch = batch_svd(matrix, d_sub)
		incremental = incremental_svd(list(matrix.T), d_sub, 8)
		self.assertLess(np.max(scipy.linalg.subspace_angles(batch.u, incremental.u)), 1e-3)
		np.testing.assert_allclose(incremental.u.T @ incremental.u, np.eye(d_sub), atol=1e-8)
		np.testing.assert_allclose(incremental.s, batch.s, rtol=1e-3)

	def test_5_memory(self):
		d, d_sub, buffer = 300, 6, 5
		matrix = self.rng.normal(size=(d, 40))
		result = incremental_svd(list(matrix.T), d_sub, buffer)
		self.assertGreater(result.peak_bytes, 0)
		self.assertLessEqual(result.peak_bytes, memory_budget_bytes(d, d_sub, buffer))

	def test_6_short_stream(self):
		self.assertRaises(IllegalArgument, incremental_svd, [np.ones(5)], 2, 2)


if __name__ == '__main__':
	unittest.main()
