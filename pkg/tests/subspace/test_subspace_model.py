import os
import tempfile
import unittest

import numpy as np

from subdip.network.param_vector import ParamLayout, ParamVector
from subdip.subspace.subspace_model import SubspaceModel, build_subspace_model, init_coefficients, random_basis, d_lev_from_fraction, read_coo, write_coo
from subdip.subspace.svd import batch_svd
from subdip.utils.exception import DimensionMismatch, IllegalArgument


class MyTestCase(unittest.TestCase):
	def setUp(self):
		rng = np.random.default_rng(4)
		self.layout = ParamLayout.from_shapes([('a.weight', (5, 4)), ('a.bias', (5,))])
		trajectory = rng.normal(size=(25, 12))
		self.theta_pre = ParamVector(trajectory[:, -1], self.layout)
		self.model = build_subspace_model(self.theta_pre, batch_svd(trajectory, 4), 15)
		self.rng = rng

	def test_0_gamma_origin(self):
		self.assertEqual(self.theta_pre, self.model.gamma(np.zeros(4)))
		self.assertEqual((4, 15, 25), (self.model.d_sub, self.model.d_lev, self.model.d_theta))

	def test_1_affinity(self):
		c = self.rng.normal(size=4)
		lhs = self.model.gamma(2.5 * c).data - self.theta_pre.data
		rhs = 2.5 * (self.model.gamma(c).data - self.theta_pre.data)
		np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12)

	def test_2_dense_oracle(self):
		c = self.rng.normal(size=4)
		dense = self.model.basis.toarray()
		np.testing.assert_allclose(self.model.gamma(c).data, self.theta_pre.data + dense @ c, rtol=0, atol=1e-12)
		v = self.rng.normal(size=(3, 25))
		np.testing.assert_allclose(self.model.project(v), v @ dense, atol=1e-12)
		self.assertRaises(DimensionMismatch, self.model.gamma, np.zeros(3))

	def test_3_persistence(self):
		with tempfile.TemporaryDirectory() as directory:
			self.model.save(directory)
			loaded = SubspaceModel.load(directory)
		self.assertEqual(self.theta_pre, loaded.theta_pre)
		self.assertEqual(0, (loaded.basis != self.model.basis).nnz)
		np.testing.assert_array_equal(loaded.singular_values, self.model.singular_values)
		np.testing.assert_array_equal(loaded.mask_support, self.model.mask_support)

	def test_4_coo_order(self):
		matrix = np.array([[0, 2.0], [1.5, 0], [0, -3.0]])
		with tempfile.TemporaryDirectory() as directory:
			path = os.path.join(directory, 'm.coo')
			write_coo(path, matrix)
			with open(path, 'rb') as file:
				data = file.read()
			self.assertEqual(3 * 16, len(data))
			self.assertEqual((0).to_bytes(4, 'little') + (1).to_bytes(4, 'little'), data[:8])
			np.testing.assert_array_equal(read_coo(path, (3, 2)).toarray(), matrix)

	def test_5_init_coefficients(self):
		c = init_coefficients(16, 3)
		self.assertAlmostEqual(1.0, np.linalg.norm(c), delta=1e-12)
		self.assertTrue(np.array_equal(c, init_coefficients(16, 3)))
		self.assertIn(float(init_coefficients(1, 9)[0]), (1.0, -1.0))
		mean = np.mean([init_coefficients(16, seed) for seed in range(10000)], axis=0)
		self.assertLess(np.linalg.norm(mean), 0.05)
		self.assertRaises(IllegalArgument, init_coefficients, 0, 1)

	def test_6_random_basis(self):
		raw = random_basis(50, 6, 1, orthonormal=False)
		np.testing.assert_allclose(np.linalg.norm(raw.u, axis=0), 1.0, atol=1e-12)
		ortho = random_basis(50, 6, 1, orthonormal=True)
		np.testing.assert_allclose(ortho.u.T @ ortho.u, np.eye(6), atol=1e-12)

	def test_7_d_lev_fraction(self):
		self.assertEqual(50, d_lev_from_fraction(100, 0.5))
		self.assertEqual(1, d_lev_from_fraction(100, 0.001))
		self.assertRaises(IllegalArgument, d_lev_from_fraction, 100, 0)


if __name__ == '__main__':
	unittest.main()
