import unittest

import numpy as np

from subdip.operators.blur import gaussian_blur_operator, gaussian_kernel
from subdip.operators.image import Image, Measurement
from subdip.operators.noise import NoiseModel, add_noise
from subdip.utils.exception import IllegalArgument


class MyTestCase(unittest.TestCase):
	def test_0_constant(self):
		op = gaussian_blur_operator(1.6, 12, 9)
		x = Image(np.full((12, 9), 0.3))
		np.testing.assert_allclose(op.apply(x).data, 0.3, atol=1e-12)

	def test_1_rows(self):
		for kappa in (0.8, 1.6):
			dense = gaussian_blur_operator(kappa, 10, 10).to_dense()
			self.assertTrue(np.all(dense >= 0))
			np.testing.assert_allclose(dense.sum(axis=1), 1.0, atol=1e-10)

	def test_2_delta(self):
		kappa = 0.8
		x = np.zeros((15, 15))
		x[7, 7] = 1
		blurred = gaussian_blur_operator(kappa, 15, 15).apply(Image(x)).as_2d()
		radius = int(np.ceil(4 * kappa))
		offsets = np.arange(-radius, radius + 1)
		g = np.exp(-offsets ** 2 / (2 * kappa ** 2))
		g /= g.sum()
		expected = np.zeros((15, 15))
		expected[7 - radius:8 + radius, 7 - radius:8 + radius] = np.outer(g, g)
		np.testing.assert_allclose(blurred, expected, atol=1e-14)
		np.testing.assert_allclose(gaussian_kernel(kappa), g, atol=1e-15)

	def test_3_reflect_border(self):
		x = np.zeros((1, 6))
		x[0, 0] = 1
		out = gaussian_blur_operator(1.0, 1, 6).apply(Image(x)).data
		self.assertAlmostEqual(1.0, out.sum(), delta=1e-12)
		self.assertRaises(IllegalArgument, gaussian_blur_operator, 0, 4, 4)

	def test_4_noise_trivial(self):
		y = Measurement(np.arange(10, dtype=float))
		noisy = add_noise(y, NoiseModel(0, 3))
		self.assertTrue(np.array_equal(y.data, noisy.data))
		self.assertEqual(0, NoiseModel(0, 3).sigma(y))
		self.assertAlmostEqual(0.05, NoiseModel(0.05, 0).sigma(Measurement(np.ones(100))), delta=1e-15)
		self.assertRaises(IllegalArgument, NoiseModel, -1, 0)

	def test_5_noise_statistics(self):
		y = Measurement(np.linspace(-1, 3, 10 ** 5))
		model = NoiseModel(0.05, 42)
		noisy = add_noise(y, model)
		sigma = model.sigma(y)
		self.assertAlmostEqual(1.0, np.std(noisy.data - y.data) / sigma, delta=0.02)
		self.assertTrue(np.array_equal(noisy.data, add_noise(y, model).data))


if __name__ == '__main__':
	unittest.main()
