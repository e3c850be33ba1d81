import itertools
import unittest

import numpy as np

from subdip.objective.tv import tv, tv_subgradient
from subdip.operators.image import Image


def brute_force_tv(x: np.ndarray) -> float:
	h, w = x.shape
	total = 0.0
	for i in range(h):
		for j in range(w):
			if i + 1 < h:
				total += abs(x[i, j] - x[i + 1, j])
			if j + 1 < w:
				total += abs(x[i, j] - x[i, j + 1])
	return total


class MyTestCase(unittest.TestCase):
	def test_0_basics(self):
		self.assertEqual(0, tv(Image(np.full((4, 5), 0.3))))
		self.assertEqual(2, tv(Image(np.array([[0, 1], [0, 1]]))))
		x = np.random.default_rng(0).uniform(size=(6, 7))
		for alpha in (-2.5, 0.0, 3.0):
			self.assertAlmostEqual(abs(alpha) * tv(x), tv(alpha * x), delta=1e-12)

	def test_1_brute_force(self):
		for shape in ((2, 2), (3, 3)):
			for values in itertools.product((0, 1, 2), repeat=shape[0] * shape[1]):
				x = np.array(values, dtype=np.float64).reshape(shape)
				self.assertEqual(brute_force_tv(x), tv(x))

	def test_2_subgradient(self):
		np.testing.assert_array_equal(np.zeros((3, 4)), tv_subgradient(np.ones((3, 4))).data)
		row = tv_subgradient(np.array([[0.0, 1.0, 2.0, 3.0]])).data
		np.testing.assert_array_equal([[-1, 0, 0, 1]], row)
		row = tv_subgradient(np.array([[3.0, 2.0, 1.0]])).data
		np.testing.assert_array_equal([[1, 0, -1]], row)

	def test_3_finite_differences(self):
		rng = np.random.default_rng(1)
		x = rng.uniform(size=(5, 6))
		g = tv_subgradient(x).data
		h = 1e-7
		fd = np.zeros_like(x)
		for index in np.ndindex(*x.shape):
			e = np.zeros_like(x)
			e[index] = h
			fd[index] = (tv(x + e) - tv(x - e)) / (2 * h)
		self.assertLess(np.linalg.norm(fd - g) / np.linalg.norm(g), 1e-6)


if __name__ == '__main__':
	unittest.main()
