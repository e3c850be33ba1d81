import math
import unittest

import numpy as np

from subdip.objective.metrics import psnr, PsnrTracker, track
from subdip.operators.image import Image


class MyTestCase(unittest.TestCase):
	def test_0_psnr(self):
		gt = Image(np.ones((4, 4)))
		self.assertEqual(math.inf, psnr(gt, gt))
		self.assertAlmostEqual(20.0, psnr(Image(np.full((4, 4), 1.1)), gt), delta=1e-9)

	def test_1_permutation(self):
		rng = np.random.default_rng(0)
		x, gt = rng.uniform(size=(2, 36))
		order = rng.permutation(36)
		self.assertAlmostEqual(psnr(x.reshape(6, 6), gt.reshape(6, 6)), psnr(x[order].reshape(6, 6), gt[order].reshape(6, 6)), delta=1e-12)

	def test_2_tracker(self):
		tracker = PsnrTracker()
		for loss, value in zip([3, 5, 2], [10, 30, 20]):
			track(tracker, loss, value)
		self.assertEqual([10, 10, 20], tracker.min_loss_psnr_history)
		self.assertEqual([10, 30, 20], tracker.raw_psnr_history)
		self.assertEqual(2, tracker.best_loss)
		self.assertEqual(2, tracker.best_step)

	def test_3_monotone_and_ties(self):
		tracker = PsnrTracker()
		for loss, value in zip([5, 4, 3, 2], [1, 2, 3, 4]):
			tracker.track(loss, value)
		self.assertEqual(tracker.raw_psnr_history, tracker.min_loss_psnr_history)
		tracker = PsnrTracker()
		tracker.track(1.0, 15).track(1.0, 25)
		self.assertEqual([15, 15], tracker.min_loss_psnr_history)
		self.assertEqual(0, tracker.best_step)


if __name__ == '__main__':
	unittest.main()
