import math
from typing import List, Union

import numpy as np

from subdip.operators.image import Image
from subdip.utils.exception import DimensionMismatch


def psnr(x: Union[Image, np.ndarray], x_gt: Union[Image, np.ndarray]) -> float:
	"""
	10 log10(peak^2 / MSE) with the peak being the largest ground-truth intensity

	:return: math.inf if the images are identical
	"""
	a = x.data if isinstance(x, Image) else np.asarray(x, dtype=np.float64)
	b = x_gt.data if isinstance(x_gt, Image) else np.asarray(x_gt, dtype=np.float64)
	if a.shape != b.shape:
		raise DimensionMismatch('Cannot compare a {} image against a {} ground truth'.format(a.shape, b.shape))
	mse = float(np.mean((a - b) ** 2))
	if mse == 0:
		return math.inf
	peak_sq = float(np.max(b)) ** 2
	if peak_sq == 0:
		return -math.inf
	return 10 * math.log10(peak_sq / mse)


class PsnrTracker:
	"""
	Keeps the raw PSNR trace together with the min-loss PSNR, i.e. the PSNR at the lowest loss seen so far
	"""
	def __init__(self):
		self.best_loss = math.inf
		self.best_step = -1
		self.psnr_at_best_loss = math.nan
		self.loss_history: List[float] = []
		self.raw_psnr_history: List[float] = []
		self.min_loss_psnr_history: List[float] = []

	def track(self, loss: float, raw_psnr: float) -> 'PsnrTracker':
		# strict: a tie keeps the earlier psnr
		if loss < self.best_loss:
			self.best_loss = loss
			self.best_step = len(self.loss_history)
			self.psnr_at_best_loss = raw_psnr
		self.loss_history.append(loss)
		self.raw_psnr_history.append(raw_psnr)
		self.min_loss_psnr_history.append(self.psnr_at_best_loss)
		return self

	def __len__(self) -> int:
		return len(self.loss_history)


def track(tracker: PsnrTracker, loss: float, raw_psnr: float) -> PsnrTracker:
	return tracker.track(loss, raw_psnr)
