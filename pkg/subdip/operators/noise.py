import numpy as np

from subdip.operators.image import Measurement
from subdip.utils.exception import IllegalArgument


class NoiseModel:
	"""
	Additive white Gaussian noise whose level follows the clean measurement: sigma = (p / d_y) * sum |y_clean|
	"""
	def __init__(self, p: float, seed: int):
		if not p >= 0:
			raise IllegalArgument('Noise scale p should be non-negative, found {}'.format(p))
		self.p = float(p)
		self.seed = int(seed)

	def sigma(self, y_clean: Measurement) -> float:
		return self.p * float(np.mean(np.abs(y_clean.data)))

	def __repr__(self):
		return 'NoiseModel[p={}, seed={}]'.format(self.p, self.seed)


def add_noise(y_clean: Measurement, model: NoiseModel) -> Measurement:
	sigma = model.sigma(y_clean)
	if sigma == 0:
		return Measurement(y_clean.data.copy(), shape=y_clean.shape)
	rng = np.random.default_rng(model.seed)
	return Measurement(y_clean.data + rng.normal(0.0, sigma, size=y_clean.size), shape=y_clean.shape)
