"""
Early-stopping rules: patience on a (loss or variance) metric that must keep decreasing by a proportion
"""
import math
from typing import Any, List, Literal, Optional, Tuple

import numpy as np

from subdip.constants import numeric_constant
from subdip.utils.exception import ConfigError, IllegalArgument
from subdip.utils.serializer import Serializable


class StopConfig(Serializable):
	# auto: loss-based for subspace runs, variance-based for full-parameter runs
	kind: Literal['auto', 'loss', 'variance', 'none'] = 'auto'
	# null picks the default of the rule in use
	delta: Optional[float] = None
	patience: Optional[int] = None
	window: int = numeric_constant.VARIANCE_WINDOW

	def validate_attribute(self, attr_name: str, attr_value: Any, **kwargs):
		key_path = kwargs.get('key_path', attr_name)
		if attr_name == 'delta' and attr_value is not None and not 0 < attr_value <= 1:
			raise ConfigError('{} should be in (0, 1], found {}'.format(key_path, attr_value))
		if attr_name == 'patience' and attr_value is not None and attr_value < 0:
			raise ConfigError('{} should be non-negative, found {}'.format(key_path, attr_value))
		if attr_name == 'window' and attr_value < 1:
			raise ConfigError('{} should be at least 1, found {}'.format(key_path, attr_value))

	def resolve(self, subspace: bool) -> str:
		if self.kind == 'auto':
			return 'loss' if subspace else 'variance'
		return self.kind


class StopState:
	"""
	Accept step i as the new best if g_i < delta * g_min, and keep going while i <= i_min + patience
	"""
	def __init__(self, delta: float, patience: int):
		if not 0 < delta <= 1:
			raise IllegalArgument('delta should be in (0, 1], found {}'.format(delta))
		if patience < 0:
			raise IllegalArgument('patience should be non-negative, found {}'.format(patience))
		self.delta = delta
		self.patience = patience
		self.g_min = math.inf
		self.i_min: Optional[int] = None
		self.i = 0

	def check(self, g: Optional[float]) -> bool:
		"""
		Feed the metric of the current index. An undefined metric (None) only advances the index

		:return: whether to continue
		"""
		if g is not None and g < self.delta * self.g_min:
			self.g_min = g
			self.i_min = self.i
		self.i += 1
		return self.i_min is None or self.i <= self.i_min + self.patience


def stop_check(state: StopState, g: Optional[float]) -> Tuple[bool, StopState]:
	return state.check(g), state


class VarianceStopState:
	"""
	The last W reconstructions in a ring buffer. The metric is the pixel mean of their per-pixel population variance
	"""
	def __init__(self, window: int = numeric_constant.VARIANCE_WINDOW):
		if window < 1:
			raise IllegalArgument('window should be at least 1, found {}'.format(window))
		self.window = window
		self.__buffer: Optional[np.ndarray] = None
		self.__count = 0

	def __len__(self) -> int:
		return min(self.__count, self.window)

	def push(self, image: np.ndarray) -> Optional[float]:
		image = np.asarray(image, dtype=np.float64)
		if self.__buffer is None:
			self.__buffer = np.zeros((self.window, *image.shape))
		self.__buffer[self.__count % self.window] = image
		self.__count += 1
		if self.__count < self.window:
			return None
		return float(np.mean(np.var(self.__buffer, axis=0)))


def variance_stop_metric(state: VarianceStopState, image: np.ndarray) -> Optional[float]:
	return state.push(image)


class EarlyStopper:
	"""
	A stopping rule ready to be fed once per optimisation step
	"""
	def __init__(self, kind: str, delta: Optional[float] = None, patience: Optional[int] = None, window: int = numeric_constant.VARIANCE_WINDOW):
		self.kind = kind
		if kind == 'loss':
			self.state: Optional[StopState] = StopState(
				delta if delta is not None else numeric_constant.LOSS_STOP_DELTA,
				patience if patience is not None else numeric_constant.LOSS_STOP_PATIENCE
			)
		elif kind == 'variance':
			self.state = StopState(
				delta if delta is not None else numeric_constant.VARIANCE_STOP_DELTA,
				patience if patience is not None else numeric_constant.VARIANCE_STOP_PATIENCE
			)
		elif kind == 'none':
			self.state = None
		else:
			raise IllegalArgument('Unknown stopping rule {}'.format(kind))
		self.variance = VarianceStopState(window) if kind == 'variance' else None
		self.metrics: List[Optional[float]] = []
		self.fired = False

	@classmethod
	def from_config(cls, cfg: StopConfig, subspace: bool) -> 'EarlyStopper':
		return cls(cfg.resolve(subspace), cfg.delta, cfg.patience, cfg.window)

	@property
	def needs_image(self) -> bool:
		return self.variance is not None

	@property
	def stop_index(self) -> Optional[int]:
		return None if self.state is None else self.state.i_min

	def observe(self, loss: float, image: Optional[np.ndarray] = None) -> bool:
		"""
		:return: whether to continue
		"""
		if self.state is None:
			return True
		if self.variance is not None:
			metric = self.variance.push(image)
		else:
			metric = loss
		self.metrics.append(metric)
		keep_going = self.state.check(metric)
		if not keep_going:
			self.fired = True
		return keep_going
