"""
Limited-memory BFGS with a strong-Wolfe line search
"""
import collections
from typing import Any, Deque, Dict, List, Optional, Tuple

import numpy as np
import scipy.optimize

from subdip.constants import numeric_constant
from subdip.objective.problem import Problem
from subdip.optim.optim_result import LineSearchStep, OptimResult, Recorder, StepCallback, Termination
from subdip.utils.exception import ConfigError
from subdip.utils.logger import get_logger, DebugOption
from subdip.utils.serializer import Serializable

BACKTRACKING_TRIALS = 40


class LbfgsConfig(Serializable):
	history: int = numeric_constant.LBFGS_HISTORY
	c1: float = numeric_constant.LBFGS_C1
	c2: float = numeric_constant.LBFGS_C2
	# stop once the largest gradient entry is at most this
	gtol: float = 0.0
	log_interval: int = 10

	def validate_attribute(self, attr_name: str, attr_value: Any, **kwargs):
		key_path = kwargs.get('key_path', attr_name)
		if attr_name in ('history', 'log_interval') and attr_value < 1:
			raise ConfigError('{} should be at least 1, found {}'.format(key_path, attr_value))
		if attr_name == 'gtol' and attr_value < 0:
			raise ConfigError('{} should be non-negative, found {}'.format(key_path, attr_value))

	def on_deserialization(self, **kwargs):
		if not 0 < self.c1 < self.c2 < 1:
			raise ConfigError('Expected 0 < c1 < c2 < 1, found c1 = {} and c2 = {}'.format(self.c1, self.c2))


class _Evaluations:
	"""
	Remembers the last few (loss, gradient) pairs, since the line search asks for both at the same points
	"""
	def __init__(self, problem: Problem, size: int = 8):
		self.problem = problem
		self.size = size
		self.__entries: Dict[bytes, Tuple[float, np.ndarray]] = collections.OrderedDict()

	def __call__(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
		key = np.ascontiguousarray(x).tobytes()
		entry = self.__entries.get(key)
		if entry is None:
			entry = self.problem.loss_and_grad(x)
			self.__entries[key] = entry
			while len(self.__entries) > self.size:
				self.__entries.popitem(last=False)
		return entry

	def loss(self, x: np.ndarray) -> float:
		return self(x)[0]

	def grad(self, x: np.ndarray) -> np.ndarray:
		return self(x)[1]


def two_loop_direction(grad: np.ndarray, pairs: Deque[Tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
	"""
	-H grad for the inverse Hessian approximation H built from the curvature pairs (s, y), oldest first, with the
	initial scaling s^T y / y^T y of the newest pair
	"""
	q = grad.copy()
	alphas = []
	for s, y in reversed(pairs):
		rho = 1.0 / (y @ s)
		alpha = rho * (s @ q)
		q -= alpha * y
		alphas.append((rho, alpha))
	if len(pairs) > 0:
		s, y = pairs[-1]
		q *= (s @ y) / (y @ y)
	for (s, y), (rho, alpha) in zip(pairs, reversed(alphas)):
		beta = rho * (y @ q)
		q += (alpha - beta) * s
	return -q


def _backtracking(evaluations: _Evaluations, x: np.ndarray, value: float, grad: np.ndarray, c1: float) -> Optional[float]:
	"""
	Armijo backtracking along -grad, starting from a step of unit length
	"""
	norm = float(np.linalg.norm(grad))
	t = 1.0 / norm
	slope = -norm * norm
	for _ in range(BACKTRACKING_TRIALS):
		if evaluations.loss(x - t * grad) <= value + c1 * t * slope:
			return t
		t *= 0.5
	return None


def lbfgs_run(
		problem: Problem, x0: np.ndarray, cfg: LbfgsConfig, *, max_steps: int,
		callback: Optional[StepCallback] = None, keep_iterates: bool = False
) -> OptimResult:
	"""
	Curvature pairs with s^T y <= 1e-10 are not stored. A failed line search falls back to a steepest-descent step
	with backtracking, and two failures in a row end the run. Every accepted step lands in the line_search_steps of
	the result, flagged by whether the strong-Wolfe search produced it
	"""
	logger = get_logger()
	evaluations = _Evaluations(problem)
	recorder = Recorder(callback, keep_iterates)
	pairs: Deque[Tuple[np.ndarray, np.ndarray]] = collections.deque(maxlen=cfg.history)
	line_search_steps: List[LineSearchStep] = []
	x = np.array(x0, dtype=np.float64)
	value, grad = evaluations(x)
	previous_value = value + np.linalg.norm(grad) / 2
	failures = 0
	step = 0
	termination = Termination.MAX_STEPS
	while True:
		if not recorder.record(x, value):
			termination = Termination.CALLBACK
			break
		if step >= max_steps:
			break
		if np.max(np.abs(grad)) <= cfg.gtol:
			termination = Termination.CONVERGED
			break

		direction = two_loop_direction(grad, pairs)
		if not grad @ direction < 0:
			pairs.clear()
			direction = -grad
		alpha = scipy.optimize.line_search(
			evaluations.loss, evaluations.grad, x, direction, grad, value, previous_value, c1=cfg.c1, c2=cfg.c2
		)[0]
		if alpha is None:
			failures += 1
			if failures >= 2:
				logger.warning('Line search failed twice in a row at step {}, stopping'.format(step))
				termination = Termination.LINE_SEARCH_FAILURE
				break
			t = _backtracking(evaluations, x, value, grad, cfg.c1)
			if t is None:
				logger.warning('Neither the line search nor backtracking found a decrease at step {}, stopping'.format(step))
				termination = Termination.LINE_SEARCH_FAILURE
				break
			logger.debug('Line search failed at step {}, took a steepest-descent step of {:.3g}'.format(step, t), option=DebugOption.OPTIM)
			pairs.clear()
			line_search_steps.append(LineSearchStep(x, t, -grad, False))
			x_new = x - t * grad
		else:
			failures = 0
			line_search_steps.append(LineSearchStep(x, alpha, direction, True))
			x_new = x + alpha * direction
		new_value, new_grad = evaluations(x_new)
		s = x_new - x
		y = new_grad - grad
		if s @ y > numeric_constant.LBFGS_CURVATURE_EPS:
			pairs.append((s, y))
		previous_value = value
		x, value, grad = x_new, new_value, new_grad
		step += 1
		if step % cfg.log_interval == 0:
			logger.debug('L-BFGS step {}: loss {:.6g}, gradient norm {:.4g}'.format(step, value, np.linalg.norm(grad)), option=DebugOption.OPTIM)
	return recorder.result(x, termination, line_search_steps)
