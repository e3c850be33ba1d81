"""
Natural gradient descent in the subspace with a moving-average Monte-Carlo Fisher, adaptive damping and curvature
scaling, and a two-dimensional momentum solve
"""
from typing import Any, Callable, Literal, Optional, Tuple

import numpy as np
import scipy.linalg

from subdip.constants import numeric_constant
from subdip.objective.problem import Problem
from subdip.optim.fisher import estimate_fim, exact_fim, update_fim_ma, probe_rng
from subdip.optim.optim_result import OptimResult, Recorder, StepCallback, Termination
from subdip.utils.exception import ConfigError, NumericalFailure
from subdip.utils.logger import get_logger, DebugOption
from subdip.utils.serializer import Serializable

MatVec = Callable[[np.ndarray], np.ndarray]


class NgdConfig(Serializable):
	n_probes: int = numeric_constant.NGD_N_PROBES_SMALL
	beta: float = numeric_constant.NGD_BETA
	lambda_init: float = numeric_constant.NGD_LAMBDA_INIT
	lambda_min: float = numeric_constant.NGD_LAMBDA_MIN_SMALL
	lambda_max: float = numeric_constant.NGD_LAMBDA_MAX
	s_init: float = 1.0
	s_min: float = numeric_constant.NGD_S_MIN_SMALL
	# steps between two evaluations of the reduction ratio rho
	T: int = numeric_constant.NGD_RHO_PERIOD
	# assemble the Fisher from dim forward-mode products instead of sampling it
	exact_fisher: bool = False
	# rho uses the realised update (delta) or the raw natural direction (Delta)
	rho_direction: Literal['delta', 'Delta'] = 'delta'
	log_interval: int = 10

	def validate_attribute(self, attr_name: str, attr_value: Any, **kwargs):
		key_path = kwargs.get('key_path', attr_name)
		if attr_name in ('n_probes', 'T', 'log_interval') and attr_value < 1:
			raise ConfigError('{} should be at least 1, found {}'.format(key_path, attr_value))
		if attr_name == 'beta' and not 0 < attr_value < 1:
			raise ConfigError('{} should be in (0, 1), found {}'.format(key_path, attr_value))
		if attr_name in ('lambda_init', 'lambda_min', 'lambda_max', 's_init', 's_min') and not attr_value > 0:
			raise ConfigError('{} should be positive, found {}'.format(key_path, attr_value))

	def on_deserialization(self, **kwargs):
		if not self.lambda_min <= self.lambda_init <= self.lambda_max:
			raise ConfigError('Expected lambda_min <= lambda_init <= lambda_max, found {}, {}, {}'.format(self.lambda_min, self.lambda_init, self.lambda_max))
		if not self.s_min <= self.s_init <= 1:
			raise ConfigError('Expected s_min <= s_init <= 1, found {} and {}'.format(self.s_min, self.s_init))

	@classmethod
	def for_large_subspace(cls, **kwargs) -> 'NgdConfig':
		"""
		Settings for subspaces with thousands of directions: fewer probes, a stronger damping floor and a lower
		curvature scale floor
		"""
		values = dict(
			n_probes=numeric_constant.NGD_N_PROBES_LARGE,
			lambda_min=numeric_constant.NGD_LAMBDA_MIN_LARGE,
			s_min=numeric_constant.NGD_S_MIN_LARGE,
		)
		values.update(kwargs)
		return cls.deserialize(values)


class NgdState:
	def __init__(self, dim: int, cfg: NgdConfig):
		self.fim: Optional[np.ndarray] = None
		self.damping = cfg.lambda_init
		self.scaling = cfg.s_init
		self.delta_prev = np.zeros(dim)
		self.t = 0
		self.beta = cfg.beta
		self.n_probes = cfg.n_probes
		self.rho_period = cfg.T
		self.last_rho: Optional[float] = None

	def dump(self) -> dict:
		return {
			't': self.t,
			'damping': self.damping,
			'scaling': self.scaling,
			'last_rho': self.last_rho,
			'delta_prev_norm': float(np.linalg.norm(self.delta_prev)),
			'fim_trace': None if self.fim is None else float(np.trace(self.fim)),
		}


def natural_direction(fim: np.ndarray, damping: float, grad: np.ndarray) -> np.ndarray:
	"""
	Solve (F + lambda I) Delta = -grad through a Cholesky factorisation

	:raise numpy.linalg.LinAlgError: if F + lambda I is not numerically positive definite
	"""
	system = fim + damping * np.eye(len(grad))
	factor = scipy.linalg.cho_factor(system, lower=True)
	return scipy.linalg.cho_solve(factor, -grad)


def quadratic_model(delta: np.ndarray, grad: np.ndarray, damping: float, scaling: float, fim_matvec: MatVec) -> float:
	"""
	M(delta) - M(0) = grad^T delta + (s / 2) delta^T (lambda I + F) delta
	"""
	return _model_change(delta, grad, damping, scaling, fim_matvec(delta))


def _model_change(delta: np.ndarray, grad: np.ndarray, damping: float, scaling: float, f_delta: np.ndarray) -> float:
	return float(grad @ delta + 0.5 * scaling * (damping * (delta @ delta) + delta @ f_delta))


def rho_ratio(loss_fn: Callable[[np.ndarray], float], x: np.ndarray, step: np.ndarray, model_change: float, loss_at_x: Optional[float] = None) -> Optional[float]:
	"""
	(L(x + step) - L(x)) / (M(step) - M(0))

	:return: None if the model predicts no change, in which case there is nothing to compare against
	"""
	if model_change == 0:
		return None
	if loss_at_x is None:
		loss_at_x = loss_fn(x)
	return (loss_fn(x + step) - loss_at_x) / model_change


def update_damping_scaling(
		rho: float, damping: float, scaling: float, period: int, *,
		lambda_min: float, lambda_max: float = numeric_constant.NGD_LAMBDA_MAX,
		s_min: float, s_max: float = 1.0
) -> Tuple[float, float]:
	"""
	Levenberg-Marquardt style adaptation over a period of T steps: a poor agreement between loss and model raises
	the damping and the scaling by (3/4)^-T, a good agreement lowers them by (3/4)^T
	"""
	shrink = numeric_constant.NGD_ADAPT_FACTOR ** period
	grow = numeric_constant.NGD_ADAPT_FACTOR ** -period
	low, high = numeric_constant.DAMPING_RHO_BOUNDS
	if rho < low:
		damping *= grow
	elif rho > high:
		damping *= shrink
	low, high = numeric_constant.SCALING_RHO_BOUNDS
	if rho < low:
		scaling *= grow
	elif rho > high:
		scaling *= shrink
	return float(np.clip(damping, lambda_min, lambda_max)), float(np.clip(scaling, s_min, s_max))


def _momentum(
		direction: np.ndarray, delta_prev: Optional[np.ndarray], grad: np.ndarray, damping: float, scaling: float,
		f_direction: np.ndarray, f_prev: Optional[np.ndarray]
) -> Tuple[float, float]:
	c_direction = f_direction + damping * direction
	a11 = scaling * float(direction @ c_direction)
	b1 = -float(grad @ direction)
	if not np.any(direction) or not a11 > 0:
		get_logger().warning('Degenerate natural direction (curvature {}), the update is skipped'.format(a11))
		return 0.0, 0.0
	if delta_prev is not None:
		c_prev = f_prev + damping * delta_prev
		a12 = scaling * float(direction @ c_prev)
		a22 = scaling * float(delta_prev @ c_prev)
		b2 = -float(grad @ delta_prev)
		det = a11 * a22 - a12 * a12
		if abs(det) > numeric_constant.MOMENTUM_SINGULAR_TOL * abs(a11 * a22):
			alpha, mu = scipy.linalg.solve(np.array([[a11, a12], [a12, a22]]), np.array([b1, b2]), assume_a='sym')
			if np.isfinite(alpha) and np.isfinite(mu):
				return float(alpha), float(mu)
		get_logger().debug('Momentum system is singular, using the one-dimensional solve', option=DebugOption.OPTIM)
	return b1 / a11, 0.0


def momentum_coefficients(
		direction: np.ndarray, delta_prev: np.ndarray, grad: np.ndarray, damping: float, scaling: float, fim_matvec: MatVec
) -> Tuple[float, float]:
	"""
	The (alpha, mu) minimising the quadratic model over span{Delta, delta_0}. With delta_0 = 0 only alpha is solved for
	"""
	has_prev = bool(np.any(delta_prev))
	return _momentum(
		direction, delta_prev if has_prev else None, grad, damping, scaling,
		fim_matvec(direction), fim_matvec(delta_prev) if has_prev else None
	)


def _damped_direction(state: NgdState, grad: np.ndarray, cfg: NgdConfig) -> np.ndarray:
	try:
		return natural_direction(state.fim, state.damping, grad)
	except (np.linalg.LinAlgError, ValueError) as e:
		escalated = min(state.damping * numeric_constant.NGD_ADAPT_FACTOR ** -cfg.T, cfg.lambda_max)
		get_logger().warning('Factorisation failed with damping {:.4g} ({}), retrying with {:.4g}'.format(state.damping, e, escalated))
		try:
			direction = natural_direction(state.fim, escalated, grad)
		except (np.linalg.LinAlgError, ValueError) as e2:
			raise NumericalFailure('Damped Fisher system cannot be factorised: {}'.format(e2), state.dump()) from e2
		state.damping = escalated
		return direction


def ngd_step(
		state: NgdState, x: np.ndarray, problem: Problem, cfg: NgdConfig, rng: np.random.Generator,
		current: Optional[Tuple[float, np.ndarray]] = None
) -> Tuple[np.ndarray, NgdState]:
	"""
	One natural gradient update. Every T-th step also adapts the damping and the scaling from the reduction ratio

	:param current: the loss and the gradient at x, if already known
	:raise NumericalFailure: if the update is not finite or the damped system cannot be solved
	"""
	value, grad = current if current is not None else problem.loss_and_grad(x)
	fim_estimate = exact_fim(problem, x) if cfg.exact_fisher else estimate_fim(problem, x, state.n_probes, rng)
	state.fim = fim_estimate if state.fim is None else update_fim_ma(state.fim, fim_estimate, state.beta)
	direction = _damped_direction(state, grad, cfg)

	has_prev = bool(np.any(state.delta_prev))
	f_direction = problem.fisher_matvec(x, direction)
	f_prev = problem.fisher_matvec(x, state.delta_prev) if has_prev else None
	alpha, mu = _momentum(direction, state.delta_prev if has_prev else None, grad, state.damping, state.scaling, f_direction, f_prev)
	delta = alpha * direction
	f_delta = alpha * f_direction
	if has_prev:
		delta = delta + mu * state.delta_prev
		f_delta = f_delta + mu * f_prev
	x_new = x + delta
	if not np.all(np.isfinite(x_new)):
		raise NumericalFailure('Non-finite natural gradient update', dict(state.dump(), alpha=alpha, mu=mu, x_norm=float(np.linalg.norm(x))))

	state.t += 1
	if state.t % state.rho_period == 0:
		if cfg.rho_direction == 'delta':
			step, f_step = delta, f_delta
		else:
			step, f_step = direction, f_direction
		rho = rho_ratio(problem.loss, x, step, _model_change(step, grad, state.damping, state.scaling, f_step), value)
		if rho is None:
			get_logger().warning('Quadratic model predicts no change at step {}, damping and scaling kept'.format(state.t))
		else:
			state.last_rho = rho
			state.damping, state.scaling = update_damping_scaling(
				rho, state.damping, state.scaling, state.rho_period,
				lambda_min=cfg.lambda_min, lambda_max=cfg.lambda_max, s_min=cfg.s_min
			)
	state.delta_prev = delta
	return x_new, state


def ngd_run(
		problem: Problem, x0: np.ndarray, cfg: NgdConfig, *, max_steps: int, seed: int,
		callback: Optional[StepCallback] = None, keep_iterates: bool = False
) -> OptimResult:
	logger = get_logger()
	rng = probe_rng(seed)
	state = NgdState(problem.dim, cfg)
	recorder = Recorder(callback, keep_iterates)
	x = np.array(x0, dtype=np.float64)
	value, grad = problem.loss_and_grad(x)
	termination = Termination.MAX_STEPS
	while True:
		if not recorder.record(x, value):
			termination = Termination.CALLBACK
			break
		if state.t >= max_steps:
			break
		if not np.any(grad):
			termination = Termination.CONVERGED
			break
		x, state = ngd_step(state, x, problem, cfg, rng, (value, grad))
		value, grad = problem.loss_and_grad(x)
		if state.t % cfg.log_interval == 0:
			logger.debug('NGD step {}: loss {:.6g}, lambda {:.3g}, s {:.3g}, rho {}'.format(state.t, value, state.damping, state.scaling, state.last_rho), option=DebugOption.OPTIM)
	return recorder.result(x, termination)
