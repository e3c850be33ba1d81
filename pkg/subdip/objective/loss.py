"""
The Deep Image Prior objective 0.5 * ||A f(x0, theta) - y||^2 + lambda * TV(f(x0, theta)), over subspace coefficients
or over the full parameter vector

The fidelity carries the factor 0.5 so that its gradient is J^T A^T (A f - y) and its Gauss-Newton curvature is
(A J)^T (A J) without extra constants
"""
import math
from abc import ABC, abstractmethod
from typing import Any, Tuple, Optional

import numpy as np

from subdip.constants import numeric_constant
from subdip.network.arch_config import ArchConfig
from subdip.network.evaluator import NetworkEvaluator, NetworkInput, Pullback
from subdip.objective.problem import Problem
from subdip.objective.tv import tv_value, tv_subgradient_array
from subdip.operators.image import Measurement
from subdip.operators.linear_operator import LinearOperator, OperatorKind
from subdip.subspace.subspace_model import SubspaceModel
from subdip.utils.exception import ConfigError, DimensionMismatch, NumericalFailure
from subdip.utils.logger import get_logger, DebugOption
from subdip.utils.serializer import Serializable


class ObjectiveConfig(Serializable):
	# weight of the anisotropic TV term, 0 disables it. Null picks the default of the task
	tv_weight: Optional[float] = None

	def validate_attribute(self, attr_name: str, attr_value: Any, **kwargs):
		if attr_name == 'tv_weight' and attr_value is not None and not attr_value >= 0:
			raise ConfigError('{} should be non-negative, found {}'.format(kwargs.get('key_path', attr_name), attr_value))

	def weight(self, tomography: bool) -> float:
		if self.tv_weight is not None:
			return self.tv_weight
		return numeric_constant.TV_WEIGHT_CT if tomography else numeric_constant.TV_WEIGHT_RESTORATION


class _Linearisation:
	"""
	The network evaluated at one point together with its pullback
	"""
	def __init__(self, x: np.ndarray, theta: np.ndarray, output: np.ndarray, pullback: Pullback):
		self.x = x
		self.theta = theta
		self.output = output
		self.pullback = pullback


class NetworkObjective(Problem, ABC):
	"""
	Shared machinery of the subspace and full-parameter objectives: a problem over some vector x that is mapped
	affinely to network parameters theta(x)
	"""
	def __init__(self, evaluator: NetworkEvaluator, op: LinearOperator, y: Measurement, obj: ObjectiveConfig):
		if op.image_shape != evaluator.image_shape:
			raise DimensionMismatch('Operator works on {} images but the network outputs {}'.format(op.image_shape, evaluator.image_shape))
		if y.size != op.d_y:
			raise DimensionMismatch('Measurement of length {} for an operator with d_y = {}'.format(y.size, op.d_y))
		self.evaluator = evaluator
		self.op = op
		self.y = y.data.copy()
		self.tv_weight = obj.weight(op.kind is OperatorKind.TOMOGRAPHY)
		self.__cached: Optional[_Linearisation] = None

	@property
	def d_y(self) -> int:
		return self.op.d_y

	@abstractmethod
	def parameters(self, x: np.ndarray) -> np.ndarray:
		"""
		theta(x)
		"""
		raise NotImplementedError()

	@abstractmethod
	def lift(self, v: np.ndarray) -> np.ndarray:
		"""
		The derivative of theta(x) along v
		"""
		raise NotImplementedError()

	@abstractmethod
	def project(self, g: np.ndarray) -> np.ndarray:
		"""
		Pull parameter-space row vector(s) back to x-space, i.e. the transpose of :meth:`lift`
		"""
		raise NotImplementedError()

	def __check(self, x: np.ndarray) -> np.ndarray:
		x = np.asarray(x, dtype=np.float64)
		if x.shape != (self.dim,):
			raise DimensionMismatch('Expected a vector of length {}, got shape {}'.format(self.dim, x.shape))
		return x

	def __failure(self, what: str, x: np.ndarray, theta: np.ndarray, **extra) -> NumericalFailure:
		diagnostics = {'x_norm': float(np.linalg.norm(x)), 'parameter_norm': float(np.linalg.norm(theta))}
		diagnostics.update(extra)
		return NumericalFailure(what, diagnostics)

	def __linearise(self, x: np.ndarray) -> _Linearisation:
		cached = self.__cached
		if cached is not None and np.array_equal(cached.x, x):
			return cached
		theta = self.parameters(x)
		output, pullback = self.evaluator.forward_with_pullback(theta)
		if not np.all(np.isfinite(output)):
			raise self.__failure('Non-finite network output', x, theta)
		self.__cached = _Linearisation(x.copy(), theta, output, pullback)
		return self.__cached

	def __value(self, x: np.ndarray, theta: np.ndarray, output: np.ndarray) -> Tuple[float, np.ndarray]:
		residual = self.op.matvec(output.reshape(-1)) - self.y
		value = 0.5 * float(residual @ residual)
		if self.tv_weight > 0:
			value += self.tv_weight * tv_value(output)
		if not math.isfinite(value):
			raise self.__failure('Non-finite loss', x, theta, loss=value)
		return value, residual

	def loss(self, x: np.ndarray) -> float:
		x = self.__check(x)
		cached = self.__cached
		if cached is not None and np.array_equal(cached.x, x):
			theta, output = cached.theta, cached.output
		else:
			theta = self.parameters(x)
			output = self.evaluator.forward(theta)
		return self.__value(x, theta, output)[0]

	def loss_and_grad(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
		x = self.__check(x)
		lin = self.__linearise(x)
		value, residual = self.__value(x, lin.theta, lin.output)
		cotangent = self.op.rmatvec(residual).reshape(lin.output.shape)
		if self.tv_weight > 0:
			cotangent = cotangent + self.tv_weight * tv_subgradient_array(lin.output)
		gradient = self.project(lin.pullback(cotangent))
		if not np.all(np.isfinite(gradient)):
			raise self.__failure('Non-finite gradient', x, lin.theta, loss=value)
		get_logger().debug('Objective {:.6g}, gradient norm {:.4g}'.format(value, np.linalg.norm(gradient)), option=DebugOption.OBJECTIVE)
		return value, gradient

	def image(self, x: np.ndarray) -> np.ndarray:
		x = self.__check(x)
		cached = self.__cached
		if cached is not None and np.array_equal(cached.x, x):
			return cached.output.copy()
		return self.evaluator.forward(self.parameters(x))

	def data_jvp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
		x = self.__check(x)
		tangent = self.evaluator.jvp(self.parameters(x), self.lift(np.asarray(v, dtype=np.float64)))
		return self.op.matvec(tangent.reshape(-1))

	def data_vjp_batch(self, x: np.ndarray, cotangents: np.ndarray) -> np.ndarray:
		lin = self.__linearise(self.__check(x))
		cotangents = np.atleast_2d(np.asarray(cotangents, dtype=np.float64))
		if cotangents.shape[1] != self.op.d_y:
			raise DimensionMismatch('Expected cotangents of length {}, got shape {}'.format(self.op.d_y, cotangents.shape))
		images = self.op.rmatvec(cotangents.T).T.reshape(-1, *lin.output.shape)
		return self.project(lin.pullback(images))


class SubspaceObjective(NetworkObjective):
	"""
	The objective as a function of the subspace coefficients c, theta = theta_pre + MU c
	"""
	def __init__(self, evaluator: NetworkEvaluator, model: SubspaceModel, op: LinearOperator, y: Measurement, obj: ObjectiveConfig):
		if model.d_theta != evaluator.d_theta:
			raise DimensionMismatch('Subspace spans {} parameters but the network has {}'.format(model.d_theta, evaluator.d_theta))
		super().__init__(evaluator, op, y, obj)
		self.model = model

	@property
	def dim(self) -> int:
		return self.model.d_sub

	def parameters(self, x: np.ndarray) -> np.ndarray:
		return self.model.gamma(x).data

	def lift(self, v: np.ndarray) -> np.ndarray:
		return self.model.lift(v)

	def project(self, g: np.ndarray) -> np.ndarray:
		return self.model.project(g)


class FullParameterObjective(NetworkObjective):
	"""
	The objective over all network parameters, for the DIP and E-DIP baselines
	"""
	@property
	def dim(self) -> int:
		return self.evaluator.d_theta

	def parameters(self, x: np.ndarray) -> np.ndarray:
		return x

	def lift(self, v: np.ndarray) -> np.ndarray:
		return v

	def project(self, g: np.ndarray) -> np.ndarray:
		return g


def loss(c: np.ndarray, model: SubspaceModel, cfg: ArchConfig, x0: NetworkInput, op: LinearOperator, y: Measurement, obj: ObjectiveConfig) -> float:
	return SubspaceObjective(NetworkEvaluator(cfg, x0), model, op, y, obj).loss(c)


def grad_c(c: np.ndarray, model: SubspaceModel, cfg: ArchConfig, x0: NetworkInput, op: LinearOperator, y: Measurement, obj: ObjectiveConfig) -> np.ndarray:
	return SubspaceObjective(NetworkEvaluator(cfg, x0), model, op, y, obj).grad(c)

