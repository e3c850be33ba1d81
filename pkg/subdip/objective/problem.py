"""
The interface every optimiser works against: a smooth loss over a flat coefficient vector, plus the linearised data
map used for curvature
"""
from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np

from subdip.utils.exception import DimensionMismatch


class Problem(ABC):
	@property
	@abstractmethod
	def dim(self) -> int:
		raise NotImplementedError()

	@abstractmethod
	def loss_and_grad(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
		raise NotImplementedError()

	def loss(self, x: np.ndarray) -> float:
		return self.loss_and_grad(x)[0]

	def grad(self, x: np.ndarray) -> np.ndarray:
		return self.loss_and_grad(x)[1]

	@property
	def d_y(self) -> int:
		"""
		Length of the measurement the data term compares against
		"""
		raise NotImplementedError()

	def image(self, x: np.ndarray) -> np.ndarray:
		"""
		The reconstruction at x as a 2-D array
		"""
		raise NotImplementedError()

	def data_jvp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
		"""
		The derivative of the predicted measurement at x along v, a vector of length d_y
		"""
		raise NotImplementedError()

	def data_vjp_batch(self, x: np.ndarray, cotangents: np.ndarray) -> np.ndarray:
		"""
		For a k x d_y stack of measurement-space cotangents z_i, the k x dim rows z_i^T (d measurement / dx)
		"""
		raise NotImplementedError()

	def data_vjp(self, x: np.ndarray, cotangent: np.ndarray) -> np.ndarray:
		return self.data_vjp_batch(x, np.asarray(cotangent)[np.newaxis, :])[0]

	def fisher_matvec(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
		"""
		The exact Fisher (Gauss-Newton) product J^T J v of the data term, without any regulariser contribution
		"""
		return self.data_vjp(x, self.data_jvp(x, v))


class LeastSquaresProblem(Problem):
	"""
	0.5 * ||B x - y||^2 with an explicit matrix B. Its Fisher is exactly B^T B everywhere
	"""
	def __init__(self, matrix: np.ndarray, target: np.ndarray):
		self.matrix = np.asarray(matrix, dtype=np.float64)
		self.target = np.asarray(target, dtype=np.float64)
		if self.matrix.ndim != 2 or self.target.shape != (self.matrix.shape[0],):
			raise DimensionMismatch('Matrix {} and target {} do not match'.format(self.matrix.shape, self.target.shape))

	@property
	def dim(self) -> int:
		return self.matrix.shape[1]

	@property
	def d_y(self) -> int:
		return self.matrix.shape[0]

	def loss_and_grad(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
		residual = self.matrix @ x - self.target
		return 0.5 * float(residual @ residual), self.matrix.T @ residual

	def image(self, x: np.ndarray) -> np.ndarray:
		return np.asarray(x, dtype=np.float64).reshape(1, -1)

	def data_jvp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
		return self.matrix @ v

	def data_vjp_batch(self, x: np.ndarray, cotangents: np.ndarray) -> np.ndarray:
		return np.asarray(cotangents) @ self.matrix

	def solution(self) -> np.ndarray:
		"""
		The minimum-norm minimiser, from the normal equations
		"""
		return np.linalg.lstsq(self.matrix, self.target, rcond=None)[0]
