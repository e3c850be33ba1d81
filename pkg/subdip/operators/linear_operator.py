from enum import Enum, unique, auto
from typing import Optional, Tuple, Union

import numpy as np
import scipy.sparse

from subdip.constants import core_constant
from subdip.operators.image import Image, Measurement
from subdip.utils.exception import DimensionMismatch

Matrix = Union[np.ndarray, scipy.sparse.spmatrix]


@unique
class OperatorKind(Enum):
	TOMOGRAPHY = auto()
	BLUR = auto()
	IDENTITY = auto()


def _store(matrix: Matrix) -> Matrix:
	"""
	Dense below DENSE_OPERATOR_MAX_ENTRIES potential entries, CSR above
	"""
	rows, cols = matrix.shape
	if rows * cols < core_constant.DENSE_OPERATOR_MAX_ENTRIES:
		if scipy.sparse.issparse(matrix):
			matrix = matrix.toarray()
		matrix = np.array(matrix, dtype=np.float64)
		matrix.setflags(write=False)
		return matrix
	if not scipy.sparse.issparse(matrix):
		matrix = scipy.sparse.csr_matrix(matrix)
	matrix = scipy.sparse.csr_matrix(matrix, dtype=np.float64)
	matrix.sum_duplicates()
	matrix.sort_indices()
	return matrix


class LinearOperator:
	"""
	An explicit d_y x d_x forward model. The adjoint is the exact transpose of the stored matrix

	Instances are immutable after construction and may be shared between threads
	"""
	def __init__(self, matrix: Matrix, kind: OperatorKind, image_shape: Tuple[int, int], measurement_shape: Optional[Tuple[int, int]] = None):
		if matrix.ndim != 2:
			raise DimensionMismatch('Operator matrix should be 2-D, got shape {}'.format(matrix.shape))
		if image_shape[0] * image_shape[1] != matrix.shape[1]:
			raise DimensionMismatch('Image shape {} does not match {} operator columns'.format(image_shape, matrix.shape[1]))
		if measurement_shape is not None and measurement_shape[0] * measurement_shape[1] != matrix.shape[0]:
			raise DimensionMismatch('Measurement shape {} does not match {} operator rows'.format(measurement_shape, matrix.shape[0]))
		self.__matrix = _store(matrix)
		self.kind = kind
		self.image_shape = (int(image_shape[0]), int(image_shape[1]))
		self.measurement_shape = measurement_shape

	@property
	def matrix(self) -> Matrix:
		return self.__matrix

	@property
	def shape(self) -> Tuple[int, int]:
		return self.__matrix.shape

	@property
	def d_y(self) -> int:
		return self.__matrix.shape[0]

	@property
	def d_x(self) -> int:
		return self.__matrix.shape[1]

	@property
	def is_sparse(self) -> bool:
		return scipy.sparse.issparse(self.__matrix)

	def to_dense(self) -> np.ndarray:
		if self.is_sparse:
			return self.__matrix.toarray()
		return np.array(self.__matrix)

	def matvec(self, x: np.ndarray) -> np.ndarray:
		"""
		A x on raw vectors. A trailing batch axis is allowed, i.e. x may be d_x or d_x x k
		"""
		x = np.asarray(x, dtype=np.float64)
		if x.shape[0] != self.d_x:
			raise DimensionMismatch('Operator expects {} entries per input vector, got {}'.format(self.d_x, x.shape[0]))
		return np.asarray(self.__matrix @ x)

	def rmatvec(self, y: np.ndarray) -> np.ndarray:
		"""
		A^T y on raw vectors. A trailing batch axis is allowed
		"""
		y = np.asarray(y, dtype=np.float64)
		if y.shape[0] != self.d_y:
			raise DimensionMismatch('Operator adjoint expects {} entries per input vector, got {}'.format(self.d_y, y.shape[0]))
		return np.asarray(self.__matrix.T @ y)

	def apply(self, x: Image) -> Measurement:
		if x.shape != self.image_shape:
			raise DimensionMismatch('Operator expects a {}x{} image, got {}x{}'.format(*self.image_shape, *x.shape))
		return Measurement(self.matvec(x.vector()), shape=self.measurement_shape)

	def adjoint_apply(self, y: Measurement) -> Image:
		return Image.from_vector(self.rmatvec(y.data), *self.image_shape)

	def __repr__(self):
		return 'LinearOperator[kind={}, shape={}, sparse={}]'.format(self.kind.name, self.shape, self.is_sparse)


def identity_operator(height: int, width: int) -> LinearOperator:
	d_x = height * width
	return LinearOperator(scipy.sparse.identity(d_x, dtype=np.float64, format='csr'), OperatorKind.IDENTITY, (height, width), (height, width))
