import math

import numpy as np
import scipy.sparse

from subdip.operators.linear_operator import LinearOperator, OperatorKind
from subdip.utils.exception import IllegalArgument


def gaussian_kernel(kappa: float) -> np.ndarray:
	"""
	Sampled 1-D Gaussian with standard deviation kappa, truncated at radius ceil(4 kappa) and normalised to unit sum
	"""
	radius = int(math.ceil(4 * kappa))
	offsets = np.arange(-radius, radius + 1)
	kernel = np.exp(-offsets ** 2 / (2 * kappa ** 2))
	return kernel / kernel.sum()


def reflect_index(index: np.ndarray, n: int) -> np.ndarray:
	"""
	Half-sample symmetric reflection (d c b a | a b c d | d c b a), valid for any offset
	"""
	index = np.mod(index, 2 * n)
	return np.where(index >= n, 2 * n - 1 - index, index)


def blur_matrix_1d(kappa: float, n: int) -> scipy.sparse.csr_matrix:
	kernel = gaussian_kernel(kappa)
	radius = len(kernel) // 2
	rows = np.repeat(np.arange(n), len(kernel))
	cols = reflect_index(rows + np.tile(np.arange(-radius, radius + 1), n), n)
	values = np.tile(kernel, n)
	return scipy.sparse.coo_matrix((values, (rows, cols)), shape=(n, n)).tocsr()


def gaussian_blur_operator(kappa: float, height: int, width: int) -> LinearOperator:
	"""
	2-D Gaussian convolution with reflective borders as a d_x x d_x matrix. The blur is separable, so the
	row-major operator is kron(B_height, B_width)
	"""
	if not kappa > 0:
		raise IllegalArgument('Blur kappa should be positive, found {}'.format(kappa))
	if height < 1 or width < 1:
		raise IllegalArgument('Image dimensions should be positive, found {}x{}'.format(height, width))
	matrix = scipy.sparse.kron(blur_matrix_1d(kappa, height), blur_matrix_1d(kappa, width), format='csr')
	return LinearOperator(matrix, OperatorKind.BLUR, (height, width), (height, width))
