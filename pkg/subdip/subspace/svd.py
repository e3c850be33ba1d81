"""
Principal subspace of the pre-training trajectory, in one batch or incrementally over a checkpoint stream
"""
from typing import Iterable, NamedTuple, Optional, Union

import numpy as np
import scipy.linalg

from subdip.network.param_vector import ParamVector
from subdip.subspace.trajectory import TrajectoryStore
from subdip.utils.exception import IllegalArgument
from subdip.utils.logger import get_logger, DebugOption


class SvdResult(NamedTuple):
	u: np.ndarray  # d_theta x r, orthonormal columns
	s: np.ndarray  # r non-increasing singular values
	rank_deficient: bool  # True if fewer than the requested d_sub directions were available
	peak_bytes: int = 0  # instrumented peak of the resident factor / buffer arrays, incremental SVD only


def fix_signs(u: np.ndarray) -> np.ndarray:
	"""
	Flip every column so that its entry of largest magnitude is positive, making the factorisation unique
	"""
	if u.shape[1] == 0:
		return u
	pivots = u[np.argmax(np.abs(u), axis=0), np.arange(u.shape[1])]
	return u * np.where(pivots < 0, -1.0, 1.0)[np.newaxis, :]


def numerical_rank(s: np.ndarray, shape) -> int:
	if len(s) == 0 or s[0] == 0:
		return 0
	tol = s[0] * max(shape) * np.finfo(np.float64).eps
	return int(np.count_nonzero(s > tol))


def _truncate(u: np.ndarray, s: np.ndarray, d_sub: int, shape, peak_bytes: int = 0) -> SvdResult:
	rank = min(d_sub, numerical_rank(s, shape))
	if rank < d_sub:
		get_logger().warning('Trajectory has only {} numerically non-zero directions, {} requested'.format(rank, d_sub))
	return SvdResult(fix_signs(np.ascontiguousarray(u[:, :rank])), s[:rank].copy(), rank < d_sub, peak_bytes)


def batch_svd(store: Union[TrajectoryStore, np.ndarray], d_sub: int) -> SvdResult:
	"""
	Top-d_sub left singular vectors and singular values of the raw stacked checkpoint matrix

	If the matrix has a numerical rank below d_sub, only the non-trivial directions are returned and the result is
	flagged as rank deficient
	"""
	matrix = store.matrix() if isinstance(store, TrajectoryStore) else np.asarray(store, dtype=np.float64)
	if not 1 <= d_sub <= min(matrix.shape):
		raise IllegalArgument('d_sub should be in [1, {}], found {}'.format(min(matrix.shape), d_sub))
	u, s, _ = scipy.linalg.svd(matrix, full_matrices=False, lapack_driver='gesdd')
	get_logger().debug('Batch SVD of a {}x{} trajectory, leading singular values {}'.format(*matrix.shape, s[:5]), option=DebugOption.SUBSPACE)
	return _truncate(u, s, d_sub, matrix.shape)


class IncrementalSvd:
	"""
	Single-pass rank-d_sub factorisation of a column stream (Brand's update without right singular vectors)

	Columns are buffered; every full buffer B is folded into the current factor U diag(S):
	project P = U^T B, orthonormalise the residual B - U P by QR into Q R, take the SVD of the small
	[[diag(S), P], [0, R]] block, rotate [U Q] by its left factor and truncate back to d_sub columns.
	Resident memory stays within O(d_theta * (d_sub + buffer_size))
	"""
	def __init__(self, d_sub: int, buffer_size: int):
		if d_sub < 1 or buffer_size < 1:
			raise IllegalArgument('d_sub and buffer_size should be at least 1, found {} and {}'.format(d_sub, buffer_size))
		self.d_sub = d_sub
		self.buffer_size = buffer_size
		self.__u: Optional[np.ndarray] = None
		self.__s = np.zeros(0)
		self.__buffer: Optional[np.ndarray] = None
		self.__buffered = 0
		self.__seen = 0
		self.peak_bytes = 0

	@property
	def seen(self) -> int:
		return self.__seen

	def __record(self, *arrays: Optional[np.ndarray]):
		self.peak_bytes = max(self.peak_bytes, sum(a.nbytes for a in arrays if a is not None))

	def add(self, column: np.ndarray):
		column = np.asarray(column, dtype=np.float64).reshape(-1)
		if self.__buffer is None:
			self.__buffer = np.zeros((column.size, self.buffer_size))
		self.__buffer[:, self.__buffered] = column
		self.__buffered += 1
		self.__seen += 1
		if self.__buffered == self.buffer_size:
			self.flush()

	def flush(self):
		if self.__buffered == 0:
			return
		block = self.__buffer[:, :self.__buffered]
		if self.__u is None:
			u, s, _ = scipy.linalg.svd(block, full_matrices=False)
			self.__record(self.__buffer, u)
		else:
			u_old, s_old = self.__u, self.__s
			p = u_old.T @ block
			residual = block - u_old @ p
			# second projection pass keeps Q orthogonal to U when the block is nearly inside span(U)
			correction = u_old.T @ residual
			residual -= u_old @ correction
			p += correction
			q, r = scipy.linalg.qr(residual, mode='economic')
			self.__record(u_old, self.__buffer, residual, q)
			del residual
			k = len(s_old)
			b = block.shape[1]
			augmented = np.zeros((k + b, k + b))
			augmented[:k, :k] = np.diag(s_old)
			augmented[:k, k:] = p
			augmented[k:, k:] = r
			rotation, s, _ = scipy.linalg.svd(augmented)
			keep = min(self.d_sub, len(s))
			u = u_old @ rotation[:k, :keep] + q @ rotation[k:, :keep]
			s = s[:keep]
			self.__record(u_old, self.__buffer, q, u)
		keep = min(self.d_sub, len(s))
		self.__u, self.__s = u[:, :keep], s[:keep]
		self.__buffered = 0

	def result(self) -> SvdResult:
		self.flush()
		if self.__u is None:
			raise IllegalArgument('No column was added to the incremental SVD')
		shape = (self.__u.shape[0], self.__seen)
		return _truncate(self.__u, self.__s, self.d_sub, shape, self.peak_bytes)


def incremental_svd(stream: Iterable[Union[ParamVector, np.ndarray]], d_sub: int, buffer_size: int) -> SvdResult:
	svd = IncrementalSvd(d_sub, buffer_size)
	for item in stream:
		svd.add(item.data if isinstance(item, ParamVector) else item)
	if svd.seen < d_sub:
		raise IllegalArgument('The stream has {} columns, fewer than d_sub = {}'.format(svd.seen, d_sub))
	result = svd.result()
	get_logger().debug('Incremental SVD over {} columns, peak resident {} bytes'.format(svd.seen, result.peak_bytes), option=DebugOption.SUBSPACE)
	return result


def memory_budget_bytes(d_theta: int, d_sub: int, buffer_size: int) -> int:
	"""
	The most the incremental SVD keeps resident: U, the buffer, residual and Q, and the rotated factor
	"""
	return 8 * d_theta * (2 * d_sub + 3 * buffer_size)
