"""
Explicit parallel-beam system matrix by exact ray / pixel intersection lengths (Siddon traversal)
"""
import concurrent.futures
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse

from subdip.constants import core_constant
from subdip.operators.geometry import ParallelBeamGeometry
from subdip.operators.linear_operator import LinearOperator, OperatorKind
from subdip.utils.exception import OperatorTooLarge, IllegalArgument
from subdip.utils.logger import get_logger, DebugOption

# Crossings closer than this are merged, and segment midpoints this close to a grid line count as on the line
_GRID_EPS = 1e-9

Triplets = Tuple[np.ndarray, np.ndarray, np.ndarray]


def _slab(origin: float, direction: float, low: float, high: float) -> Tuple[float, float]:
	"""
	The parameter interval where origin + s * direction lies in [low, high]
	"""
	if abs(direction) < 1e-15:
		if low <= origin <= high:
			return -np.inf, np.inf
		return np.inf, -np.inf
	s0 = (low - origin) / direction
	s1 = (high - origin) / direction
	return min(s0, s1), max(s0, s1)


def _cell_candidates(position: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
	"""
	Both cell indices for each coordinate. They differ only when the coordinate sits on a grid line
	"""
	return np.floor(position - _GRID_EPS).astype(np.int64), np.floor(position + _GRID_EPS).astype(np.int64)


def trace_ray(theta: float, t: float, height: int, width: int) -> Tuple[np.ndarray, np.ndarray]:
	"""
	Intersect the ray {t * n + s * d} with the pixel grid, n = (cos theta, sin theta), d = (-sin theta, cos theta)

	A ray running exactly along a grid line is shared equally by the pixels on both sides

	:return: flat pixel indices and intersection lengths. Indices may repeat; repeated entries add up
	"""
	cos, sin = np.cos(theta), np.sin(theta)
	origin_x, origin_y = t * cos, t * sin
	dir_x, dir_y = -sin, cos
	half_w, half_h = width / 2, height / 2

	sx0, sx1 = _slab(origin_x, dir_x, -half_w, half_w)
	sy0, sy1 = _slab(origin_y, dir_y, -half_h, half_h)
	s_enter, s_exit = max(sx0, sy0), min(sx1, sy1)
	if not s_exit - s_enter > _GRID_EPS:
		return np.zeros(0, dtype=np.int64), np.zeros(0)

	crossings = [np.array([s_enter, s_exit])]
	if abs(dir_x) >= 1e-15:
		crossings.append((np.arange(width + 1) - half_w - origin_x) / dir_x)
	if abs(dir_y) >= 1e-15:
		crossings.append((np.arange(height + 1) - half_h - origin_y) / dir_y)
	s = np.concatenate(crossings)
	s = np.sort(s[(s >= s_enter) & (s <= s_exit)])
	s = s[np.concatenate([[True], np.diff(s) > _GRID_EPS])]
	if len(s) < 2:
		return np.zeros(0, dtype=np.int64), np.zeros(0)

	lengths = np.diff(s)
	middle = (s[:-1] + s[1:]) / 2
	col_pos = origin_x + middle * dir_x + half_w
	row_pos = half_h - (origin_y + middle * dir_y)
	col_lo, col_hi = _cell_candidates(col_pos)
	row_lo, row_hi = _cell_candidates(row_pos)

	rows = np.concatenate([row_lo, row_lo, row_hi, row_hi])
	cols = np.concatenate([col_lo, col_hi, col_lo, col_hi])
	weights = np.tile(lengths / 4, 4)
	# a ray on the outer border keeps only the half that falls inside
	inside = (rows >= 0) & (rows < height) & (cols >= 0) & (cols < width)
	return rows[inside] * width + cols[inside], weights[inside]


def _trace_angle_block(geom: ParallelBeamGeometry, angle_indices: List[int], height: int, width: int) -> Triplets:
	rows, cols, values = [], [], []
	angles = geom.angles
	positions = geom.detector_positions
	for a in angle_indices:
		for k, t in enumerate(positions):
			indices, weights = trace_ray(angles[a], t, height, width)
			if len(indices) == 0:
				continue
			rows.append(np.full(len(indices), a * geom.n_detectors + k, dtype=np.int64))
			cols.append(indices)
			values.append(weights)
	if len(rows) == 0:
		return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0)
	return np.concatenate(rows), np.concatenate(cols), np.concatenate(values)


def assemble_parallel_beam(
		geom: ParallelBeamGeometry, height: int, width: int, *,
		entry_budget: int = core_constant.DEFAULT_OPERATOR_ENTRY_BUDGET, workers: Optional[int] = None
) -> LinearOperator:
	"""
	Build the explicit tomography matrix. Column j is the sinogram of the j-th standard-basis image

	Angles are split into contiguous blocks traced by a thread pool; the blocks are concatenated in angle order,
	so the result does not depend on the worker count

	:param entry_budget: Refuse to build an operator with more than this many potential entries d_y * d_x
	:param workers: Thread count for the tracing. None or 1 traces on the calling thread
	:raise OperatorTooLarge: if d_y * d_x exceeds the entry budget
	"""
	if height < 1 or width < 1:
		raise IllegalArgument('Image dimensions should be positive, found {}x{}'.format(height, width))
	d_x = height * width
	if geom.d_y * d_x > entry_budget:
		raise OperatorTooLarge('Operator of {}x{} entries exceeds the budget of {} entries'.format(geom.d_y, d_x, entry_budget))
	logger = get_logger()
	logger.debug('Assembling parallel-beam operator {} for a {}x{} image'.format(geom, height, width), option=DebugOption.OPERATORS)

	if workers is None or workers <= 1 or geom.n_angles == 1:
		blocks = [_trace_angle_block(geom, list(range(geom.n_angles)), height, width)]
	else:
		chunks = [list(chunk) for chunk in np.array_split(np.arange(geom.n_angles), min(workers, geom.n_angles)) if len(chunk) > 0]
		with concurrent.futures.ThreadPoolExecutor(max_workers=workers, thread_name_prefix='Siddon') as executor:
			futures = [executor.submit(_trace_angle_block, geom, chunk, height, width) for chunk in chunks]
			blocks = [future.result() for future in futures]

	rows = np.concatenate([b[0] for b in blocks])
	cols = np.concatenate([b[1] for b in blocks])
	values = np.concatenate([b[2] for b in blocks])
	matrix = scipy.sparse.coo_matrix((values, (rows, cols)), shape=(geom.d_y, d_x)).tocsr()
	logger.debug('Parallel-beam operator assembled with {} non-zeros'.format(matrix.nnz), option=DebugOption.OPERATORS)
	return LinearOperator(matrix, OperatorKind.TOMOGRAPHY, (height, width), geom.sinogram_shape)
