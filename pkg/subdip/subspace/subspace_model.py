"""
The sparse subspace reparametrisation gamma(c) = theta_pre + MU c and its persistence
"""
import os
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse
from ruamel.yaml import YAML

from subdip.network.param_vector import ParamVector, ParamLayout
from subdip.storage import sdip_format
from subdip.subspace.leverage import sparsify
from subdip.subspace.svd import SvdResult
from subdip.utils import file_util
from subdip.utils.exception import DimensionMismatch, DecodeError, IllegalArgument
from subdip.utils.logger import get_logger, DebugOption

MANIFEST_FILE = 'subspace.yml'
THETA_PRE_FILE = 'theta_pre.sdip'
BASIS_FILE = 'basis.coo'
SUPPORT_FILE = 'mask_support.sdip'
COO_DTYPE = np.dtype([('row', '<u4'), ('col', '<u4'), ('value', '<f8')])


class SubspaceModel:
	def __init__(self, theta_pre: ParamVector, basis: scipy.sparse.spmatrix, singular_values: np.ndarray, mask_support: np.ndarray):
		basis = scipy.sparse.csr_matrix(basis, dtype=np.float64)
		if basis.shape[0] != theta_pre.size:
			raise DimensionMismatch('Basis has {} rows but theta_pre has {} entries'.format(basis.shape[0], theta_pre.size))
		if len(singular_values) != basis.shape[1]:
			raise DimensionMismatch('{} singular values for {} basis columns'.format(len(singular_values), basis.shape[1]))
		self.theta_pre = theta_pre
		self.basis = basis
		self.basis_t = basis.T.tocsr()
		self.singular_values = np.asarray(singular_values, dtype=np.float64)
		self.mask_support = np.asarray(mask_support, dtype=np.int64)

	@property
	def d_theta(self) -> int:
		return self.theta_pre.size

	@property
	def d_sub(self) -> int:
		return self.basis.shape[1]

	@property
	def d_lev(self) -> int:
		return len(self.mask_support)

	def lift(self, c: np.ndarray) -> np.ndarray:
		"""
		MU c, the parameter-space displacement of coefficients c. A trailing batch axis is allowed
		"""
		c = np.asarray(c, dtype=np.float64)
		if c.shape[0] != self.d_sub:
			raise DimensionMismatch('Expected {} coefficients, got shape {}'.format(self.d_sub, c.shape))
		return np.asarray(self.basis @ c)

	def project(self, v: np.ndarray) -> np.ndarray:
		"""
		(MU)^T v for parameter-space vector(s) v, given as d_theta or k x d_theta
		"""
		v = np.asarray(v, dtype=np.float64)
		if v.shape[-1] != self.d_theta:
			raise DimensionMismatch('Expected parameter vectors of length {}, got shape {}'.format(self.d_theta, v.shape))
		if v.ndim == 1:
			return np.asarray(self.basis_t @ v)
		return np.asarray(self.basis_t @ v.T).T

	def gamma(self, c: np.ndarray) -> ParamVector:
		return self.theta_pre.with_data(self.theta_pre.data + self.lift(c))

	def save(self, directory: str):
		file_util.touch_directory(directory)
		self.theta_pre.save(os.path.join(directory, THETA_PRE_FILE))
		write_coo(os.path.join(directory, BASIS_FILE), self.basis)
		sdip_format.write(os.path.join(directory, SUPPORT_FILE), self.mask_support.astype(np.float64))
		manifest = {
			'd_theta': self.d_theta,
			'd_sub': self.d_sub,
			'd_lev': self.d_lev,
			'singular_values': [float(s) for s in self.singular_values],
		}
		with file_util.safe_write(os.path.join(directory, MANIFEST_FILE), encoding='utf8') as file:
			YAML().dump(manifest, file)

	@classmethod
	def load(cls, directory: str, layout: Optional[ParamLayout] = None) -> 'SubspaceModel':
		with open(os.path.join(directory, MANIFEST_FILE), encoding='utf8') as file:
			manifest = YAML(typ='safe').load(file)
		theta_pre = ParamVector.load(os.path.join(directory, THETA_PRE_FILE), layout)
		if manifest['d_theta'] != theta_pre.size:
			raise DecodeError('Manifest d_theta {} differs from the stored theta_pre ({})'.format(manifest['d_theta'], theta_pre.size))
		basis = read_coo(os.path.join(directory, BASIS_FILE), (manifest['d_theta'], manifest['d_sub']))
		support_array, _ = sdip_format.read(os.path.join(directory, SUPPORT_FILE))
		support = support_array.reshape(-1).astype(np.int64)
		if len(support) != manifest['d_lev']:
			raise DecodeError('Stored support has {} rows but the manifest says d_lev = {}'.format(len(support), manifest['d_lev']))
		outside = np.setdiff1d(np.unique(basis.nonzero()[0]), support)
		if len(outside) > 0:
			raise DecodeError('Basis has non-zero rows outside of the mask support, e.g. row {}'.format(outside[0]))
		return cls(theta_pre, basis, np.array(manifest['singular_values'], dtype=np.float64), support)

	def __repr__(self):
		return 'SubspaceModel[d_theta={}, d_sub={}, d_lev={}, nnz={}]'.format(self.d_theta, self.d_sub, self.d_lev, self.basis.nnz)


def write_coo(file_path: str, matrix: scipy.sparse.spmatrix):
	"""
	Coordinate triplets (u32 row, u32 col, f64 value), little-endian, sorted by (row, col)
	"""
	coo = scipy.sparse.csr_matrix(matrix).tocoo()
	order = np.lexsort((coo.col, coo.row))
	records = np.empty(coo.nnz, dtype=COO_DTYPE)
	records['row'] = coo.row[order]
	records['col'] = coo.col[order]
	records['value'] = coo.data[order]
	with file_util.safe_write_binary(file_path) as file:
		file.write(records.tobytes())


def read_coo(file_path: str, shape) -> scipy.sparse.csr_matrix:
	with open(file_path, 'rb') as file:
		data = file.read()
	if len(data) % COO_DTYPE.itemsize != 0:
		raise DecodeError('Truncated coordinate file {}'.format(file_path))
	records = np.frombuffer(data, dtype=COO_DTYPE)
	if len(records) > 0 and (records['row'].max() >= shape[0] or records['col'].max() >= shape[1]):
		raise DecodeError('Coordinate out of the {} matrix in {}'.format(shape, file_path))
	rows = records['row'].astype(np.int64)
	cols = records['col'].astype(np.int64)
	return scipy.sparse.csr_matrix((records['value'].astype(np.float64), (rows, cols)), shape=shape)


def build_subspace_model(theta_pre: ParamVector, svd: SvdResult, d_lev: int) -> SubspaceModel:
	fragment = sparsify(svd.u, svd.s, d_lev)
	get_logger().debug('Sparsified basis keeps {} of {} rows, {} non-zeros'.format(d_lev, theta_pre.size, fragment.basis.nnz), option=DebugOption.SUBSPACE)
	return SubspaceModel(theta_pre, fragment.basis, svd.s, fragment.mask_support)


def d_lev_from_fraction(d_theta: int, fraction: float) -> int:
	if not 0 < fraction <= 1:
		raise IllegalArgument('d_lev fraction should be in (0, 1], found {}'.format(fraction))
	return max(1, int(round(fraction * d_theta)))


def init_coefficients(d_sub: int, seed: int) -> np.ndarray:
	"""
	A uniform draw from the unit sphere in R^d_sub: a normalised isotropic Gaussian
	"""
	if d_sub < 1:
		raise IllegalArgument('d_sub should be at least 1, found {}'.format(d_sub))
	rng = np.random.default_rng(seed)
	while True:
		c = rng.standard_normal(d_sub)
		norm = np.linalg.norm(c)
		if norm > 0:
			return c / norm


def random_basis(d_theta: int, d_sub: int, seed: int, *, orthonormal: bool) -> SvdResult:
	"""
	Baseline bases for the basis ablation: independent Gaussian columns scaled to unit norm, or their orthonormalisation
	"""
	if not 1 <= d_sub <= d_theta:
		raise IllegalArgument('d_sub should be in [1, {}], found {}'.format(d_theta, d_sub))
	rng = np.random.default_rng(seed)
	u = rng.standard_normal((d_theta, d_sub))
	if orthonormal:
		u, _ = scipy.linalg.qr(u, mode='economic')
	else:
		u /= np.linalg.norm(u, axis=0, keepdims=True)
	return SvdResult(u, np.ones(d_sub), False)
