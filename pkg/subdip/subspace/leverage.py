from typing import NamedTuple

import numpy as np
import scipy.sparse

from subdip.utils.exception import IllegalArgument


class SparseBasis(NamedTuple):
	mask_support: np.ndarray  # sorted indices of the retained rows
	basis: scipy.sparse.csr_matrix  # d_theta x d_sub, non-zero only on mask_support rows


def leverage_scores(u: np.ndarray) -> np.ndarray:
	"""
	Row-wise squared norms of an orthonormal basis. They sum to its column count
	"""
	u = u.toarray() if scipy.sparse.issparse(u) else np.asarray(u)
	return np.einsum('ij,ij->i', u, u)


def top_support(scores: np.ndarray, d_lev: int) -> np.ndarray:
	"""
	Indices of the d_lev largest scores, ties going to the lower index, returned in ascending order
	"""
	if not 1 <= d_lev <= len(scores):
		raise IllegalArgument('d_lev should be in [1, {}], found {}'.format(len(scores), d_lev))
	order = np.lexsort((np.arange(len(scores)), -scores))
	return np.sort(order[:d_lev])


def sparsify(u: np.ndarray, s: np.ndarray, d_lev: int) -> SparseBasis:
	"""
	Keep the d_lev rows of U with the largest leverage scores and zero the rest. The kept columns are not
	re-orthonormalised. s is the matching spectrum, which the mask doesn't change
	"""
	u = u.toarray() if scipy.sparse.issparse(u) else np.asarray(u, dtype=np.float64)
	if len(s) != u.shape[1]:
		raise IllegalArgument('{} singular values for a basis of {} columns'.format(len(s), u.shape[1]))
	support = top_support(leverage_scores(u), d_lev)
	masked = np.zeros_like(u)
	masked[support] = u[support]
	basis = scipy.sparse.csr_matrix(masked)
	basis.eliminate_zeros()
	return SparseBasis(support, basis)
