"""
Fisher information of the data term restricted to the subspace, estimated with Gaussian probes or assembled exactly
"""
from typing import Union

import numpy as np

from subdip.objective.problem import Problem
from subdip.utils.exception import IllegalArgument

# probes per vector-Jacobian batch
PROBE_CHUNK = 64


def probe_rng(seed: int) -> np.random.Generator:
	"""
	Probe noise comes from a counter-based stream of its own, independent of every other seeded draw
	"""
	return np.random.Generator(np.random.Philox(seed))


def fim_from_probes(problem: Problem, x: np.ndarray, probes: np.ndarray) -> np.ndarray:
	"""
	(1/n) sum_i r_i^T r_i with rows r_i = z_i^T (d measurement / dx) for the n x d_y probe stack z
	"""
	probes = np.atleast_2d(probes)
	rows = np.concatenate([
		problem.data_vjp_batch(x, probes[start:start + PROBE_CHUNK])
		for start in range(0, len(probes), PROBE_CHUNK)
	])
	fim = rows.T @ rows / len(probes)
	return 0.5 * (fim + fim.T)


def estimate_fim(problem: Problem, x: np.ndarray, n_probes: int, rng: Union[int, np.random.Generator]) -> np.ndarray:
	"""
	Monte-Carlo estimate of the Fisher with n_probes standard Gaussian probes in measurement space

	:param rng: a generator, or a seed for :func:`probe_rng`
	"""
	if n_probes < 1:
		raise IllegalArgument('n_probes should be at least 1, found {}'.format(n_probes))
	if not isinstance(rng, np.random.Generator):
		rng = probe_rng(rng)
	return fim_from_probes(problem, x, rng.standard_normal((n_probes, problem.d_y)))


def exact_fim(problem: Problem, x: np.ndarray) -> np.ndarray:
	"""
	J^T J with the d_y x dim Jacobian J assembled from dim forward-mode products
	"""
	jacobian = np.stack([problem.data_jvp(x, e) for e in np.eye(problem.dim)], axis=1)
	fim = jacobian.T @ jacobian
	return 0.5 * (fim + fim.T)


def update_fim_ma(fim: np.ndarray, fim_estimate: np.ndarray, beta: float) -> np.ndarray:
	"""
	beta * F + (1 - beta) * F_hat
	"""
	if not 0 < beta < 1:
		raise IllegalArgument('beta should be in (0, 1), found {}'.format(beta))
	return beta * fim + (1 - beta) * fim_estimate
