import unittest
from typing import Tuple
from unittest import mock

import numpy as np
import scipy.optimize

from subdip.objective.problem import Problem, LeastSquaresProblem
from subdip.optim.lbfgs import LbfgsConfig, lbfgs_run, two_loop_direction
from subdip.optim.optim_result import Termination
from subdip.utils.exception import ConfigError
from tests.objective.tiny_problem import tiny_objective


class Rosenbrock(Problem):
	@property
	def dim(self) -> int:
		return 2

	def loss_and_grad(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
		a, b = x
		value = (1 - a) ** 2 + 100 * (b - a * a) ** 2
		grad = np.array([-2 * (1 - a) - 400 * a * (b - a * a), 200 * (b - a * a)])
		return float(value), grad


class Quadratic(Problem):
	def __init__(self, hessian: np.ndarray, linear: np.ndarray):
		self.hessian = hessian
		self.linear = linear

	@property
	def dim(self) -> int:
		return len(self.linear)

	def loss_and_grad(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
		return float(0.5 * x @ self.hessian @ x - self.linear @ x), self.hessian @ x - self.linear


class MyTestCase(unittest.TestCase):
	def test_0_quadratic(self):
		rng = np.random.default_rng(0)
		a = rng.normal(size=(8, 8))
		problem = Quadratic(a @ a.T + np.eye(8), rng.normal(size=8))
		minimiser = np.linalg.solve(problem.hessian, problem.linear)
		result = lbfgs_run(problem, np.zeros(8), LbfgsConfig(), max_steps=30)
		self.assertLessEqual(result.steps, 30)
		self.assertLess(np.linalg.norm(result.x - minimiser), 1e-8)

	def test_1_zero_gradient(self):
		problem = LeastSquaresProblem(np.eye(3), np.array([1.0, 2.0, 3.0]))
		result = lbfgs_run(problem, np.array([1.0, 2.0, 3.0]), LbfgsConfig(), max_steps=10)
		self.assertEqual(0, result.steps)
		self.assertEqual(Termination.CONVERGED, result.termination)

	def test_2_rosenbrock(self):
		result = lbfgs_run(Rosenbrock(), np.array([-1.2, 1.0]), LbfgsConfig(), max_steps=200)
		self.assertLess(result.losses[-1], 1e-8)
		np.testing.assert_allclose(result.x, [1.0, 1.0], atol=1e-3)

	def test_3_monotone(self):
		result = lbfgs_run(Rosenbrock(), np.array([-1.2, 1.0]), LbfgsConfig(), max_steps=50)
		self.assertTrue(all(b <= a for a, b in zip(result.losses, result.losses[1:])))

	def test_4_two_loop(self):
		self.assertEqual([-1.0, 2.0], two_loop_direction(np.array([1.0, -2.0]), []).tolist())
		hessian = np.diag([2.0, 5.0])
		pairs = [(np.array([1.0, 0.0]), hessian @ np.array([1.0, 0.0])), (np.array([0.0, 1.0]), hessian @ np.array([0.0, 1.0]))]
		g = np.array([3.0, -4.0])
		np.testing.assert_allclose(two_loop_direction(g, pairs), -np.linalg.solve(hessian, g), rtol=1e-12)

	def test_5_callback(self):
		seen = []

		def callback(step, x, loss):
			seen.append(step)
			return step < 3

		result = lbfgs_run(Rosenbrock(), np.array([-1.2, 1.0]), LbfgsConfig(), max_steps=100, callback=callback)
		self.assertEqual([0, 1, 2, 3], seen)
		self.assertEqual(Termination.CALLBACK, result.termination)

	def test_6_config(self):
		self.assertRaises(ConfigError, LbfgsConfig.deserialize, {'c1': 0.95})
		self.assertRaises(ConfigError, LbfgsConfig.deserialize, {'history': 0})

	def assert_wolfe_steps(self, problem: Problem, steps, cfg: LbfgsConfig):
		for step in steps:
			value, grad = problem.loss_and_grad(step.x)
			new_value, new_grad = problem.loss_and_grad(step.x + step.alpha * step.direction)
			slope = grad @ step.direction
			self.assertLess(slope, 0)
			self.assertGreater(step.alpha, 0)
			self.assertLessEqual(new_value, value + cfg.c1 * step.alpha * slope + 1e-12 * max(1.0, abs(value)))
			self.assertLessEqual(abs(new_grad @ step.direction), cfg.c2 * abs(slope) * (1 + 1e-10))

	def test_7_strong_wolfe(self):
		cfg = LbfgsConfig.deserialize({'c1': 1e-3, 'c2': 0.5})
		rng = np.random.default_rng(7)
		a = rng.normal(size=(8, 8))
		problem = Quadratic(a @ a.T + np.eye(8), rng.normal(size=8))
		result = lbfgs_run(problem, np.zeros(8), cfg, max_steps=6)
		self.assertEqual(result.steps, len(result.line_search_steps))
		self.assertTrue(all(step.wolfe for step in result.line_search_steps))
		self.assertGreater(result.steps, 0)
		self.assert_wolfe_steps(problem, result.line_search_steps, cfg)

		objective = tiny_objective(0.0, d_sub=4)
		result = lbfgs_run(objective, np.zeros(4), cfg, max_steps=8)
		self.assertEqual(result.steps, len(result.line_search_steps))
		self.assertGreater(result.steps, 0)
		self.assert_wolfe_steps(objective, [step for step in result.line_search_steps if step.wolfe], cfg)

	def test_8_fallback_flagged(self):
		cfg = LbfgsConfig()
		line_search = scipy.optimize.line_search
		calls = []

		def failing_once(*args, **kwargs):
			calls.append(None)
			if len(calls) == 1:
				return (None,) * 6
			return line_search(*args, **kwargs)

		rng = np.random.default_rng(8)
		a = rng.normal(size=(6, 6))
		problem = Quadratic(a @ a.T + np.eye(6), rng.normal(size=6))
		with mock.patch('scipy.optimize.line_search', side_effect=failing_once):
			result = lbfgs_run(problem, np.zeros(6), cfg, max_steps=5)
		self.assertEqual(5, len(result.line_search_steps))
		fallback = result.line_search_steps[0]
		self.assertFalse(fallback.wolfe)
		value, grad = problem.loss_and_grad(fallback.x)
		np.testing.assert_array_equal(-grad, fallback.direction)
		self.assertLessEqual(problem.loss_and_grad(fallback.x + fallback.alpha * fallback.direction)[0], value + cfg.c1 * fallback.alpha * (grad @ fallback.direction))
		self.assertTrue(all(step.wolfe for step in result.line_search_steps[1:]))
		self.assert_wolfe_steps(problem, result.line_search_steps[1:], cfg)


if __name__ == '__main__':
	unittest.main()
