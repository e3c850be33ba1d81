from enum import Enum, unique, auto
from typing import Callable, List, NamedTuple, Optional

import numpy as np

# invoked with (step index, iterate, loss at the iterate) for step 0 (the start point) and after every update.
# Returning False ends the run
StepCallback = Callable[[int, np.ndarray, float], bool]


class LineSearchStep(NamedTuple):
	"""
	An accepted update x -> x + alpha * direction
	"""
	x: np.ndarray
	alpha: float
	direction: np.ndarray
	wolfe: bool  # False for a steepest-descent step found by backtracking


@unique
class Termination(Enum):
	MAX_STEPS = auto()
	CALLBACK = auto()  # usually the early-stopping rule
	CONVERGED = auto()  # vanishing gradient
	LINE_SEARCH_FAILURE = auto()


class OptimResult:
	def __init__(
			self, x: np.ndarray, losses: List[float], termination: Termination, iterates: Optional[List[np.ndarray]] = None,
			line_search_steps: Optional[List[LineSearchStep]] = None
	):
		self.x = x
		self.losses = losses
		self.termination = termination
		self.iterates = iterates
		self.line_search_steps = line_search_steps

	@property
	def steps(self) -> int:
		"""
		Amount of updates that were applied
		"""
		return len(self.losses) - 1

	def __repr__(self):
		return 'OptimResult[steps={}, termination={}, final_loss={}]'.format(self.steps, self.termination.name, self.losses[-1] if self.losses else None)


class Recorder:
	"""
	Collects what the optimisers hand to the step callback
	"""
	def __init__(self, callback: Optional[StepCallback], keep_iterates: bool):
		self.callback = callback
		self.losses: List[float] = []
		self.iterates: Optional[List[np.ndarray]] = [] if keep_iterates else None

	def record(self, x: np.ndarray, loss: float) -> bool:
		step = len(self.losses)
		self.losses.append(loss)
		if self.iterates is not None:
			self.iterates.append(x.copy())
		if self.callback is None:
			return True
		return self.callback(step, x, loss) is not False

	def result(self, x: np.ndarray, termination: Termination, line_search_steps: Optional[List[LineSearchStep]] = None) -> OptimResult:
		return OptimResult(x, self.losses, termination, self.iterates, line_search_steps)
