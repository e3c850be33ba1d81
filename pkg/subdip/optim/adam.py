from typing import Optional

import numpy as np
import torch

from subdip.constants import numeric_constant
from subdip.objective.problem import Problem
from subdip.optim.optim_result import OptimResult, Recorder, StepCallback, Termination
from subdip.utils.exception import IllegalArgument
from subdip.utils.logger import get_logger, DebugOption


def adam_run(
		problem: Problem, x0: np.ndarray, lr: float, *, max_steps: int,
		callback: Optional[StepCallback] = None, keep_iterates: bool = False, log_interval: int = 100
) -> OptimResult:
	"""
	Plain Adam (betas 0.9 / 0.999, eps 1e-8) driven by the problem's gradient, over coefficients or over all
	network parameters alike
	"""
	if not lr > 0:
		raise IllegalArgument('Learning rate should be positive, found {}'.format(lr))
	logger = get_logger()
	recorder = Recorder(callback, keep_iterates)
	parameter = torch.nn.Parameter(torch.from_numpy(np.array(x0, dtype=np.float64)))
	optimizer = torch.optim.Adam([parameter], lr=lr, betas=numeric_constant.ADAM_BETAS, eps=numeric_constant.ADAM_EPS)
	x = parameter.detach().numpy().copy()
	value, grad = problem.loss_and_grad(x)
	step = 0
	termination = Termination.MAX_STEPS
	while True:
		if not recorder.record(x, value):
			termination = Termination.CALLBACK
			break
		if step >= max_steps:
			break
		parameter.grad = torch.from_numpy(np.array(grad, dtype=np.float64))
		optimizer.step()
		x = parameter.detach().numpy().copy()
		value, grad = problem.loss_and_grad(x)
		step += 1
		if step % log_interval == 0:
			logger.debug('Adam step {}: loss {:.6g}'.format(step, value), option=DebugOption.OPTIM)
	return recorder.result(x, termination)
