"""
Supervised pre-training on synthetic (ground truth, network input) pairs, recording the parameter trajectory
"""
import math
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
import torch

from subdip.constants import numeric_constant
from subdip.network.arch_config import ArchConfig
from subdip.network.param_vector import ParamVector
from subdip.network.unet import UNet, init_params, layout_of
from subdip.operators.image import Image
from subdip.subspace.trajectory import TrajectoryStore
from subdip.utils.exception import NumericalFailure, IllegalArgument
from subdip.utils.logger import get_logger, DebugOption


class PretrainSample(NamedTuple):
	ground_truth: Image
	network_input: Image  # FBP of the simulated measurement, or the degraded image


class PretrainResult(NamedTuple):
	theta_pre: ParamVector
	store: TrajectoryStore
	epoch_losses: List[float]  # running mean of the training loss over every epoch


def checkpoint_stride(total_steps: int, d_pre: int) -> int:
	"""
	Sampling the initial point and then every stride-th step gives d_pre uniformly spaced snapshots whenever the run
	has enough steps
	"""
	if d_pre <= 1:
		return max(1, total_steps)
	return max(1, total_steps // (d_pre - 1))


def _flat_parameters(module: torch.nn.Module) -> np.ndarray:
	return torch.cat([p.detach().reshape(-1) for _, p in module.named_parameters()]).numpy().copy()


def _stack(images: List[Image], channels: int) -> torch.Tensor:
	batch = torch.from_numpy(np.stack([image.data for image in images]).astype(np.float64))
	return batch.unsqueeze(1).expand(-1, channels, -1, -1).contiguous()


def pretrain(
		cfg: ArchConfig, dataset: Sequence[PretrainSample], *,
		epochs: int, d_pre: int, seed: int,
		lr: float = numeric_constant.ADAM_LR_SUBDIP, batch_size: int = 1,
		stride: Optional[int] = None, store: Optional[TrajectoryStore] = None, theta_init: Optional[ParamVector] = None,
		log_interval: int = 100
) -> PretrainResult:
	"""
	Minimise the mean of ||f(x_dagger, theta) - x||^2 over the dataset with Adam

	:param d_pre: The maximum amount of snapshots to keep. The initial point is always the first one
	:param stride: Optimisation steps between two snapshots. By default it's derived from d_pre and the total step count
	:param store: Where snapshots go. A fresh in-memory store is used if not given
	:raise NumericalFailure: if the training loss becomes non-finite
	"""
	if epochs < 0:
		raise IllegalArgument('epochs should be non-negative, found {}'.format(epochs))
	if batch_size < 1:
		raise IllegalArgument('batch_size should be at least 1, found {}'.format(batch_size))
	logger = get_logger()
	module = UNet(cfg).double()
	layout = layout_of(module)
	theta = theta_init if theta_init is not None else init_params(cfg, seed)
	module.load_state_dict({name: torch.from_numpy(array.copy()) for name, array in theta.unflatten().items()})

	steps_per_epoch = int(math.ceil(len(dataset) / batch_size)) if len(dataset) > 0 else 0
	total_steps = epochs * steps_per_epoch
	if stride is None:
		stride = checkpoint_stride(total_steps, d_pre)
	if store is None:
		store = TrajectoryStore(layout, stride=stride)
	store.stride = stride
	store.append(ParamVector(_flat_parameters(module), layout))

	optimizer = torch.optim.Adam(module.parameters(), lr=lr, betas=numeric_constant.ADAM_BETAS, eps=numeric_constant.ADAM_EPS)
	rng = np.random.default_rng(seed)
	epoch_losses = []
	step = 0
	for epoch in range(epochs):
		order = rng.permutation(len(dataset))
		loss_sum = 0.0
		for start in range(0, len(order), batch_size):
			batch = [dataset[i] for i in order[start:start + batch_size]]
			inputs = _stack([sample.network_input for sample in batch], cfg.in_channels)
			targets = _stack([sample.ground_truth for sample in batch], 1)
			optimizer.zero_grad()
			loss = ((module(inputs) - targets) ** 2).sum(dim=(1, 2, 3)).mean()
			loss_value = loss.item()
			if not math.isfinite(loss_value):
				raise NumericalFailure('Non-finite pre-training loss', {
					'epoch': epoch, 'step': step, 'loss': loss_value, 'parameter_norm': float(np.linalg.norm(_flat_parameters(module)))
				})
			loss.backward()
			optimizer.step()
			step += 1
			loss_sum += loss_value
			if step % stride == 0 and len(store) < d_pre:
				store.append(ParamVector(_flat_parameters(module), layout))
			if step % log_interval == 0:
				logger.debug('Pre-training step {}/{}: loss {:.6g}'.format(step, total_steps, loss_value), option=DebugOption.SUBSPACE)
		epoch_losses.append(loss_sum / max(1, steps_per_epoch))
		logger.info('Pre-training epoch {}/{} done, mean loss {:.6g}'.format(epoch + 1, epochs, epoch_losses[-1]))

	theta_pre = ParamVector(_flat_parameters(module), layout)
	logger.info('Pre-training finished after {} steps with {} checkpoints (stride {})'.format(step, len(store), stride))
	return PretrainResult(theta_pre, store, epoch_losses)


def build_dataset(ground_truths: Sequence[Image], network_inputs: Sequence[Image]) -> List[PretrainSample]:
	if len(ground_truths) != len(network_inputs):
		raise IllegalArgument('{} ground truths but {} network inputs'.format(len(ground_truths), len(network_inputs)))
	return [PretrainSample(gt, x) for gt, x in zip(ground_truths, network_inputs)]

