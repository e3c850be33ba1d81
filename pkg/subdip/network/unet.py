"""
The encoder / decoder network and its deterministic initialisation
"""
import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from subdip.network.arch_config import ArchConfig
from subdip.network.param_vector import ParamLayout, ParamVector


class UNet(nn.Module):
	"""
	Fully convolutional U-Net without normalisation or stochastic layers, so the output is a deterministic
	function of (parameters, input)
	"""
	def __init__(self, cfg: ArchConfig):
		super().__init__()
		cfg.validate()
		self.cfg = cfg
		k = cfg.kernel_size
		pad = k // 2
		ch = cfg.channels
		self.down = nn.ModuleList()
		for level in range(cfg.scales):
			c_in = cfg.in_channels if level == 0 else ch[level - 1]
			self.down.append(nn.ModuleDict({
				'conv_in': nn.Conv2d(c_in, ch[level], k, stride=1 if level == 0 else 2, padding=pad),
				'conv_out': nn.Conv2d(ch[level], ch[level], k, padding=pad),
			}))
		# coarse to fine, the order the decoder runs in
		self.up = nn.ModuleDict()
		for level in range(cfg.scales - 2, -1, -1):
			block = nn.ModuleDict()
			extra = 0
			if cfg.skip[level]:
				block['skip'] = nn.Conv2d(ch[level], cfg.skip_channels, 1)
				extra = cfg.skip_channels
			block['conv_in'] = nn.Conv2d(ch[level + 1] + extra, ch[level], k, padding=pad)
			block['conv_out'] = nn.Conv2d(ch[level], ch[level], k, padding=pad)
			self.up[str(level)] = block
		self.head = nn.Conv2d(ch[0], cfg.out_channels, 1)

	def _act(self, x: torch.Tensor) -> torch.Tensor:
		if self.cfg.activation == 'relu':
			return F.relu(x)
		return F.leaky_relu(x, self.cfg.negative_slope)

	def forward(self, x: torch.Tensor) -> torch.Tensor:
		features = []
		h = x
		for block in self.down:
			h = self._act(block['conv_in'](h))
			h = self._act(block['conv_out'](h))
			features.append(h)
		for level in range(self.cfg.scales - 2, -1, -1):
			block = self.up[str(level)]
			h = F.interpolate(h, size=features[level].shape[-2:], mode='bilinear', align_corners=False)
			if 'skip' in block:
				h = torch.cat([h, self._act(block['skip'](features[level]))], dim=1)
			h = self._act(block['conv_in'](h))
			h = self._act(block['conv_out'](h))
		h = self.head(h)
		if self.cfg.output_activation == 'sigmoid':
			h = torch.sigmoid(h)
		return h


def layout_of(module: nn.Module) -> ParamLayout:
	return ParamLayout.from_shapes([(name, tuple(p.shape)) for name, p in module.named_parameters()])


def activation_gain(cfg: ArchConfig) -> float:
	if cfg.activation == 'relu':
		return nn.init.calculate_gain('relu')
	return nn.init.calculate_gain('leaky_relu', cfg.negative_slope)


def init_params(cfg: ArchConfig, seed: int) -> ParamVector:
	"""
	Fan-in scaled Gaussian weights (He initialisation) and zero biases, drawn from a numpy generator so the result is
	bitwise reproducible for a seed
	"""
	layout = layout_of(UNet(cfg))
	rng = np.random.default_rng(seed)
	gain = activation_gain(cfg)
	data = np.zeros(layout.size)
	for slot in layout.slots:
		if slot.name.endswith('.weight'):
			fan_in = int(np.prod(slot.shape[1:]))
			data[slot.offset:slot.end] = rng.normal(0.0, gain / np.sqrt(fan_in), size=slot.size)
	return ParamVector(data, layout)


def count_parameters(cfg: ArchConfig) -> int:
	return layout_of(UNet(cfg)).size
