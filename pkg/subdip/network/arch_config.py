from typing import List, Literal, Any

from subdip.utils.exception import IllegalArchConfig
from subdip.utils.serializer import Serializable


class ArchConfig(Serializable):
	"""
	Layout of the encoder / decoder network

	Level 0 works at full resolution, every further level halves it with a stride-2 convolution.
	``skip[l]`` adds a 1x1-convolved copy of encoder level l to the decoder input at level l. The entry of the coarsest
	level is unused
	"""
	scales: int = 3
	channels: List[int] = [16, 16, 16]
	skip: List[bool] = [True, True, False]
	skip_channels: int = 4
	kernel_size: int = 3
	activation: Literal['leaky_relu', 'relu'] = 'leaky_relu'
	negative_slope: float = 0.01
	output_activation: Literal['sigmoid', 'identity'] = 'sigmoid'
	in_channels: int = 1
	out_channels: int = 1

	def validate_attribute(self, attr_name: str, attr_value: Any, **kwargs):
		if attr_name in ('scales', 'skip_channels', 'kernel_size', 'in_channels') and attr_value < 1:
			raise IllegalArchConfig('{} should be at least 1, found {}'.format(attr_name, attr_value))
		if attr_name == 'channels' and any(c < 1 for c in attr_value):
			raise IllegalArchConfig('All channel counts should be at least 1, found {}'.format(attr_value))

	def on_deserialization(self, **kwargs):
		self.validate()

	def validate(self):
		"""
		:raise IllegalArchConfig: if the config cannot describe a network
		"""
		if self.scales < 1:
			raise IllegalArchConfig('The network needs at least one scale, found {}'.format(self.scales))
		if len(self.channels) != self.scales:
			raise IllegalArchConfig('Expected {} channel counts, found {}'.format(self.scales, len(self.channels)))
		if len(self.skip) != self.scales:
			raise IllegalArchConfig('Expected {} skip flags, found {}'.format(self.scales, len(self.skip)))
		if any(c < 1 for c in self.channels) or self.skip_channels < 1 or self.in_channels < 1:
			raise IllegalArchConfig('All channel counts should be at least 1')
		if self.kernel_size < 1 or self.kernel_size % 2 == 0:
			raise IllegalArchConfig('Kernel size should be a positive odd number, found {}'.format(self.kernel_size))
		if self.out_channels != 1:
			raise IllegalArchConfig('The network outputs a grayscale image, out_channels should be 1, found {}'.format(self.out_channels))
		if self.negative_slope < 0:
			raise IllegalArchConfig('negative_slope should be non-negative, found {}'.format(self.negative_slope))

	def parameter_count(self) -> int:
		"""
		Closed-form d_theta of the network this config describes
		"""
		k2 = self.kernel_size ** 2

		def conv(c_in: int, c_out: int, k_sq: int = k2) -> int:
			return c_in * c_out * k_sq + c_out

		ch = self.channels
		total = conv(self.in_channels, ch[0]) + conv(ch[0], ch[0])
		for level in range(1, self.scales):
			total += conv(ch[level - 1], ch[level]) + conv(ch[level], ch[level])
		for level in range(self.scales - 2, -1, -1):
			extra = 0
			if self.skip[level]:
				total += conv(ch[level], self.skip_channels, 1)
				extra = self.skip_channels
			total += conv(ch[level + 1] + extra, ch[level]) + conv(ch[level], ch[level])
		return total + conv(ch[0], self.out_channels, 1)
