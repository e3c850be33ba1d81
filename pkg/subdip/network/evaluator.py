"""
Network evaluation at a flat parameter vector, with exact Jacobian products through torch.func
"""
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import torch
import torch.func

from subdip.network.arch_config import ArchConfig
from subdip.network.param_vector import ParamVector, ParamLayout
from subdip.network.unet import UNet, layout_of
from subdip.operators.image import Image
from subdip.utils.exception import DimensionMismatch

Pullback = Callable[[np.ndarray], np.ndarray]


class NetworkInput:
	"""
	The fixed network input x0, i.e. the FBP reconstruction or the degraded image. It is fed to every input channel
	"""
	def __init__(self, image: Image):
		self.image = image

	@property
	def shape(self) -> Tuple[int, int]:
		return self.image.shape

	def tensor(self, channels: int) -> torch.Tensor:
		x = torch.from_numpy(np.array(self.image.data, dtype=np.float64))
		return x.reshape(1, 1, *self.shape).expand(1, channels, *self.shape).contiguous()


def _to_tensor(array: np.ndarray) -> torch.Tensor:
	return torch.from_numpy(np.array(array, dtype=np.float64))


class NetworkEvaluator:
	"""
	Evaluates f(x0, theta) for a fixed input. Calls are pure in theta and may run concurrently
	"""
	def __init__(self, cfg: ArchConfig, x0: NetworkInput, *, vmap_chunk_size: Optional[int] = None):
		self.cfg = cfg
		self.__module = UNet(cfg).double()
		self.__module.requires_grad_(False)
		self.__input = x0.tensor(cfg.in_channels)
		self.layout: ParamLayout = layout_of(self.__module)
		self.image_shape = x0.shape
		self.vmap_chunk_size = vmap_chunk_size

	@property
	def d_theta(self) -> int:
		return self.layout.size

	def __params(self, theta: torch.Tensor) -> Dict[str, torch.Tensor]:
		return {slot.name: theta[slot.offset:slot.end].reshape(slot.shape) for slot in self.layout.slots}

	def __apply(self, theta: torch.Tensor) -> torch.Tensor:
		return torch.func.functional_call(self.__module, self.__params(theta), (self.__input,))[0, 0]

	def __theta(self, theta: np.ndarray) -> torch.Tensor:
		theta = np.asarray(theta)
		if theta.shape != (self.d_theta,):
			raise DimensionMismatch('Expected a parameter vector of length {}, got shape {}'.format(self.d_theta, theta.shape))
		return _to_tensor(theta)

	def __check_image(self, v: np.ndarray):
		if v.shape[-2:] != self.image_shape:
			raise DimensionMismatch('Expected {}x{} image(s), got shape {}'.format(*self.image_shape, v.shape))

	def forward(self, theta: np.ndarray) -> np.ndarray:
		with torch.no_grad():
			return self.__apply(self.__theta(theta)).numpy().copy()

	def jvp(self, theta: np.ndarray, u: np.ndarray) -> np.ndarray:
		"""
		J_f u, by forward-mode differentiation
		"""
		u = np.asarray(u)
		if u.shape != (self.d_theta,):
			raise DimensionMismatch('Expected a tangent of length {}, got shape {}'.format(self.d_theta, u.shape))
		_, tangent = torch.func.jvp(self.__apply, (self.__theta(theta),), (_to_tensor(u),))
		return tangent.detach().numpy().copy()

	def forward_with_pullback(self, theta: np.ndarray) -> Tuple[np.ndarray, Pullback]:
		"""
		:return: the output image and a function mapping cotangent image(s) v to v^T J_f. The function accepts a single
			h x w image or a k x h x w stack, and may be called many times
		"""
		output, vjp_fn = torch.func.vjp(self.__apply, self.__theta(theta))

		def single(v: torch.Tensor) -> torch.Tensor:
			return vjp_fn(v)[0]

		def pullback(cotangent: np.ndarray) -> np.ndarray:
			cotangent = np.asarray(cotangent)
			self.__check_image(cotangent)
			v = _to_tensor(cotangent)
			if v.ndim == 2:
				return single(v).detach().numpy().copy()
			return torch.func.vmap(single, chunk_size=self.vmap_chunk_size)(v).detach().numpy().copy()

		return output.detach().numpy().copy(), pullback

	def vjp(self, theta: np.ndarray, v: np.ndarray) -> np.ndarray:
		return self.forward_with_pullback(theta)[1](v)

	def vjp_batch(self, theta: np.ndarray, vs: np.ndarray) -> np.ndarray:
		"""
		Rows of the result are the v_i^T J_f of the k x h x w stack vs
		"""
		return self.forward_with_pullback(theta)[1](vs)


def forward(cfg: ArchConfig, theta: ParamVector, x0: NetworkInput) -> Image:
	return Image(NetworkEvaluator(cfg, x0).forward(theta.data))


def vjp(cfg: ArchConfig, theta: ParamVector, x0: NetworkInput, v: Image) -> ParamVector:
	return theta.with_data(NetworkEvaluator(cfg, x0).vjp(theta.data, v.data))


def jvp(cfg: ArchConfig, theta: ParamVector, x0: NetworkInput, u: ParamVector) -> Image:
	return Image(NetworkEvaluator(cfg, x0).jvp(theta.data, u.data))
