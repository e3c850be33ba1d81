"""
Anisotropic total variation and a subgradient of it
"""
from typing import Union

import numpy as np

from subdip.operators.image import Image

ImageLike = Union[Image, np.ndarray]


def _array(x: ImageLike) -> np.ndarray:
	return x.data if isinstance(x, Image) else np.asarray(x, dtype=np.float64)


def tv_value(array: np.ndarray) -> float:
	return float(np.abs(np.diff(array, axis=0)).sum() + np.abs(np.diff(array, axis=1)).sum())


def tv_subgradient_array(array: np.ndarray) -> np.ndarray:
	result = np.zeros(array.shape)
	# sign(0) = 0
	vertical = np.sign(array[:-1, :] - array[1:, :])
	result[:-1, :] += vertical
	result[1:, :] -= vertical
	horizontal = np.sign(array[:, :-1] - array[:, 1:])
	result[:, :-1] += horizontal
	result[:, 1:] -= horizontal
	return result


def tv(x: ImageLike) -> float:
	"""
	Sum of absolute differences between vertically and horizontally adjacent pixels, without wraparound
	"""
	return tv_value(_array(x))


def tv_subgradient(x: ImageLike) -> Image:
	return Image(tv_subgradient_array(_array(x)))
