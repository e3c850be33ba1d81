"""
Synthetic ground-truth images
"""
from typing import Iterator, List, Literal, Optional, Any

import numpy as np

from subdip.operators.image import Image
from subdip.utils.exception import ConfigError
from subdip.utils.serializer import Serializable

ELLIPSE_COUNT_RANGE = (3, 8)
REGION_COUNT_RANGE = (4, 10)


class PhantomSpec(Serializable):
	kind: Literal['ellipses', 'piecewise', 'disc'] = 'piecewise'
	# amount of ellipses, or of flat regions including the background. Random within the kind's range if null
	shape_count: Optional[int] = None
	size: int = 64
	intensity_low: float = 0.1
	intensity_high: float = 1.0
	seed: int = 0

	def validate_attribute(self, attr_name: str, attr_value: Any, **kwargs):
		key_path = kwargs.get('key_path', attr_name)
		if attr_name == 'size' and attr_value < 1:
			raise ConfigError('{} should be at least 1, found {}'.format(key_path, attr_value))
		if attr_name == 'shape_count' and attr_value is not None and attr_value < 0:
			raise ConfigError('{} should be non-negative, found {}'.format(key_path, attr_value))
		if attr_name in ('intensity_low', 'intensity_high') and not 0 <= attr_value <= 1:
			raise ConfigError('{} should be in [0, 1], found {}'.format(key_path, attr_value))

	def on_deserialization(self, **kwargs):
		if self.intensity_low > self.intensity_high:
			raise ConfigError('intensity_low {} exceeds intensity_high {}'.format(self.intensity_low, self.intensity_high))


def _grid(size: int):
	"""
	Pixel-centre coordinates in [-1, 1], x to the right and y upwards
	"""
	centres = (np.arange(size) + 0.5) / size * 2 - 1
	return np.meshgrid(centres, -centres)


def _ellipse_mask(xx: np.ndarray, yy: np.ndarray, rng: np.random.Generator) -> np.ndarray:
	cx, cy = rng.uniform(-0.6, 0.6, size=2)
	a, b = rng.uniform(0.1, 0.5, size=2)
	phi = rng.uniform(0, np.pi)
	dx, dy = xx - cx, yy - cy
	u = dx * np.cos(phi) + dy * np.sin(phi)
	v = -dx * np.sin(phi) + dy * np.cos(phi)
	return (u / a) ** 2 + (v / b) ** 2 <= 1


def _convex_polygon_mask(xx: np.ndarray, yy: np.ndarray, rng: np.random.Generator) -> np.ndarray:
	# vertices on an ellipse at sorted angles are in counter-clockwise convex position
	n_vertices = int(rng.integers(3, 8))
	angles = np.sort(rng.uniform(0, 2 * np.pi, size=n_vertices))
	cx, cy = rng.uniform(-0.6, 0.6, size=2)
	a, b = rng.uniform(0.15, 0.6, size=2)
	phi = rng.uniform(0, np.pi)
	px = a * np.cos(angles)
	py = b * np.sin(angles)
	vx = cx + px * np.cos(phi) - py * np.sin(phi)
	vy = cy + px * np.sin(phi) + py * np.cos(phi)
	inside = np.ones(xx.shape, dtype=bool)
	for i in range(n_vertices):
		j = (i + 1) % n_vertices
		inside &= (vx[j] - vx[i]) * (yy - vy[i]) - (vy[j] - vy[i]) * (xx - vx[i]) >= 0
	return inside


def _disc_mask(xx: np.ndarray, yy: np.ndarray, rng: np.random.Generator) -> np.ndarray:
	cx, cy = rng.uniform(-0.6, 0.6, size=2)
	radius = rng.uniform(0.1, 0.4)
	return (xx - cx) ** 2 + (yy - cy) ** 2 <= radius ** 2


def generate_ellipses(spec: PhantomSpec) -> Iterator[Image]:
	"""
	Endless stream of sums of filled random ellipses, clipped to [0, 1]
	"""
	rng = np.random.default_rng(spec.seed)
	xx, yy = _grid(spec.size)
	while True:
		count = spec.shape_count if spec.shape_count is not None else int(rng.integers(ELLIPSE_COUNT_RANGE[0], ELLIPSE_COUNT_RANGE[1] + 1))
		image = np.zeros((spec.size, spec.size))
		for _ in range(count):
			image[_ellipse_mask(xx, yy, rng)] += rng.uniform(spec.intensity_low, spec.intensity_high)
		yield Image(np.clip(image, 0, 1))


def generate_piecewise(spec: PhantomSpec) -> Iterator[Image]:
	"""
	Endless stream of piecewise-constant cartoons: a flat background region overwritten by flat convex polygons and
	discs with sharp borders
	"""
	rng = np.random.default_rng(spec.seed)
	xx, yy = _grid(spec.size)
	while True:
		regions = spec.shape_count if spec.shape_count is not None else int(rng.integers(REGION_COUNT_RANGE[0], REGION_COUNT_RANGE[1] + 1))
		image = np.zeros((spec.size, spec.size))
		if regions > 0:
			image[:] = rng.uniform(spec.intensity_low, spec.intensity_high)
		for _ in range(regions - 1):
			mask = _convex_polygon_mask(xx, yy, rng) if rng.uniform() < 0.5 else _disc_mask(xx, yy, rng)
			image[mask] = rng.uniform(spec.intensity_low, spec.intensity_high)
		yield Image(image)


def generate_disc(spec: PhantomSpec) -> Iterator[Image]:
	"""
	A centred disc of radius 0.6 at the upper intensity, repeated
	"""
	xx, yy = _grid(spec.size)
	image = np.where(xx ** 2 + yy ** 2 <= 0.36, spec.intensity_high, 0.0)
	while True:
		yield Image(image)


def generate(spec: PhantomSpec, count: int) -> List[Image]:
	generators = {
		'ellipses': generate_ellipses,
		'piecewise': generate_piecewise,
		'disc': generate_disc,
	}
	stream = generators[spec.kind](spec)
	return [next(stream) for _ in range(count)]
