import numpy as np

from subdip.utils.exception import IllegalArgument


class ParallelBeamGeometry:
	"""
	2-D parallel-beam scan geometry

	Angles are theta_k = pi * k / n_angles for k = 0 .. n_angles - 1, and detector k sits at
	t_k = (k - (n_detectors - 1) / 2) * detector_spacing, measured along the normal (cos theta, sin theta) of the rays.
	Image coordinates are in pixels, centred on the image centre, x pointing right and y pointing up
	"""
	def __init__(self, n_angles: int, n_detectors: int, detector_spacing: float = 1.0):
		if n_angles < 1:
			raise IllegalArgument('n_angles should be at least 1, found {}'.format(n_angles))
		if n_detectors < 1:
			raise IllegalArgument('n_detectors should be at least 1, found {}'.format(n_detectors))
		if not detector_spacing > 0:
			raise IllegalArgument('detector_spacing should be positive, found {}'.format(detector_spacing))
		self.n_angles = int(n_angles)
		self.n_detectors = int(n_detectors)
		self.detector_spacing = float(detector_spacing)

	@property
	def angles(self) -> np.ndarray:
		return np.pi * np.arange(self.n_angles) / self.n_angles

	@property
	def detector_positions(self) -> np.ndarray:
		return (np.arange(self.n_detectors) - (self.n_detectors - 1) / 2) * self.detector_spacing

	@property
	def d_y(self) -> int:
		return self.n_angles * self.n_detectors

	@property
	def sinogram_shape(self):
		return self.n_angles, self.n_detectors

	def __eq__(self, other):
		return isinstance(other, ParallelBeamGeometry) and \
			(self.n_angles, self.n_detectors, self.detector_spacing) == (other.n_angles, other.n_detectors, other.detector_spacing)

	def __repr__(self):
		return 'ParallelBeamGeometry[n_angles={}, n_detectors={}, detector_spacing={}]'.format(self.n_angles, self.n_detectors, self.detector_spacing)
