"""
Filtered back-projection, the approximate pseudo-inverse of the parallel-beam operator
"""
import numpy as np
import scipy.fft

from subdip.operators.geometry import ParallelBeamGeometry
from subdip.operators.image import Image, Measurement
from subdip.utils.exception import DimensionMismatch


def ram_lak_kernel(n_detectors: int, detector_spacing: float = 1.0) -> np.ndarray:
	"""
	Band-limited ramp filter sampled in space at offsets -(n - 1) .. n - 1:
	h(0) = 1 / (4 tau^2), h(k) = -1 / (pi k tau)^2 for odd k, 0 for even k != 0
	"""
	k = np.arange(-(n_detectors - 1), n_detectors)
	kernel = np.zeros(len(k))
	kernel[k == 0] = 0.25
	odd = k % 2 == 1
	kernel[odd] = -1.0 / (np.pi * k[odd]) ** 2
	return kernel / detector_spacing ** 2


def ramp_filter(sinogram: np.ndarray, detector_spacing: float = 1.0) -> np.ndarray:
	"""
	Convolve every projection (row) with the Ram-Lak kernel, multiplying in the frequency domain after zero padding
	"""
	n = sinogram.shape[1]
	kernel = ram_lak_kernel(n, detector_spacing)
	size = scipy.fft.next_fast_len(n + len(kernel) - 1)
	spectrum = scipy.fft.rfft(sinogram, n=size, axis=1) * scipy.fft.rfft(kernel, n=size)[np.newaxis, :]
	full = scipy.fft.irfft(spectrum, n=size, axis=1)
	# keep the samples aligned with the detectors: the kernel's centre tap sits at offset n - 1
	return full[:, n - 1:2 * n - 1] * detector_spacing


def back_project(filtered: np.ndarray, geom: ParallelBeamGeometry, height: int, width: int) -> np.ndarray:
	"""
	Linear interpolation of every filtered projection at t = x cos(theta) + y sin(theta) of each pixel centre, summed over
	the angles and scaled by pi / n_angles. Pixel centres outside the detector span receive nothing from that angle
	"""
	xs = np.arange(width) - (width - 1) / 2
	ys = (height - 1) / 2 - np.arange(height)
	grid_x, grid_y = np.meshgrid(xs, ys)
	detector_index = np.arange(geom.n_detectors)
	result = np.zeros((height, width))
	for theta, row in zip(geom.angles, filtered):
		t = grid_x * np.cos(theta) + grid_y * np.sin(theta)
		position = t / geom.detector_spacing + (geom.n_detectors - 1) / 2
		result += np.interp(position.ravel(), detector_index, row, left=0.0, right=0.0).reshape(height, width)
	return result * np.pi / geom.n_angles


def fbp(geom: ParallelBeamGeometry, y: Measurement, height: int, width: int) -> Image:
	if y.size != geom.d_y:
		raise DimensionMismatch('Measurement of length {} does not match geometry {} (d_y = {})'.format(y.size, geom, geom.d_y))
	sinogram = y.data.reshape(geom.sinogram_shape)
	filtered = ramp_filter(sinogram, geom.detector_spacing)
	result = back_project(filtered, geom, height, width)
	return Image(np.nan_to_num(result, nan=0.0, posinf=0.0, neginf=0.0))
