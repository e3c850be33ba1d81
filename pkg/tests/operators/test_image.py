import os
import tempfile
import unittest

import numpy as np

from subdip.operators.image import Image, Measurement
from subdip.storage import sdip_format, pgm
from subdip.utils.exception import DecodeError, DimensionMismatch


class MyTestCase(unittest.TestCase):
	def test_0_construction(self):
		self.assertRaises(ValueError, Image, np.array([[0, np.nan]]))
		self.assertRaises(DimensionMismatch, Image, np.zeros(4))
		self.assertRaises(DimensionMismatch, Image.from_vector, np.zeros(5), 2, 2)
		self.assertRaises(DimensionMismatch, Measurement, np.zeros(6), (4, 2))
		image = Image.from_vector(np.arange(6), 2, 3)
		self.assertEqual((2, 3), image.shape)
		self.assertEqual(5, image.data[1, 2])

	def test_1_sdip_file(self):
		rng = np.random.default_rng(5)
		image = Image(rng.normal(size=(7, 3)))
		sinogram = Measurement(rng.normal(size=12), shape=(3, 4))
		with tempfile.TemporaryDirectory() as directory:
			image.save_sdip(os.path.join(directory, 'x.sdip'))
			sinogram.save_sdip(os.path.join(directory, 'y.sdip'))
			self.assertEqual(image, Image.load_sdip(os.path.join(directory, 'x.sdip')))
			loaded = Measurement.load_sdip(os.path.join(directory, 'y.sdip'))
			self.assertEqual(sinogram, loaded)
			self.assertEqual((3, 4), loaded.shape)

	def test_2_sdip_layout(self):
		data = sdip_format.encode(np.array([[1.0, 2.0]]), footer='hi')
		self.assertEqual(b'SDIP', data[:4])
		self.assertEqual((1).to_bytes(4, 'little'), data[4:8])
		self.assertEqual((2).to_bytes(4, 'little'), data[8:12])
		self.assertEqual(16 + 16 + 2, len(data))
		array, footer = sdip_format.decode(data)
		self.assertEqual('hi', footer)
		self.assertRaises(DecodeError, sdip_format.decode, b'XXXX' + data[4:])
		self.assertRaises(DecodeError, sdip_format.decode, data[:20])

	def test_3_pgm(self):
		array = np.array([[0.0, 0.5], [1.0, 0.25]])
		data = pgm.encode(array)
		self.assertTrue(data.startswith(b'P5\n2 2\n65535\n'))
		np.testing.assert_allclose(pgm.decode(data), array, atol=1 / 65535)
		eight_bit = b'P5\n# comment\n2 1\n255\n' + bytes([0, 255])
		np.testing.assert_allclose(pgm.decode(eight_bit), [[0.0, 1.0]])
		self.assertRaises(DecodeError, pgm.decode, b'P2\n1 1\n255\n0')

	def test_4_pgm_header(self):
		self.assertRaises(DecodeError, pgm.decode, b'P5' + b' ' * 64)
		self.assertRaises(DecodeError, pgm.decode, b'P5\n' + b'# \n' * 64)
		self.assertRaises(DecodeError, pgm.decode, b'P5\n2 1\n# no max value')
		np.testing.assert_allclose(pgm.decode(b'P5 #a\n#b\n1\t1 255\n' + bytes([51])), [[0.2]])


if __name__ == '__main__':
	unittest.main()
