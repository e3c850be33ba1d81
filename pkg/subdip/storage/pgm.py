"""
Binary (P5) PGM reading and 16-bit writing for grayscale images in [0, 1]
"""
from typing import Tuple

import numpy as np

from subdip.utils import file_util
from subdip.utils.exception import DecodeError

MAX_VALUE_16 = 65535


def encode(array: np.ndarray) -> bytes:
	array = np.asarray(array, dtype=np.float64)
	if array.ndim != 2:
		raise ValueError('PGM stores 2-D arrays only, got shape {}'.format(array.shape))
	height, width = array.shape
	levels = np.round(np.clip(np.nan_to_num(array), 0.0, 1.0) * MAX_VALUE_16).astype('>u2')
	header = 'P5\n{} {}\n{}\n'.format(width, height, MAX_VALUE_16).encode('ascii')
	return header + levels.tobytes()


def _header_token(data: bytes, position: int) -> Tuple[bytes, int]:
	"""
	The next whitespace separated header token after position, skipping # comments up to their line end
	"""
	size = len(data)
	while position < size:
		if data[position:position + 1].isspace():
			position += 1
		elif data[position:position + 1] == b'#':
			line_end = data.find(b'\n', position)
			position = size if line_end == -1 else line_end + 1
		else:
			break
	start = position
	while position < size and not data[position:position + 1].isspace():
		position += 1
	if start == position:
		raise DecodeError('Truncated PGM header')
	return data[start:position], position


def decode(data: bytes) -> np.ndarray:
	tokens = []
	position = 0
	while len(tokens) < 4:
		token, position = _header_token(data, position)
		tokens.append(token)
	if tokens[0] != b'P5':
		raise DecodeError('Only binary PGM (P5) is supported, found {!r}'.format(tokens[0]))
	try:
		width, height, max_value = int(tokens[1]), int(tokens[2]), int(tokens[3])
	except ValueError:
		raise DecodeError('Malformed PGM header {}'.format(tokens)) from None
	if not 0 < max_value <= MAX_VALUE_16:
		raise DecodeError('Bad PGM max value {}'.format(max_value))
	position += 1  # single whitespace after max value
	dtype = np.dtype('u1') if max_value < 256 else np.dtype('>u2')
	count = width * height
	payload = data[position:position + count * dtype.itemsize]
	if len(payload) < count * dtype.itemsize:
		raise DecodeError('Truncated PGM payload')
	levels = np.frombuffer(payload, dtype=dtype).reshape(height, width)
	return levels.astype(np.float64) / max_value


def write(file_path: str, array: np.ndarray):
	with file_util.safe_write_binary(file_path) as file:
		file.write(encode(array))


def read(file_path: str) -> np.ndarray:
	with open(file_path, 'rb') as file:
		return decode(file.read())
