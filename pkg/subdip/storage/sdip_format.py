"""
The SDIP binary container

Layout: 16-byte header (magic "SDIP", u32 height, u32 width, u32 reserved), little-endian float64 payload
in row-major order, then an optional UTF-8 footer
"""
import struct
from typing import Optional, Tuple

import numpy as np

from subdip.constants import core_constant
from subdip.utils import file_util
from subdip.utils.exception import DecodeError

HEADER_SIZE = struct.calcsize(core_constant.SDIP_HEADER_FORMAT)


def encode(array: np.ndarray, footer: Optional[str] = None) -> bytes:
	array = np.asarray(array, dtype=np.float64)
	if array.ndim == 1:
		array = array.reshape(1, -1)
	if array.ndim != 2:
		raise ValueError('SDIP stores 1-D or 2-D arrays only, got shape {}'.format(array.shape))
	height, width = array.shape
	header = struct.pack(core_constant.SDIP_HEADER_FORMAT, core_constant.SDIP_MAGIC, height, width, 0)
	payload = np.ascontiguousarray(array, dtype='<f8').tobytes()
	tail = footer.encode('utf8') if footer is not None else b''
	return header + payload + tail


def decode(data: bytes) -> Tuple[np.ndarray, Optional[str]]:
	if len(data) < HEADER_SIZE:
		raise DecodeError('Truncated SDIP header ({} bytes)'.format(len(data)))
	magic, height, width, _ = struct.unpack(core_constant.SDIP_HEADER_FORMAT, data[:HEADER_SIZE])
	if magic != core_constant.SDIP_MAGIC:
		raise DecodeError('Bad SDIP magic {!r}'.format(magic))
	payload_size = 8 * height * width
	end = HEADER_SIZE + payload_size
	if len(data) < end:
		raise DecodeError('Truncated SDIP payload: expected {} bytes, found {}'.format(payload_size, len(data) - HEADER_SIZE))
	array = np.frombuffer(data[HEADER_SIZE:end], dtype='<f8').astype(np.float64).reshape(height, width)
	footer = data[end:].decode('utf8') if len(data) > end else None
	return array, footer


def write(file_path: str, array: np.ndarray, footer: Optional[str] = None):
	with file_util.safe_write_binary(file_path) as file:
		file.write(encode(array, footer))


def read(file_path: str) -> Tuple[np.ndarray, Optional[str]]:
	with open(file_path, 'rb') as file:
		return decode(file.read())
