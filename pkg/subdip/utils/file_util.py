import contextlib
import hashlib
import os
from typing import Callable, ContextManager, IO, List


def list_file(directory: str, predicate: Callable[[str], bool] = lambda file_path: True) -> List[str]:
	candidates = [os.path.join(directory, file) for file in sorted(os.listdir(directory))]
	return [path for path in candidates if os.path.isfile(path) and predicate(path)]


def list_file_with_suffix(directory: str, suffix: str) -> List[str]:
	return list_file(directory, lambda file_path: file_path.lower().endswith(suffix.lower()))


def touch_directory(directory_path: str):
	if len(directory_path) > 0 and not os.path.isdir(directory_path):
		os.makedirs(directory_path)


@contextlib.contextmanager
def safe_write(target_file_path: str, *, encoding: str) -> ContextManager[IO[str]]:
	temp_file_path = target_file_path + '.tmp'
	with open(temp_file_path, 'w', encoding=encoding, newline='') as file:
		yield file
	os.replace(temp_file_path, target_file_path)


@contextlib.contextmanager
def safe_write_binary(target_file_path: str) -> ContextManager[IO[bytes]]:
	temp_file_path = target_file_path + '.tmp'
	with open(temp_file_path, 'wb') as file:
		yield file
	os.replace(temp_file_path, target_file_path)


def sha256_of_text(text: str) -> str:
	return hashlib.sha256(text.encode('utf8')).hexdigest()
