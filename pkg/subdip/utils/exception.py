"""
Some customize exceptions
"""
from typing import Optional, Dict, Any


# The experiment configuration is invalid or inconsistent
class ConfigError(ValueError):
	pass


# Array dimensions do not match the operator / network / subspace they are used with
class DimensionMismatch(ValueError):
	pass


# The operator would not fit the configured memory budget
class OperatorTooLarge(MemoryError):
	pass


# A parameter is out of its valid range
class IllegalArgument(ValueError):
	pass


class IllegalArchConfig(ValueError):
	pass


# Malformed SDIP / PGM input
class DecodeError(ValueError):
	pass


class NumericalFailure(RuntimeError):
	"""
	A non-finite value or an unrecoverable factorisation error showed up during a computation

	The diagnostics dict carries whatever the raiser knew about the state, e.g. parameter norms or the optimiser state
	"""
	def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
		super().__init__(message)
		self.diagnostics = diagnostics if diagnostics is not None else {}

	def __str__(self):
		text = super().__str__()
		if len(self.diagnostics) > 0:
			text += ' ({})'.format(', '.join('{}={}'.format(k, v) for k, v in self.diagnostics.items()))
		return text
