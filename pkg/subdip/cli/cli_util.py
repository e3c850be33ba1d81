import logging
from typing import Callable, List, Optional

from subdip.constants import core_constant
from subdip.harness.experiment_config import ExperimentConfig, load_config, parse_override
from subdip.utils.exception import ConfigError, NumericalFailure, IllegalArgument, IllegalArchConfig, OperatorTooLarge, DecodeError, DimensionMismatch
from subdip.utils.logger import get_logger


def setup_logging(*, quiet: bool):
	if quiet:
		get_logger().set_console_level(logging.WARNING)


def parse_overrides(texts: Optional[List[str]]) -> dict:
	return dict(parse_override(text) for text in (texts or []))


def load_cli_config(file_path: str, overrides: dict) -> ExperimentConfig:
	cfg = load_config(file_path, overrides)
	get_logger().set_debug_options(cfg.debug)
	return cfg


def guarded(action: Callable[[], int]) -> int:
	"""
	Run a command, mapping the failures that escape it to exit codes
	"""
	logger = get_logger()
	try:
		return action()
	except (ConfigError, IllegalArgument, IllegalArchConfig, OperatorTooLarge, DecodeError, DimensionMismatch, FileNotFoundError) as e:
		logger.error('Invalid configuration: {}'.format(e))
		return core_constant.EXIT_CONFIG_ERROR
	except NumericalFailure as e:
		logger.error('Numerical failure: {}'.format(e))
		return core_constant.EXIT_NUMERICAL_FAILURE
	except Exception:
		logger.exception('Unexpected error')
		return core_constant.EXIT_RUNTIME_ERROR
