import os

from subdip.constants import core_constant
from subdip.harness.experiment_config import ExperimentConfigStorage
from subdip.utils.logger import get_logger


def generate_default_config(*, quiet: bool = False) -> int:
	storage = ExperimentConfigStorage(get_logger(), core_constant.CONFIG_FILE)
	storage.save_default()
	if not quiet:
		print('Generated default configuration file {} in {}'.format(core_constant.CONFIG_FILE, os.getcwd()))
	return core_constant.EXIT_OK
