"""
The experiment configuration tree and its yaml loader
"""
import os
from logging import Logger
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from ruamel.yaml import YAML

from subdip.constants import core_constant, numeric_constant
from subdip.harness.phantoms import PhantomSpec
from subdip.network.arch_config import ArchConfig
from subdip.objective.loss import ObjectiveConfig
from subdip.optim.lbfgs import LbfgsConfig
from subdip.optim.ngd import NgdConfig
from subdip.optim.stopping import StopConfig
from subdip.utils.exception import ConfigError, IllegalArchConfig
from subdip.utils.logger import get_logger, DebugOption
from subdip.utils.serializer import Serializable
from subdip.utils.yaml_data_storage import YamlDataStorage


class GeometryConfig(Serializable):
	n_angles: int = 30
	n_detectors: int = 95
	detector_spacing: float = 1.0

	def validate_attribute(self, attr_name: str, attr_value: Any, **kwargs):
		key_path = kwargs.get('key_path', attr_name)
		if attr_name in ('n_angles', 'n_detectors') and attr_value < 1:
			raise ConfigError('{} should be at least 1, found {}'.format(key_path, attr_value))
		if attr_name == 'detector_spacing' and not attr_value > 0:
			raise ConfigError('{} should be positive, found {}'.format(key_path, attr_value))


class PretrainingConfig(Serializable):
	dataset_size: int = 2000
	epochs: int = 5
	lr: float = numeric_constant.ADAM_LR_SUBDIP
	batch_size: int = 1
	phantom: PhantomSpec = PhantomSpec(kind='ellipses', seed=1000)
	# a directory of PGM ground truths used instead of generated phantoms
	image_directory: Optional[str] = None
	# fixed: simulate every sample at the task's own noise level and blur width. random: draw a noise level from
	# noise_p_range for each sample, or for deblurring a blur width from blur_kappa_range at noise level random_blur_noise_p
	degradation: Literal['fixed', 'random'] = 'fixed'
	noise_p_range: List[float] = [0.05, 0.5]
	blur_kappa_range: List[float] = [0.4, 2.0]
	random_blur_noise_p: float = 0.05
	seed: int = 0
	# where theta_pre and the trajectory are kept. Default: <output_directory>/pretrain
	directory: Optional[str] = None

	def validate_attribute(self, attr_name: str, attr_value: Any, **kwargs):
		key_path = kwargs.get('key_path', attr_name)
		if attr_name in ('dataset_size', 'epochs') and attr_value < 0:
			raise ConfigError('{} should be non-negative, found {}'.format(key_path, attr_value))
		if attr_name == 'batch_size' and attr_value < 1:
			raise ConfigError('{} should be at least 1, found {}'.format(key_path, attr_value))
		if attr_name == 'lr' and not attr_value > 0:
			raise ConfigError('{} should be positive, found {}'.format(key_path, attr_value))
		if attr_name == 'image_directory' and attr_value is not None and not os.path.isdir(attr_value):
			raise ConfigError('{} "{}" is not a directory'.format(key_path, attr_value))
		if attr_name in ('noise_p_range', 'blur_kappa_range') and not (len(attr_value) == 2 and 0 < attr_value[0] <= attr_value[1]):
			raise ConfigError('{} should be a [low, high] pair with 0 < low <= high, found {}'.format(key_path, attr_value))
		if attr_name == 'random_blur_noise_p' and not attr_value >= 0:
			raise ConfigError('{} should be non-negative, found {}'.format(key_path, attr_value))


class SubspaceConfig(Serializable):
	d_pre: int = 500
	d_sub: int = 256
	d_lev_fraction: float = 0.5
	basis: Literal['svd', 'incremental', 'random', 'random_orthonormal'] = 'svd'
	incremental_buffer: int = 64
	random_seed: int = 0
	# where the extracted subspace is kept. Default: <output_directory>/subspace_<basis>
	directory: Optional[str] = None

	def validate_attribute(self, attr_name: str, attr_value: Any, **kwargs):
		key_path = kwargs.get('key_path', attr_name)
		if attr_name in ('d_pre', 'd_sub', 'incremental_buffer') and attr_value < 1:
			raise ConfigError('{} should be at least 1, found {}'.format(key_path, attr_value))
		if attr_name == 'd_lev_fraction' and not 0 < attr_value <= 1:
			raise ConfigError('{} should be in (0, 1], found {}'.format(key_path, attr_value))

	def on_deserialization(self, **kwargs):
		if self.basis in ('svd', 'incremental') and self.d_sub > self.d_pre:
			raise ConfigError('d_sub {} exceeds the {} pre-training checkpoints'.format(self.d_sub, self.d_pre))


class OptimizerConfig(Serializable):
	kind: Literal['ngd', 'lbfgs', 'adam'] = 'ngd'
	max_steps: int = 1000
	# null picks the default of the method
	adam_lr: Optional[float] = None
	ngd: NgdConfig = NgdConfig()
	lbfgs: LbfgsConfig = LbfgsConfig()

	def validate_attribute(self, attr_name: str, attr_value: Any, **kwargs):
		key_path = kwargs.get('key_path', attr_name)
		if attr_name == 'max_steps' and attr_value < 0:
			raise ConfigError('{} should be non-negative, found {}'.format(key_path, attr_value))
		if attr_name == 'adam_lr' and attr_value is not None and not attr_value > 0:
			raise ConfigError('{} should be positive, found {}'.format(key_path, attr_value))


class ExperimentConfig(Serializable):
	name: str = 'experiment'
	task: Literal['ct', 'denoise', 'deblur'] = 'ct'
	geometry: GeometryConfig = GeometryConfig()
	blur_kappa: float = 1.0
	noise_p: float = 0.05
	phantom: PhantomSpec = PhantomSpec()
	# a PGM ground truth used instead of the generated phantom
	ground_truth_file: Optional[str] = None
	network: ArchConfig = ArchConfig()
	pretraining: PretrainingConfig = PretrainingConfig()
	subspace: SubspaceConfig = SubspaceConfig()
	method: Literal['sub_dip', 'edip', 'dip'] = 'sub_dip'
	optimizer: OptimizerConfig = OptimizerConfig()
	objective: ObjectiveConfig = ObjectiveConfig()
	stop: StopConfig = StopConfig()
	seed: int = 0
	output_directory: str = 'runs/experiment'
	operator_entry_budget: int = core_constant.DEFAULT_OPERATOR_ENTRY_BUDGET
	operator_workers: int = 1
	save_images: bool = True
	debug: Dict[str, bool] = {option.name.lower(): False for option in DebugOption}

	def validate_attribute(self, attr_name: str, attr_value: Any, **kwargs):
		key_path = kwargs.get('key_path', attr_name)
		if attr_name == 'blur_kappa' and not attr_value > 0:
			raise ConfigError('{} should be positive, found {}'.format(key_path, attr_value))
		if attr_name == 'noise_p' and not attr_value >= 0:
			raise ConfigError('{} should be non-negative, found {}'.format(key_path, attr_value))
		if attr_name == 'ground_truth_file' and attr_value is not None and not os.path.isfile(attr_value):
			raise ConfigError('{} "{}" does not exist'.format(key_path, attr_value))
		if attr_name in ('operator_entry_budget', 'operator_workers') and attr_value < 1:
			raise ConfigError('{} should be at least 1, found {}'.format(key_path, attr_value))
		if attr_name == 'debug':
			for key in attr_value.keys():
				if key.upper() not in DebugOption.__members__:
					raise ConfigError('Unknown debug option "{}" in {}'.format(key, key_path))

	def on_deserialization(self, **kwargs):
		if self.pretraining.phantom.size != self.phantom.size:
			raise ConfigError('Pre-training phantoms are {0}x{0} but the test phantom is {1}x{1}'.format(self.pretraining.phantom.size, self.phantom.size))
		if self.method != 'sub_dip' and self.optimizer.kind == 'ngd':
			raise ConfigError('NGD runs over subspace coefficients only, method {} needs adam or lbfgs'.format(self.method))

	@property
	def subspace_method(self) -> bool:
		return self.method == 'sub_dip'

	@property
	def image_size(self) -> int:
		return self.phantom.size

	def tv_weight(self) -> float:
		return self.objective.weight(self.task == 'ct')

	def adam_lr(self) -> float:
		if self.optimizer.adam_lr is not None:
			return self.optimizer.adam_lr
		return {
			'sub_dip': numeric_constant.ADAM_LR_SUBDIP,
			'edip': numeric_constant.ADAM_LR_EDIP,
			'dip': numeric_constant.ADAM_LR_DIP,
		}[self.method]

	def pretraining_directory(self) -> str:
		if self.pretraining.directory is not None:
			return self.pretraining.directory
		return os.path.join(self.output_directory, 'pretrain')

	def subspace_directory(self) -> str:
		if self.subspace.directory is not None:
			return self.subspace.directory
		return os.path.join(self.output_directory, 'subspace_{}'.format(self.subspace.basis))

	def pin_shared_directories(self):
		"""
		Fix the pre-training and subspace directories to their current locations, so they stay shared after the
		output directory gets changed
		"""
		self.pretraining.directory = self.pretraining_directory()
		self.subspace.directory = self.subspace_directory()

	def run_seeds(self) -> 'RunSeeds':
		return RunSeeds(self.seed)


class RunSeeds:
	"""
	Independent seeds of one run, all derived from the run seed
	"""
	def __init__(self, seed: int):
		self.seed = seed
		children = np.random.SeedSequence(seed).spawn(3)
		self.noise, self.init, self.probes = [int(child.generate_state(1)[0]) for child in children]

	def __repr__(self):
		return 'RunSeeds[seed={}, noise={}, init={}, probes={}]'.format(self.seed, self.noise, self.init, self.probes)


class ExperimentConfigStorage(YamlDataStorage):
	"""
	An experiment yaml file merged over the packaged default config
	"""
	def __init__(self, logger: Logger, file_path: str):
		super().__init__(logger, file_path, core_constant.DEFAULT_CONFIG_RESOURCE_PATH)

	def to_config(self) -> ExperimentConfig:
		return parse_config(self.to_dict())


def parse_config(data: dict) -> ExperimentConfig:
	"""
	:raise ConfigError: on unknown keys, mismatched types or invalid values
	"""
	try:
		return ExperimentConfig.deserialize(data, error_at_redundancy=True)
	except ConfigError:
		raise
	except IllegalArchConfig as e:
		raise ConfigError('Invalid network config: {}'.format(e)) from e
	except (TypeError, ValueError) as e:
		raise ConfigError(str(e)) from e


def parse_override(text: str) -> Tuple[str, Any]:
	"""
	Split a ``key.path=value`` override. The value is parsed as a yaml scalar / flow collection
	"""
	if '=' not in text:
		raise ConfigError('Override "{}" should look like key.path=value'.format(text))
	key, value = text.split('=', 1)
	return key.strip(), YAML(typ='safe').load(value) if len(value.strip()) > 0 else None


def load_config(file_path: str, overrides: Optional[Dict[str, Any]] = None, *, logger: Optional[Logger] = None) -> ExperimentConfig:
	"""
	Read an experiment file, apply dotted overrides and convert the result into a typed config

	:raise ConfigError: if the file is missing or invalid, or an override path is unknown
	"""
	storage = ExperimentConfigStorage(logger if logger is not None else get_logger(), file_path)
	try:
		storage.read_config(allowed_missing_file=False)
	except FileNotFoundError:
		raise ConfigError('Config file {} not found'.format(file_path)) from None
	except Exception as e:
		raise ConfigError('Failed to read config file {}: {}'.format(file_path, e)) from e
	if overrides:
		try:
			storage.set_values(overrides)
		except KeyError as e:
			raise ConfigError(e.args[0]) from None
	return storage.to_config()


def load_configs(file_paths: List[str], overrides: Optional[Dict[str, Any]] = None) -> List[ExperimentConfig]:
	return [load_config(path, overrides) for path in file_paths]
