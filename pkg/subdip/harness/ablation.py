"""
Basis ablation: identical Sub-DIP reconstructions whose subspaces differ only in how the basis was built
"""
import os
from typing import Any, List, Optional, Sequence

from subdip.harness.compare import ComparisonTable, Runner, compare_methods
from subdip.harness.experiment_config import ExperimentConfig
from subdip.harness.pipeline import run_pipeline
from subdip.utils.exception import ConfigError

BASIS_VARIANTS = ('svd', 'incremental', 'random', 'random_orthonormal')


def ablation_configs(cfg: ExperimentConfig, variants: Sequence[str] = BASIS_VARIANTS) -> List[ExperimentConfig]:
	"""
	One config per basis variant. All of them share the pre-training of the given config, while every variant extracts
	into its own subspace directory and runs into its own output directory
	"""
	if cfg.method != 'sub_dip':
		raise ConfigError('The basis ablation needs the sub_dip method, found {}'.format(cfg.method))
	unknown = [variant for variant in variants if variant not in BASIS_VARIANTS]
	if len(unknown) > 0:
		raise ConfigError('Unknown basis variant(s) {}, expected some of {}'.format(unknown, list(BASIS_VARIANTS)))
	pretraining_directory = cfg.pretraining_directory()
	results = []
	for variant in variants:
		variant_cfg = cfg.copy()
		variant_cfg.subspace.basis = variant
		variant_cfg.pretraining.directory = pretraining_directory
		variant_cfg.subspace.directory = os.path.join(cfg.output_directory, 'subspace_{}'.format(variant))
		variant_cfg.output_directory = os.path.join(cfg.output_directory, variant)
		variant_cfg.name = '{}[{}]'.format(cfg.name, variant)
		results.append(variant_cfg)
	return results


def config_diff(a: Any, b: Any, key_path: str = '') -> List[str]:
	"""
	Dotted paths of the entries that differ between two configs, or between their serialized trees
	"""
	if hasattr(a, 'serialize') and hasattr(b, 'serialize'):
		a, b = a.serialize(), b.serialize()
	if isinstance(a, dict) and isinstance(b, dict):
		result = []
		for key in list(a.keys()) + [k for k in b.keys() if k not in a]:
			child = '{}.{}'.format(key_path, key) if len(key_path) > 0 else str(key)
			if key not in a or key not in b:
				result.append(child)
			else:
				result.extend(config_diff(a[key], b[key], child))
		return result
	return [] if a == b else [key_path]


def ablate_basis(
		cfg: ExperimentConfig, variants: Sequence[str] = BASIS_VARIANTS, seeds: Optional[List[int]] = None, *,
		runner: Runner = run_pipeline, workers: int = 1, output_directory: Optional[str] = None
) -> ComparisonTable:
	configs = ablation_configs(cfg, variants)
	return compare_methods(
		configs, seeds if seeds is not None else [cfg.seed],
		runner=runner, workers=workers,
		output_directory=output_directory if output_directory is not None else cfg.output_directory
	)
