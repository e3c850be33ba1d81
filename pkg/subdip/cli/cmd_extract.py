from argparse import Namespace

from subdip.cli import cli_util
from subdip.constants import core_constant
from subdip.harness import pipeline
from subdip.utils.logger import get_logger


def extract_subspace(args: Namespace) -> int:
	def action() -> int:
		overrides = cli_util.parse_overrides(args.set)
		if args.dsub is not None:
			overrides['subspace.d_sub'] = args.dsub
		if args.dlev_frac is not None:
			overrides['subspace.d_lev_fraction'] = args.dlev_frac
		if args.incremental:
			overrides['subspace.basis'] = 'incremental'
		cfg = cli_util.load_cli_config(args.config, overrides)
		logger = get_logger()
		logger.set_file(cfg.subspace_directory())
		try:
			extracted = pipeline.run_extraction(cfg, force=True)
		finally:
			logger.unset_file()
		logger.info('Subspace stored in {}: {}'.format(cfg.subspace_directory(), extracted.model))
		return core_constant.EXIT_OK

	return cli_util.guarded(action)
