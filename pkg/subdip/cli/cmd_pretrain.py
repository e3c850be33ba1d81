from argparse import Namespace

from subdip.cli import cli_util
from subdip.constants import core_constant
from subdip.harness import pipeline
from subdip.utils.logger import get_logger


def pretrain_network(args: Namespace) -> int:
	def action() -> int:
		cfg = cli_util.load_cli_config(args.config, cli_util.parse_overrides(args.set))
		logger = get_logger()
		logger.set_file(cfg.pretraining_directory())
		try:
			artifacts = pipeline.run_pretraining(cfg, force=not args.reuse)
		finally:
			logger.unset_file()
		logger.info('Pre-training stored in {}: {} checkpoints, |theta_pre| = {:.4g}'.format(cfg.pretraining_directory(), len(artifacts.store), artifacts.theta_pre.norm()))
		return core_constant.EXIT_OK

	return cli_util.guarded(action)
