from argparse import Namespace

from subdip.cli import cli_util
from subdip.harness import pipeline


def reconstruct(args: Namespace) -> int:
	def action() -> int:
		cfg = cli_util.load_cli_config(args.config, cli_util.parse_overrides(args.set))
		report = pipeline.run_pipeline(cfg)
		if not args.quiet:
			print(report)
		return report.exit_code

	return cli_util.guarded(action)
