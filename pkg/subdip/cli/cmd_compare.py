from argparse import Namespace

from subdip.cli import cli_util
from subdip.constants import core_constant
from subdip.harness import ablation, compare
from subdip.harness.experiment_config import load_configs


def _exit_code(table: compare.ComparisonTable) -> int:
	for row in table.rows:
		for report in row.reports:
			if not report.complete:
				return report.exit_code
	return core_constant.EXIT_OK


def compare_methods(args: Namespace) -> int:
	def action() -> int:
		configs = load_configs(args.configs, cli_util.parse_overrides(args.set))
		table = compare.compare_methods(configs, args.seeds, phantom_seeds=args.phantoms, workers=args.jobs, output_directory=args.output)
		if not args.quiet:
			print(table.format_table())
		return _exit_code(table)

	return cli_util.guarded(action)


def ablate_basis(args: Namespace) -> int:
	def action() -> int:
		cfg = cli_util.load_cli_config(args.config, cli_util.parse_overrides(args.set))
		table = ablation.ablate_basis(cfg, args.variants, args.seeds, workers=args.jobs)
		if not args.quiet:
			print(table.format_table())
		return _exit_code(table)

	return cli_util.guarded(action)
