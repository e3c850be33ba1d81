import platform
import sys
from argparse import ArgumentParser
from typing import List, Optional

from subdip.constants import core_constant


def environment_check():
	def print_stderr(text):
		sys.stderr.write(text + '\n')

	if sys.version_info < (3, 8):
		print_stderr('Python 3.8+ is needed to run {}'.format(core_constant.NAME))
		print_stderr('Current Python version {} is too old'.format(platform.python_version()))
		sys.exit(1)


def build_parser() -> ArgumentParser:
	from subdip.harness.ablation import BASIS_VARIANTS

	parser = ArgumentParser(
		prog=core_constant.PACKAGE_NAME,
		description='{} CLI'.format(core_constant.NAME),
	)
	parser.add_argument('-q', '--quiet', help='Disable CLI output', action='store_true')
	parser.add_argument('-V', '--version', help='Print {} version and exit'.format(core_constant.NAME), action='store_true')
	subparsers = parser.add_subparsers(title='Command', help='Available commands', dest='subparser_name')

	def add_config_argument(sub_parser):
		sub_parser.add_argument('config', help='The experiment config file')

	def add_set_argument(sub_parser):
		sub_parser.add_argument('--set', nargs='+', metavar='KEY=VALUE', help='Override config options, e.g. optimizer.ngd.n_probes=50', default=[])

	subparsers.add_parser('gendefault', help='Generate the default config file {} at current working directory. An existing file will be overwritten'.format(core_constant.CONFIG_FILE))

	parser_pretrain = subparsers.add_parser('pretrain', help='Pre-train the network on synthetic data and record its trajectory')
	add_config_argument(parser_pretrain)
	add_set_argument(parser_pretrain)
	parser_pretrain.add_argument('--reuse', help='Keep an existing pre-training made with the same settings', action='store_true')

	parser_extract = subparsers.add_parser('extract', help='Extract the sparse subspace from the pre-training trajectory')
	add_config_argument(parser_extract)
	add_set_argument(parser_extract)
	parser_extract.add_argument('--dsub', type=int, help='Subspace dimension', default=None)
	parser_extract.add_argument('--dlev-frac', type=float, help='Share of the parameters kept by the leverage-score mask', default=None)
	parser_extract.add_argument('--incremental', help='Use the single-pass incremental SVD', action='store_true')

	parser_reconstruct = subparsers.add_parser('reconstruct', help='Run one reconstruction experiment')
	add_config_argument(parser_reconstruct)
	add_set_argument(parser_reconstruct)

	parser_compare = subparsers.add_parser('compare', help='Run several experiment configs over seeds and summarise them')
	parser_compare.add_argument('configs', nargs='+', help='The experiment config files')
	add_set_argument(parser_compare)
	parser_compare.add_argument('--seeds', nargs='+', type=int, help='Run seeds. Default: 0', default=[0])
	parser_compare.add_argument('--phantoms', nargs='+', type=int, help='Phantom seeds. Default: the phantom of each config', default=None)
	parser_compare.add_argument('-o', '--output', help='The directory to store the summary in. Default: current directory', default='.')
	parser_compare.add_argument('-j', '--jobs', type=int, help='Runs executed concurrently. Default: 1', default=1)

	parser_ablate = subparsers.add_parser('ablate', help='Compare subspace bases built in different ways')
	add_config_argument(parser_ablate)
	add_set_argument(parser_ablate)
	parser_ablate.add_argument('--variants', nargs='+', choices=BASIS_VARIANTS, help='Basis variants. Default: all', default=list(BASIS_VARIANTS))
	parser_ablate.add_argument('--seeds', nargs='+', type=int, help='Run seeds. Default: the seed of the config', default=None)
	parser_ablate.add_argument('-j', '--jobs', type=int, help='Runs executed concurrently. Default: 1', default=1)
	return parser


def entry_point(argv: Optional[List[str]] = None) -> int:
	environment_check()

	from subdip.cli import cli_util
	from subdip.cli.cmd_compare import compare_methods, ablate_basis
	from subdip.cli.cmd_extract import extract_subspace
	from subdip.cli.cmd_gendefault import generate_default_config
	from subdip.cli.cmd_pretrain import pretrain_network
	from subdip.cli.cmd_reconstruct import reconstruct
	from subdip.cli.cmd_version import show_version

	parser = build_parser()
	args = parser.parse_args(argv)

	if args.version:
		show_version(quiet=args.quiet)
		return core_constant.EXIT_OK

	cli_util.setup_logging(quiet=args.quiet)
	if args.subparser_name == 'gendefault':
		return generate_default_config(quiet=args.quiet)
	elif args.subparser_name == 'pretrain':
		return pretrain_network(args)
	elif args.subparser_name == 'extract':
		return extract_subspace(args)
	elif args.subparser_name == 'reconstruct':
		return reconstruct(args)
	elif args.subparser_name == 'compare':
		return compare_methods(args)
	elif args.subparser_name == 'ablate':
		return ablate_basis(args)
	parser.print_help()
	return core_constant.EXIT_CONFIG_ERROR
