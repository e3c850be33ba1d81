"""
Core constants
"""

import os


NAME_SHORT = 'SubDIP'
NAME = 'subdip'
PACKAGE_NAME = 'subdip'

VERSION = '0.3.0'
VERSION_PYPI = '0.3.0'

LOGGING_FILE_NAME = '{}.log'.format(NAME)
CONFIG_FILE = 'config.yml'
DEFAULT_CONFIG_RESOURCE_PATH = 'resources/default_config.yml'

# Exit codes of the command line interface
EXIT_OK = 0
EXIT_RUNTIME_ERROR = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3

# Operators with fewer entries than this are stored densely
DENSE_OPERATOR_MAX_ENTRIES = 10 ** 7
# Refuse to assemble operators beyond this many (potential) entries unless configured otherwise
DEFAULT_OPERATOR_ENTRY_BUDGET = 5 * 10 ** 8

# SDIP binary format
SDIP_MAGIC = b'SDIP'
SDIP_HEADER_FORMAT = '<4sIII'
