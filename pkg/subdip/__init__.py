from subdip.constants import core_constant

__version__ = core_constant.VERSION_PYPI
