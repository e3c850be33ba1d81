import os
from typing import List

from setuptools import find_packages, setup

from subdip.constants import core_constant

# === cheatsheet ===
# python setup.py sdist bdist_wheel
# python -m unittest discover -s tests -t .

HERE = os.path.abspath(os.path.dirname(__file__))


def read_requirements() -> List[str]:
	with open(os.path.join(HERE, 'requirements.txt'), encoding='utf8') as file:
		return [line.strip() for line in file if len(line.strip()) > 0 and not line.startswith('#')]


def read_readme() -> str:
	with open(os.path.join(HERE, 'README.md'), encoding='utf8') as file:
		return file.read()


setup(
	name=core_constant.PACKAGE_NAME,
	version=core_constant.VERSION_PYPI,
	description='Deep Image Prior reconstruction in a sparse subspace of pre-trained network parameters, with natural gradient descent',
	long_description=read_readme(),
	long_description_content_type='text/markdown',
	python_requires='>=3.8',
	packages=find_packages(exclude=['tests', 'tests.*']),
	package_data={core_constant.PACKAGE_NAME: ['resources/*.yml']},
	install_requires=read_requirements(),
	classifiers=[
		'Programming Language :: Python :: 3',
		'Topic :: Scientific/Engineering :: Image Processing',
		'Operating System :: OS Independent',
	],
	entry_points={'console_scripts': ['{0} = {0}.__main__:main'.format(core_constant.PACKAGE_NAME)]},
)
