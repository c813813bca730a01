#!/usr/bin/env python
import sys

import setuptools

if sys.version_info < (3, 8):
    sys.exit('Python < 3.8 is not supported')

install_requirements = [
    'numpy>=1.20',
    'scipy>=1.6',
    'prompt_toolkit>=3.0.36',
]

test_requirements = [
    'pytest>=7',
    'hypothesis>=6',
]


def main():
    setuptools.setup(
        python_requires='>=3.8',
        entry_points={
            'console_scripts': [
                'lcanon = lcanon.main:main',
            ],
        },
        install_requires=install_requirements,
        extras_require={
            'test': test_requirements,
        },
        packages=setuptools.find_packages(
            '.', include=('lcanon', 'lcanon.*')),
    )


if __name__ == '__main__':
    main()
