import os
from setuptools import setup, find_packages  # type: ignore
from drham import __version__, __email__, __author__, __license__

console_scripts = [
    'drham = drham.__main__:main',
]

package_name = "drham"
base_dir = os.path.abspath(os.path.dirname(__file__))
with open(os.path.join(base_dir, 'README.md'), 'rb') as f:
    long_description = f.read().decode('utf-8')


setup(
    name=package_name,
    version=__version__,
    author=__author__,
    author_email=__email__,
    description="Exact checks of the bihamiltonian structure of double ramification hierarchies",
    keywords="integrable-systems double-ramification bihamiltonian poisson cohft dubrovin-zhang",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    long_description=long_description,
    long_description_content_type='text/markdown',
    license=__license__,
    packages=find_packages(exclude=('tests',)),
    entry_points={'console_scripts': console_scripts},
    install_requires=[
        'sympy',
        'hypothesis',
    ]
)
