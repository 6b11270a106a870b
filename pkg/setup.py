#!/usr/bin/env python3
"""
kramers - overdamped-limit laboratory for Langevin diffusions on the torus

Install: pip install -e .   (tests: pip install -e ".[dev]")
Then use: kramers --help

Runtime settings via ~/.kramers/.env:
  KRAMERS_THREADS=8
  KRAMERS_OUTPUT_DIR=./results
  KRAMERS_LOG_LEVEL=INFO
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read README
readme_file = Path(__file__).parent / "README.md"
long_description = ""
if readme_file.exists():
    long_description = readme_file.read_text(encoding="utf-8")

# Runtime requirements; test tooling goes to the "dev" extra
TEST_PACKAGES = ("pytest",)
requirements, dev_requirements = [], []
for line in (Path(__file__).parent / "requirements.txt").read_text(encoding="utf-8").splitlines():
    line = line.strip()
    if not line or line.startswith("#"):
        continue
    (dev_requirements if line.startswith(TEST_PACKAGES) else requirements).append(line)

setup(
    name="kramers",
    version="0.1.0",
    description="Stationary sampling, couplings and Wasserstein rate studies for the overdamped Langevin limit",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    include_package_data=True,
    python_requires=">=3.11",
    install_requires=requirements,
    extras_require={"dev": dev_requirements},
    entry_points={
        "console_scripts": [
            "kramers=cli.cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Topic :: Scientific/Engineering :: Physics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Operating System :: OS Independent",
    ],
    keywords=[
        "langevin",
        "overdamped-limit",
        "optimal-transport",
        "wasserstein",
        "monte-carlo",
        "sde",
    ],
    zip_safe=False,
)
