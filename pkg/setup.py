#!/usr/bin/env python3
"""
nehari4 - Nehari-manifold and mountain-pass toolkit
Fourth-order elliptic equations with concave-convex critical nonlinearities
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read the README file
readme_file = Path(__file__).parent / "README.md"
long_description = readme_file.read_text(encoding="utf-8") if readme_file.exists() else ""

# Read requirements
requirements_file = Path(__file__).parent / "requirements.txt"
requirements = []
if requirements_file.exists():
    with open(requirements_file, 'r', encoding='utf-8') as f:
        requirements = [
            line.strip()
            for line in f
            if line.strip() and not line.startswith('#')
        ]

setup(
    name="nehari4",
    version="1.0.0",
    description="Nehari-manifold and mountain-pass toolkit for fourth-order elliptic equations",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="nehari4 developers",

    # Package configuration
    packages=find_packages(where="Scripts", include=["nehari4*"]),
    package_dir={"": "Scripts"},
    py_modules=["nehari4_main"],
    python_requires=">=3.10",
    install_requires=requirements,

    # Entry points
    entry_points={
        "console_scripts": [
            "nehari4=nehari4_main:main",
        ],
    },

    # Package data
    include_package_data=True,
    package_data={
        "nehari4": [
            "config/*.json",
        ],
    },

    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],

    extras_require={
        "dev": [
            "pytest>=7.4.3",
            "pytest-cov>=4.1.0",
            "pytest-timeout>=2.2.0",
            "black>=23.9.1",
            "flake8>=6.1.0",
            "mypy>=1.6.1",
        ],
    },

    zip_safe=False,
)
