# setup.py

from setuptools import find_packages, setup

setup(
    name="qsvrg-bench",
    version="0.1.0",
    packages=find_packages(include=["qsvrg", "qsvrg.*"]),
    install_requires=[
        "click>=8.1.0",
        "rich>=13.0.0",
        "pydantic>=2.0.0",
        "pydantic-settings>=2.0.0",
        "pyyaml>=6.0",
        "numpy>=1.24.0",
        "scipy>=1.10.0",
    ],
    entry_points={
        "console_scripts": [
            "qsvrg=qsvrg.cli.main:main",
        ],
    },
    python_requires=">=3.10",
)
