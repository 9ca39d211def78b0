"""Utilities for collecting information about the environment.

Tip:
    This module is executable so you can check which numerical stack a
    simulation will run on. Solver timings depend heavily on the BLAS
    that numpy and scipy link against.
    ```bash
    python -m qdraman.environment
    ```
"""

from __future__ import annotations

import importlib.metadata
import logging
import platform
import sys
from typing import NamedTuple

import psutil

logger = logging.getLogger(__name__)

PACKAGES = ('qdraman', 'numpy', 'scipy', 'click', 'rich', 'psutil')


class Environment(NamedTuple):
    """Named tuple representing collected environment information."""

    os: str
    python_version: str
    python_platform: str
    packages: str
    cpu_info: str
    total_ram_gb: float
    available_ram_gb: float


def collect_packages(names: tuple[str, ...] = PACKAGES) -> list[str]:
    """Collect `name==version` strings of the relevant packages."""
    packages = []
    for name in names:
        try:
            version = importlib.metadata.version(name)
        except importlib.metadata.PackageNotFoundError:
            version = 'not installed'
        packages.append(f'{name}=={version}')
    return packages


def collect_environment() -> Environment:
    """Collects information on the hardware and software environment."""
    bit_count = sys.maxsize.bit_length() + 1
    sys_version = sys.version.replace('\n', ' ')

    pcores = psutil.cpu_count(logical=False)
    lcores = psutil.cpu_count(logical=True)
    cpu_info = f'{platform.processor()} ({pcores} cores / {lcores} logical)'
    memory = psutil.virtual_memory()

    return Environment(
        os=f'{platform.system()} {platform.release()}',
        python_version=f'{sys_version} ({bit_count}-bit runtime)',
        python_platform=platform.platform(),
        packages='\n'.join(collect_packages()),
        cpu_info=cpu_info,
        total_ram_gb=round(memory.total / 1e9, 2),
        available_ram_gb=round(memory.available / 1e9, 2),
    )


ENVIRONMENT_FORMAT = """
OS: {os}
CPU: {cpu_info}
RAM: {available_ram_gb} GB available of {total_ram_gb} GB

Python version: {python_version}
Python platform: {python_platform}

Packages:
{packages}
""".strip()


def log_environment(level: int = logging.DEBUG) -> None:
    """Log the hardware and software environment.

    Args:
        level: Logging level.
    """
    env = collect_environment()
    env_str = ENVIRONMENT_FORMAT.format(**env._asdict())
    logger.log(level, f'Runtime environment:\n{env_str}')


if __name__ == '__main__':  # pragma: no cover
    env = collect_environment()
    env_str = ENVIRONMENT_FORMAT.format(**env._asdict())
    print(env_str)
