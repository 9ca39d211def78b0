"""Command line interface.

```bash
qdraman --help
qdraman simulate --scenario ratio_fig4b --out results/ratio
qdraman validate --config configs/default.toml
qdraman oracle-check --tolerance 0.05
```

Exit codes are 0 on success, 1 for usage and configuration errors, 2 for
simulation failures and 3 when the oracle check fails.
"""

from __future__ import annotations

import logging
import pathlib
from collections.abc import Sequence

import click

from qdraman.config import validate_config
from qdraman.environment import log_environment
from qdraman.exceptions import ConfigError
from qdraman.exceptions import OracleMismatchError
from qdraman.exceptions import ParameterError
from qdraman.exceptions import SimulationError
from qdraman.scenarios import run_scenario
from qdraman.scenarios import Scenario
from qdraman.scenarios import scenario_names
from qdraman.utils import init_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SIMULATION = 2
EXIT_ORACLE = 3

_config_option = click.option(
    '-c',
    '--config',
    'config',
    metavar='PATH',
    type=click.Path(exists=True, dir_okay=False, path_type=pathlib.Path),
    default=None,
    help='TOML configuration file (defaults to the base device profile).',
)


@click.group()
@click.version_option(package_name='qdraman')
@click.option(
    '--log-level',
    default='INFO',
    type=click.Choice(
        ['DEBUG', 'INFO', 'WARNING', 'ERROR'],
        case_sensitive=False,
    ),
    help='Minimum logging level.',
)
@click.option(
    '--log-file',
    metavar='PATH',
    default=None,
    help='Also write logs to this file.',
)
@click.option(
    '--rich/--no-rich',
    default=False,
    help='Use rich output formatting.',
)
def cli(log_level: str, log_file: str | None, rich: bool) -> None:
    """Simulate cavity-stimulated Raman spin-flip emission."""
    init_logging(log_level.upper(), logfile=log_file, rich=rich)
    log_environment()


@cli.command()
@click.option(
    '-s',
    '--scenario',
    required=True,
    type=click.Choice(scenario_names()),
    help='Figure pipeline to run.',
)
@_config_option
@click.option(
    '-o',
    '--out',
    metavar='DIR',
    type=click.Path(file_okay=False, path_type=pathlib.Path),
    default=None,
    help='Output directory [default: results/<scenario>].',
)
@click.option(
    '--set',
    'overrides',
    metavar='KEY=VALUE',
    multiple=True,
    help='Override a configuration key, e.g. device.magnetic_field=5.',
)
def simulate(
    scenario: str,
    config: pathlib.Path | None,
    out: pathlib.Path | None,
    overrides: tuple[str, ...],
) -> None:
    """Run a figure-reproduction scenario."""
    out = pathlib.Path('results') / scenario if out is None else out
    manifest = run_scenario(Scenario(scenario, overrides, out), config)
    for name in manifest.files:
        click.echo(out / name)


@cli.command()
@click.option(
    '-c',
    '--config',
    'config',
    metavar='PATH',
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=pathlib.Path),
    help='TOML configuration file to check.',
)
def validate(config: pathlib.Path) -> None:
    """Validate a configuration file and print the resolved values."""
    settings = validate_config(config)
    for key, value in settings.flatten().items():
        click.echo(f'{key} = {value}')


@cli.command('oracle-check')
@click.option(
    '-t',
    '--tolerance',
    type=click.FloatRange(min=0, min_open=True),
    default=None,
    help='Accepted RMS relative deviation [default: 0.05].',
)
@_config_option
@click.option(
    '-o',
    '--out',
    metavar='DIR',
    type=click.Path(file_okay=False, path_type=pathlib.Path),
    default=pathlib.Path('results') / 'oracle_check',
    show_default=True,
    help='Output directory.',
)
def oracle_check(
    tolerance: float | None,
    config: pathlib.Path | None,
    out: pathlib.Path,
) -> None:
    """Compare the Lindblad engine with the perturbative model."""
    overrides: tuple[str, ...] = ()
    if tolerance is not None:
        overrides = (f'run.oracle_tolerance={tolerance!r}',)
    run_scenario(Scenario('oracle_check', overrides, out), config)
    click.echo(f'Oracle check passed; see {out / "oracle.csv"}')


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and map the outcome to an exit code.

    Args:
        argv: Arguments without the program name; `sys.argv` by default.

    Returns:
        Process exit code.
    """
    try:
        ret = cli.main(
            args=None if argv is None else list(argv),
            prog_name='qdraman',
            standalone_mode=False,
        )
    except click.exceptions.Abort:
        click.echo('Aborted!', err=True)
        return EXIT_CONFIG
    except click.ClickException as e:
        e.show()
        return EXIT_CONFIG
    except (ConfigError, ParameterError) as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except OracleMismatchError as e:
        logger.error(str(e))
        return EXIT_ORACLE
    except SimulationError as e:
        logger.error(f'[{e.module}] {e}')
        return EXIT_SIMULATION
    # --help and --version exit through click with their own code.
    return ret if isinstance(ret, int) else EXIT_OK
