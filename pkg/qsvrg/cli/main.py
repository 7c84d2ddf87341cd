# qsvrg/cli/main.py

import logging
import sys
from pathlib import Path

import click
import yaml
from rich.logging import RichHandler

from ..core.config import Config, get_config, init_config
from ..core.exceptions import QsvrgError
from .ui import err_console, print_error, print_warning

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def setup_logging(config: Config):
    """Rich console logging on stderr, plus a plain file log when configured"""
    handlers: list = [RichHandler(console=err_console, show_path=False, rich_tracebacks=True)]
    if config.log_file:
        config.log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(config.log_file, encoding="utf-8")
        file_handler.setFormatter(
            logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
        )
        handlers.append(file_handler)
    logging.basicConfig(
        level=config.log_level.upper(), format="%(message)s", handlers=handlers, force=True
    )


@click.group()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), help="Path to config file")
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    help="Override the configured log level",
)
@click.pass_context
def cli(ctx, config, log_level):
    """Q-SVRG benchmark harness - solve, verify and compare quadratic solvers"""

    # Initialize configuration
    overrides = {"log_level": log_level.upper()} if log_level else {}
    try:
        init_config(Path(config) if config else None, **overrides)
    except (ValueError, OSError, yaml.YAMLError) as e:
        print_error(f"Invalid configuration: {e}")
        ctx.exit(2)

    cfg = get_config()
    setup_logging(cfg)

    # Store in context for subcommands
    ctx.ensure_object(dict)
    ctx.obj["config"] = cfg


# Import subcommand modules
from .commands import report, solve, verify  # noqa: E402

# Register commands
cli.add_command(solve.solve)
cli.add_command(verify.verify)
cli.add_command(report.report)


def main():
    """Entry point for the CLI"""
    try:
        cli(obj={})
    except KeyboardInterrupt:
        print_warning("\n\nOperation cancelled by user")
        sys.exit(130)
    except QsvrgError as e:
        print_error(f"Error: {str(e)}")
        sys.exit(1)


if __name__ == "__main__":
    main()
