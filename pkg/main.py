"""Main entry point for the CSPC market simulator."""
import click

from src.cli import presets, run, sweep
from src.config import settings


@click.group()
@click.version_option(settings.app_version, prog_name=settings.app_name)
def cli():
    """CSPC Market Simulator - crowdsourced price control for wireless access markets."""
    pass


cli.add_command(run)
cli.add_command(sweep)
cli.add_command(presets)


if __name__ == '__main__':
    cli()
