"""Interfaccia a riga di comando di goodseq."""
from __future__ import annotations

import logging
import sys
from typing import Optional

import click

from goodseq.commands.conditions import conditions_command
from goodseq.commands.dirichlet import dirichlet_command
from goodseq.commands.gen import gen_command
from goodseq.commands.measure import measure_command
from goodseq.commands.scan import scan_command
from goodseq import __version__
from goodseq.config import configure, get_settings

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def create_cli() -> click.Group:
    """Factory per creare il gruppo di comandi."""

    @click.group(help="Good sequences built from lacunary moduli: spectra, averages and Cantor-type measures.")
    @click.option("--threads", type=int, help="Worker threads for independent angles.")
    @click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), help="Diagnostics on stderr.")
    @click.version_option(version=__version__, prog_name="goodseq")
    def cli(threads: Optional[int], log_level: Optional[str]) -> None:
        overrides = {}
        if threads is not None:
            if threads < 1:
                raise click.BadParameter("must be >= 1", param_hint="--threads")
            overrides["threads"] = threads
        if log_level:
            overrides["log_level"] = log_level.upper()
            logging.getLogger("goodseq").setLevel(overrides["log_level"])
        if overrides:
            configure(**overrides)

    for command in (gen_command, conditions_command, scan_command, measure_command, dirichlet_command):
        cli.add_command(command)
    return cli


def main() -> None:
    logging.basicConfig(
        stream=sys.stderr,
        level=get_settings().log_level,
        format="%(levelname)s %(name)s: %(message)s",
    )
    create_cli()(prog_name="goodseq")


if __name__ == "__main__":
    main()
