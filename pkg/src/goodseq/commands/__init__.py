"""Comandi della CLI: uno per modulo, registrati da `goodseq.cli.create_cli`."""
from __future__ import annotations

from typing import Any, Callable, Dict

import click

from goodseq.experiment import ExperimentConfig


def experiment_options(f: Callable) -> Callable:
    """Opzioni comuni a tutti i comandi: configurazione, famiglia e formato di uscita."""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON experiment file."),
        click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE", help="Override a config key."),
        click.option("--family", help="Moduli family, e.g. geometric:3, factorial:2, explicit:3,9,27."),
        click.option("--json", "as_json", is_flag=True, help="Emit JSON."),
        click.option("--csv", "as_csv", is_flag=True, help="Emit CSV (default)."),
        click.option("--output", "-o", type=click.Path(dir_okay=False), help="Write to a file instead of stdout."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def policy_options(f: Callable) -> Callable:
    """Opzioni della politica di troncamento di L(θ)."""
    options = [
        click.option("--k-max", "k_max", type=int, help="Largest product index K_max."),
        click.option("--tail-tol", "tail_tol", type=float, help="Tail tolerance."),
        click.option("--precision-bits", "precision_bits", type=int, help="Working precision in bits."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def load_config(params: Dict[str, Any]) -> ExperimentConfig:
    """Costruisce la configurazione dai parametri click (file < flag < --set)."""
    params = dict(params)
    path = params.pop("config_path", None)
    sets = params.pop("overrides", ())
    as_json = params.pop("as_json", False)
    as_csv = params.pop("as_csv", False)
    if as_json and as_csv:
        from goodseq.errors import ConfigurationError

        raise ConfigurationError("choose one of --json and --csv")
    params["format"] = "json" if as_json else ("csv" if as_csv else None)
    return ExperimentConfig.from_sources(path, params, sets)
