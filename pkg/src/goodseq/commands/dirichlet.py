from __future__ import annotations

import click

from goodseq.commands import experiment_options, load_config, policy_options
from goodseq.decorators import handle_errors
from goodseq.errors import ConfigurationError
from goodseq.measures import DIRICHLET_HEADER, SelectionMode, dirichlet_check, select_subsequence, theta_of_eta
from goodseq.utils import emit


@click.command("dirichlet", help="Check the Dirichlet property of theta(eta) along t = m_(j_n).")
@experiment_options
@policy_options
@click.option("--mode", type=click.Choice(["thm6"]), default="thm6", show_default=True)
@click.option("--K", "K", type=int, help="Selection depth (default: length of --eta).")
@click.option("--eta", help="Binary word eta.")
@click.option("--nmax", type=int, help="Largest n to check (default K).")
@handle_errors
def dirichlet_command(**params):
    eta = params.pop("eta", None)
    params["eta"] = [eta] if eta else None
    config = load_config(params)
    config.require("eta")
    if SelectionMode(config.mode) is not SelectionMode.THM6:
        raise ConfigurationError("dirichlet needs --mode thm6")
    if len(config.eta) != 1:
        raise ConfigurationError("dirichlet takes a single eta word")
    word = config.eta_words()[0]
    K = config.K or len(word)
    m = config.modulus()
    sel = select_subsequence(m, SelectionMode.THM6, K)
    point = theta_of_eta(m, word, sel)
    rows = dirichlet_check(m, point, config.nmax or K, config.policy())
    emit(DIRICHLET_HEADER, [row.record() for row in rows], config.format, config.output)
