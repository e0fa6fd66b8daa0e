from __future__ import annotations

import click

from goodseq.commands import experiment_options, load_config
from goodseq.decorators import handle_errors
from goodseq.errors import ConfigurationError
from goodseq.measures import WIENER_HEADER, WienerMethod, select_subsequence, wiener_average
from goodseq.utils import emit


@click.command("measure", help="Wiener averages of the Fourier coefficients of the Cantor-type measure.")
@experiment_options
@click.option("--mode", type=click.Choice(["prop5", "thm6"]), help="Subsequence selection (default prop5).")
@click.option("--K", "K", type=int, help="Number of selected indices.")
@click.option("--N", "--n", "N", type=int, multiple=True, help="Averaging length; repeat for several.")
@click.option("--method", type=click.Choice([m.value for m in WienerMethod]), help="Evaluation of mu-hat.")
@click.option("--samples", type=int, help="Monte Carlo sample count.")
@click.option("--seed", type=int, help="Monte Carlo seed (required with monte_carlo).")
@handle_errors
def measure_command(**params):
    """Per ogni N: (1/N)Σ μ̂(s_n) e (1/N)Σ |μ̂(s_n)|²."""
    config = load_config(params)
    config.require("K", "N")
    method = WienerMethod(config.method or WienerMethod.EXACT_PRODUCT.value)
    if method is WienerMethod.MONTE_CARLO:
        config.require("samples", "seed")
    elif config.samples is not None or config.seed is not None:
        raise ConfigurationError("--samples and --seed only apply to monte_carlo")
    m = config.modulus()
    sel = select_subsequence(m, config.mode, config.K)
    records = [
        wiener_average(m, sel, N, method=method, samples=config.samples, seed=config.seed).record()
        for N in config.N
    ]
    emit(WIENER_HEADER, records, config.format, config.output)
