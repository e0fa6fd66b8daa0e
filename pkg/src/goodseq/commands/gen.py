from __future__ import annotations

import click

from goodseq.commands import experiment_options, load_config
from goodseq.decorators import handle_errors
from goodseq.lacunary import enumerate_stream
from goodseq.utils import emit

GEN_HEADER = ["n", "s_n"]


@click.command("gen", help="List the first n elements of the good sequence.")
@experiment_options
@click.option("--n", "n", type=int, help="Number of elements.")
@handle_errors
def gen_command(**params):
    """Elenca s_1, ..., s_n in ordine crescente."""
    config = load_config(params)
    config.require("n")
    m = config.modulus()
    records = [{"n": i, "s_n": s} for i, s in enumerate(enumerate_stream(m, config.n), start=1)]
    emit(GEN_HEADER, records, config.format, config.output)
