from __future__ import annotations

import click

from goodseq.commands import experiment_options, load_config
from goodseq.decorators import handle_errors
from goodseq.lacunary import check_conditions
from goodseq.utils import emit

CONDITIONS_HEADER = [
    "horizon",
    "a1_partial_sum",
    "a1_terms_summable_hint",
    "a2_divisible",
    "a2_ratio_increasing",
    "verdict",
]


@click.command("conditions", help="Finite-horizon diagnostic of the growth conditions (A1)/(A2).")
@experiment_options
@click.option("--K", "K", type=int, help="Horizon (default 10).")
@handle_errors
def conditions_command(**params):
    config = load_config(params)
    report = check_conditions(config.modulus(), config.K or 10)
    record = {
        "horizon": report.horizon,
        "a1_partial_sum": report.a1_partial_sum,
        "a1_terms_summable_hint": report.a1_terms_summable_hint,
        "a2_divisible": report.a2_divisible,
        "a2_ratio_increasing": report.a2_ratio_increasing,
        "verdict": report.verdict.value,
    }
    emit(CONDITIONS_HEADER, [record], config.format, config.output)
