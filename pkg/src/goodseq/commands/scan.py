from __future__ import annotations

import logging

import click

from goodseq.commands import experiment_options, load_config, policy_options
from goodseq.decorators import handle_errors
from goodseq.errors import BoundViolation, ConfigurationError
from goodseq.measures import eta_majorant, select_subsequence, theta_of_eta
from goodseq.modone import angle_repr
from goodseq.spectral import CSV_HEADER, Method, scan_record, spectrum_scan
from goodseq.utils import emit

logger = logging.getLogger(__name__)


@click.command("scan", help="Tabulate L(theta) and optional Cesaro averages over a set of angles.")
@experiment_options
@policy_options
@click.option("--angle", "angles", multiple=True, help="Angle as p/q, a decimal, or decimal@bits (dyadic).")
@click.option("--grid", type=int, help="Add the grid i/Q for 0 <= i < Q.")
@click.option("--eta", multiple=True, help="Binary word; adds theta(eta) for the selected subsequence.")
@click.option("--mode", type=click.Choice(["prop5", "thm6"]), help="Selection used by --eta.")
@click.option("--K", "K", type=int, help="Selection depth for --eta (default: longest word).")
@click.option("--N", "N", type=int, multiple=True, help="Cesaro length.")
@click.option("--method", type=click.Choice([m.value for m in Method]), help="Cesaro method.")
@click.option("--check-blocks", "check_blocks", is_flag=True, default=None, help="Compare direct and block averages.")
@handle_errors
def scan_command(**params):
    """Una riga per angolo; con --check-blocks esce con codice 3 se le due medie divergono."""
    config = load_config(params)
    m = config.modulus()
    policy = config.policy()
    if len(config.N) > 1:
        raise ConfigurationError("scan takes a single --N")

    angles = config.explicit_angles()
    labels = [angle_repr(a) for a in angles]
    majorants = [None] * len(angles)
    words = config.eta_words()
    if words:
        K = config.K or max(len(w) for w in words)
        sel = select_subsequence(m, config.mode, K)
        majorant = eta_majorant(m, sel, K)
        for word in words:
            point = theta_of_eta(m, word, sel)
            angles.append(point.theta)
            labels.append("eta=" + "".join(map(str, word)))
            majorants.append(majorant)
    if not angles:
        raise ConfigurationError("no angles: use --angle, --grid or --eta")

    rows = spectrum_scan(
        m,
        angles,
        policy,
        n=config.N[0] if config.N else None,
        method=Method(config.method or Method.DIRECT.value),
        check_blocks=config.check_blocks,
        majorants=majorants,
        labels=labels,
    )
    emit(CSV_HEADER, [scan_record(row) for row in rows], config.format, config.output)
    mismatched = [row.label for row in rows if row.blocks_match is False]
    if mismatched:
        raise BoundViolation(f"direct and block averages disagree for {', '.join(mismatched)}")
