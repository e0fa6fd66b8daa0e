"""Funzioni di utilità condivise tra i comandi: formattazione ed emissione CSV/JSON."""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Dict, Iterable, List, Optional, Sequence

import click

# interi oltre questa soglia vanno in JSON come stringhe decimali
JSON_SAFE_INT = 1 << 53


def format_number(value: Any) -> str:
    """Formatta un valore per una cella CSV.

        Argomenti:
            value: int, float, Fraction, bool, str o None

        Ritorna:
            Interi in decimale esatto, reali con 17 cifre significative, stringa vuota per None
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    return f"{float(value):.17g}"


def json_value(value: Any) -> Any:
    """Converte un valore in un tipo JSON: interi grandi come stringhe, non finiti come null."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        return str(value) if abs(value) >= JSON_SAFE_INT else value
    x = float(value)
    return x if math.isfinite(x) else None


def render_csv(header: Sequence[str], records: Iterable[Dict[str, Any]]) -> str:
    """CSV con separatore ',', punto decimale e fine riga LF.

    Le colonne extra presenti nei record (es. blocks_match) vengono aggiunte in coda.
    """
    records = list(records)
    columns: List[str] = list(header)
    for record in records:
        columns.extend(k for k in record if k not in columns)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for record in records:
        writer.writerow([format_number(record.get(c)) for c in columns])
    return buffer.getvalue()


def render_json(records: Iterable[Dict[str, Any]]) -> str:
    rows = [{k: json_value(v) for k, v in record.items()} for record in records]
    return json.dumps(rows, indent=2, ensure_ascii=False) + "\n"


def emit(header: Sequence[str], records: Iterable[Dict[str, Any]], fmt: str = "csv", output: Optional[str] = None) -> None:
    """Scrive i record su file (UTF-8) o su standard output.

        Argomenti:
            header: colonne nell'ordine dell'interfaccia
            records: righe come dizionari
            fmt: "csv" oppure "json"
            output: percorso del file, None per stdout
    """
    text = render_json(records) if fmt == "json" else render_csv(header, records)
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
