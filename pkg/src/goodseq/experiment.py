"""Configurazione degli esperimenti della CLI.

Precedenza: default < file JSON (--config) < flag < --set chiave=valore.
I flag hanno lo stesso nome delle chiavi del file.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, fields
from typing import Any, Callable, Dict, Iterable, List, Optional

from goodseq.config import Policy
from goodseq.errors import ConfigurationError
from goodseq.lacunary import ModulusSequence, build_modulus
from goodseq.measures import SelectionMode, WienerMethod
from goodseq.modone import Angle, parse_angle, rational
from goodseq.spectral import Method

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")


def _as_list(item: Callable[[Any], Any]) -> Callable[[Any], List[Any]]:
    def convert(value: Any) -> List[Any]:
        if isinstance(value, (list, tuple)):
            return [item(v) for v in value]
        if isinstance(value, str) and "," in value and item is int:
            return [int(v) for v in value.split(",")]
        return [item(value)]

    return convert


def _as_bool(value: Any) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in ("1", "true", "yes", "on")
    return bool(value)


_CONVERTERS: Dict[str, Callable[[Any], Any]] = {
    "angles": _as_list(str),
    "eta": _as_list(str),
    "N": _as_list(int),
    "grid": int,
    "K": int,
    "n": int,
    "nmax": int,
    "k_max": int,
    "precision_bits": int,
    "samples": int,
    "seed": int,
    "tail_tol": float,
    "check_blocks": _as_bool,
    "mode": str,
    "method": str,
    "output": str,
    "format": str,
}


@dataclass
class ExperimentConfig:
    """Parametri di un esperimento; ogni comando usa solo le chiavi che gli servono."""

    family: Optional[Any] = None
    angles: List[str] = field(default_factory=list)
    grid: Optional[int] = None
    eta: List[str] = field(default_factory=list)
    mode: str = SelectionMode.PROP5.value
    K: Optional[int] = None
    n: Optional[int] = None
    N: List[int] = field(default_factory=list)
    nmax: Optional[int] = None
    method: Optional[str] = None
    check_blocks: bool = False
    k_max: Optional[int] = None
    tail_tol: Optional[float] = None
    precision_bits: Optional[int] = None
    samples: Optional[int] = None
    seed: Optional[int] = None
    output: Optional[str] = None
    format: str = "csv"

    @classmethod
    def from_sources(
        cls,
        path: Optional[str] = None,
        flags: Optional[Dict[str, Any]] = None,
        sets: Iterable[str] = (),
    ) -> "ExperimentConfig":
        """Combina file, flag e override e valida il risultato.

        Argomenti:
            path: file JSON di configurazione (facoltativo)
            flags: valori dei flag della riga di comando (None = non dato)
            sets: override "chiave=valore"; il valore è JSON se possibile

        Ritorna:
            La configurazione validata
        """
        data: Dict[str, Any] = {}
        if path:
            data.update(_read_json(path))
        for key, value in (flags or {}).items():
            if value is None or value == () or value == []:
                continue
            data[key] = value
        for item in sets:
            key, value = _parse_set(item)
            data[key] = value
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"unknown configuration keys: {', '.join(unknown)}")
        try:
            converted = {k: (_CONVERTERS[k](v) if k in _CONVERTERS else v) for k, v in data.items()}
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid configuration value: {exc}") from exc
        return cls(**converted).validate()

    def validate(self) -> "ExperimentConfig":
        """Controlla i vincoli prima di qualsiasi calcolo."""
        if self.format not in FORMATS:
            raise ConfigurationError(f"format must be one of {FORMATS}, got {self.format!r}")
        try:
            SelectionMode(self.mode)
        except ValueError as exc:
            raise ConfigurationError(f"unknown selection mode {self.mode!r}") from exc
        if self.method is not None and self.method not in {m.value for m in Method} | {m.value for m in WienerMethod}:
            raise ConfigurationError(f"unknown method {self.method!r}")
        for key in ("grid", "K", "n", "nmax", "k_max", "precision_bits", "samples"):
            value = getattr(self, key)
            if value is not None and value < 1:
                raise ConfigurationError(f"{key} must be >= 1, got {value}")
        if any(v < 1 for v in self.N):
            raise ConfigurationError("every N must be >= 1")
        if self.seed is not None and self.seed < 0:
            raise ConfigurationError("seed must be nonnegative")
        if self.tail_tol is not None and self.tail_tol <= 0:
            raise ConfigurationError("tail_tol must be positive")
        for word in self.eta:
            if not word or any(c not in "01" for c in word):
                raise ConfigurationError(f"eta word {word!r} must be a nonempty string of 0 and 1")
        return self

    def require(self, *keys: str) -> None:
        missing = [k for k in keys if getattr(self, k) in (None, [], "")]
        if missing:
            raise ConfigurationError(f"missing required option(s): {', '.join('--' + k for k in missing)}")

    def modulus(self) -> ModulusSequence:
        self.require("family")
        return build_modulus(self.family)

    def policy(self) -> Policy:
        return Policy.default().with_overrides(
            k_max=self.k_max, tail_tol=self.tail_tol, precision_bits=self.precision_bits
        )

    def explicit_angles(self) -> List[Angle]:
        """Angoli da --angle e dalla griglia {i/Q : 0 ≤ i < Q}."""
        angles = [parse_angle(text, self.precision_bits) for text in self.angles]
        if self.grid is not None:
            angles.extend(rational(i, self.grid) for i in range(self.grid))
        return angles

    def eta_words(self) -> List[tuple]:
        return [tuple(int(c) for c in word) for word in self.eta]


def _read_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError("config file must contain a JSON object")
    return data


def _parse_set(item: str) -> tuple:
    key, sep, raw = item.partition("=")
    if not sep or not key.strip():
        raise ConfigurationError(f"--set expects key=value, got {item!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value
