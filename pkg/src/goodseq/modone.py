"""Aritmetica sul cerchio R/Z.

Due rappresentazioni degli angoli θ ∈ [0, 1):
- `RationalAngle`: frazione esatta p/q
- `DyadicAngle`: virgola fissa mantissa/2^bits, con i bit effettivi rimasti
  dopo le moltiplicazioni per interi grandi

Le esponenziali e^{2iπt} vengono valutate con mpmath, in contesti separati per
ogni precisione (mai modificati dopo la creazione).
"""
from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Optional, Union

import mpmath

from goodseq.config import get_settings
from goodseq.errors import ConfigurationError, InsufficientPrecision

# bit di guardia oltre la lunghezza del moltiplicatore
GUARD_BITS = 64
MIN_DYADIC_BITS = 64


@dataclass(frozen=True)
class RationalAngle:
    """Angolo razionale esatto, ridotto in [0, 1) e ai minimi termini."""

    value: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", Fraction(self.value) % 1)

    @property
    def p(self) -> int:
        return self.value.numerator

    @property
    def q(self) -> int:
        return self.value.denominator

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class DyadicAngle:
    """Angolo in virgola fissa: mantissa / 2^bits.

    `effective_bits` misura quanti bit restano affidabili rispetto al θ reale
    rappresentato (parte da `bits` e cala a ogni moltiplicazione).
    """

    mantissa: int
    bits: int
    effective_bits: Optional[int] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.bits < MIN_DYADIC_BITS:
            raise ConfigurationError(f"dyadic angles need at least {MIN_DYADIC_BITS} bits, got {self.bits}")
        object.__setattr__(self, "mantissa", self.mantissa % (1 << self.bits))
        if self.effective_bits is None:
            object.__setattr__(self, "effective_bits", self.bits)

    def __str__(self) -> str:
        return f"0x{self.mantissa:x}/2^{self.bits}"


Angle = Union[RationalAngle, DyadicAngle]


@dataclass(frozen=True)
class BoundedComplex:
    """Valore complesso (re, im) con un limite superiore `err` sull'errore assoluto."""

    re: Any
    im: Any
    err: Fraction = Fraction(0)

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __abs__(self) -> float:
        return math.hypot(float(self.re), float(self.im))


def rational(p: int, q: int = 1) -> RationalAngle:
    if q <= 0:
        raise ConfigurationError(f"angle denominator must be positive, got {q}")
    return RationalAngle(Fraction(p, q))


def dyadic(mantissa: int, bits: int) -> DyadicAngle:
    return DyadicAngle(mantissa, bits)


def dyadic_from_decimal(text: str, bits: int) -> DyadicAngle:
    """Arrotonda un decimale al dyadic più vicino con `bits` bit."""
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"invalid decimal angle {text!r}") from exc
    return DyadicAngle(round(value * (1 << bits)), bits)


def parse_angle(text: str, bits: Optional[int] = None) -> Angle:
    """Analizza un angolo scritto sulla riga di comando.

    Argomenti:
        text: "p/q", un decimale ("0.25", razionale esatto) oppure
              "decimale@bits" per un angolo diadico
        bits: larghezza per "decimale@" senza bit espliciti

    Ritorna:
        L'angolo corrispondente
    """
    text = text.strip()
    if match := re.match(r"^(-?\d+)/(\d+)$", text):
        return rational(int(match.group(1)), int(match.group(2)))
    if match := re.match(r"^(-?\d*\.?\d+)@(\d*)$", text):
        width = int(match.group(2)) if match.group(2) else (bits or get_settings().precision_bits)
        return dyadic_from_decimal(match.group(1), width)
    if re.match(r"^-?\d*\.?\d+$", text):
        return RationalAngle(Fraction(text))
    raise ConfigurationError(f"unrecognised angle {text!r}")


def angle_to_json(theta: Angle) -> Dict[str, Any]:
    if isinstance(theta, RationalAngle):
        return {"rational": [str(theta.p), str(theta.q)]}
    return {"dyadic": {"mantissa_hex": f"{theta.mantissa:x}", "bits": theta.bits}}


def angle_from_json(data: Dict[str, Any]) -> Angle:
    try:
        if "rational" in data:
            p, q = data["rational"]
            return rational(int(p), int(q))
        body = data["dyadic"]
        return DyadicAngle(int(body["mantissa_hex"], 16), int(body["bits"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigurationError(f"malformed angle: {data!r}") from exc


def angle_repr(theta: Angle) -> str:
    return str(theta)


_contexts: Dict[int, Any] = {}
_contexts_lock = threading.Lock()


def context(prec: int) -> Any:
    """Contesto mpmath con `prec` bit di mantissa (creato una volta sola)."""
    ctx = _contexts.get(prec)
    if ctx is None:
        with _contexts_lock:
            ctx = _contexts.get(prec)
            if ctx is None:
                ctx = mpmath.MPContext()
                ctx.prec = prec
                _contexts[prec] = ctx
    return ctx


def to_fraction(t: Angle) -> Fraction:
    """Valore razionale esatto della rappresentazione."""
    if isinstance(t, RationalAngle):
        return t.value
    return Fraction(t.mantissa, 1 << t.bits)


def angle_error(t: Angle) -> Fraction:
    """Distanza massima tra la rappresentazione e il θ reale che rappresenta."""
    if isinstance(t, RationalAngle):
        return Fraction(0)
    return Fraction(1, 1 << t.effective_bits)


def is_zero(t: Angle) -> bool:
    return isinstance(t, RationalAngle) and t.p == 0


def is_third(t: Angle) -> bool:
    """True se t ∈ {1/3, 2/3}: il fattore (1+2cos 2πt)/3 è esattamente nullo."""
    return isinstance(t, RationalAngle) and t.q == 3


def times_int_mod1(theta: Angle, s: int) -> Angle:
    """Calcola s·θ mod 1.

    Argomenti:
        theta: angolo
        s: moltiplicatore intero (≥ 0)

    Ritorna:
        Un angolo dello stesso tipo; per i diadici `effective_bits` cala di bitlength(s)

    Raises:
        InsufficientPrecision: se il diadico non ha GUARD_BITS bit oltre bitlength(s)
    """
    if s < 0:
        raise ValueError("multiplier must be nonnegative")
    if isinstance(theta, RationalAngle):
        return RationalAngle(Fraction(s * theta.p % theta.q, theta.q))
    loss = s.bit_length()
    if theta.effective_bits < loss + GUARD_BITS:
        raise InsufficientPrecision(
            f"dyadic angle has {theta.effective_bits} effective bits, multiplier needs {loss + GUARD_BITS}"
        )
    return DyadicAngle(s * theta.mantissa, theta.bits, theta.effective_bits - loss)


def dist_nearest_int(t: Angle) -> Fraction:
    """‖t‖, distanza dall'intero più vicino, come frazione esatta della rappresentazione."""
    x = to_fraction(t)
    return min(x, 1 - x)


_EXACT_POINTS = {
    Fraction(0): (1, 0),
    Fraction(1, 4): (0, 1),
    Fraction(1, 2): (-1, 0),
    Fraction(3, 4): (0, -1),
}


def unit_exp(t: Angle, prec: Optional[int] = None) -> BoundedComplex:
    """Valuta e^{2iπt} con un limite d'errore.

    Argomenti:
        t: angolo
        prec: precisione di lavoro (default GOODSEQ_PRECISION_BITS)

    Ritorna:
        `BoundedComplex`; per i diadici l'errore include l'incertezza dell'angolo
    """
    prec = prec or get_settings().precision_bits
    if isinstance(t, RationalAngle):
        if t.value in _EXACT_POINTS:
            re_, im_ = _EXACT_POINTS[t.value]
            return BoundedComplex(re_, im_, Fraction(0))
        ctx = context(prec)
        x = ctx.mpf(t.p) / t.q
        return BoundedComplex(ctx.cospi(2 * x), ctx.sinpi(2 * x), Fraction(1, 1 << (prec - 4)))
    work = max(prec, t.bits + 16)
    ctx = context(work)
    x = ctx.ldexp(ctx.mpf(t.mantissa), -t.bits)
    # |d e^{2iπx}/dx| = 2π < 8
    err = 8 * angle_error(t) + Fraction(1, 1 << (work - 4))
    return BoundedComplex(ctx.cospi(2 * x), ctx.sinpi(2 * x), err)


_EXACT_FACTORS = {1: Fraction(1), 2: Fraction(-1, 3), 3: Fraction(0), 4: Fraction(1, 3), 6: Fraction(2, 3)}


def cos_factor(t: Angle, prec: Optional[int] = None) -> BoundedComplex:
    """Fattore (1 + 2cos 2πt)/3 come reale (im = 0), esatto per q ∈ {1, 2, 3, 4, 6}."""
    if isinstance(t, RationalAngle) and t.q in _EXACT_FACTORS:
        return BoundedComplex(_EXACT_FACTORS[t.q], 0, Fraction(0))
    e = unit_exp(t, prec)
    return BoundedComplex((1 + 2 * e.re) / 3, 0, e.err * 2 / 3)


def to_mpf(ctx: Any, value: Any) -> Any:
    """Converte int, Fraction o mpf (anche di un altro contesto) nel contesto dato."""
    if isinstance(value, Fraction):
        return ctx.mpf(value.numerator) / value.denominator
    return ctx.mpf(value)
