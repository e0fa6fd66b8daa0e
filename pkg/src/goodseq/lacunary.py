"""Moduli lacunari e successione buona S.

Costruisce le famiglie di moduli (m_j), ne verifica le condizioni di crescita e
enumera in ordine crescente gli interi

    m_k + Σ_{1≤j≤k-1} ω_j m_j,   ω_j ∈ {-1, 0, 1}

con aritmetica intera esatta. Il blocco k contiene 3^{k-1} elementi; le cifre
sono lette dalla più significativa (ω_{k-1}) alla meno significativa (ω_1).
"""
from __future__ import annotations

import itertools
import logging
import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Optional, Tuple, Union

from goodseq.config import get_settings
from goodseq.errors import (
    ConfigurationError,
    HorizonExceeded,
    NonPositive,
    NotIncreasing,
    RatioTooSmall,
)
from goodseq.memo import MemoRepository

logger = logging.getLogger(__name__)

# decadimento richiesto ai termini di (A1) per il suggerimento "sommabile"
GEOMETRIC_DECAY = Fraction(1, 2)


class Family(str, Enum):
    EXPLICIT = "explicit"
    GEOMETRIC = "geometric"
    FACTORIAL_SHIFT = "factorial_shift"
    CUSTOM = "custom"


class RuleKind(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    POWER = "power"
    SQUARE = "square"


@dataclass(frozen=True)
class RatioRule:
    """Generatore serializzabile del rapporto intero r_j = m_{j+1}/m_j.

    - constant: r_j = a
    - linear:   r_j = a*j + b
    - power:    r_j = coef * base^(a*j + b)
    - square:   r_j = coef * m_j
    """

    kind: RuleKind
    a: int = 0
    b: int = 0
    base: int = 2
    coef: int = 1

    def __post_init__(self) -> None:
        if self.kind is RuleKind.POWER and (self.a < 0 or self.a + self.b < 0 or self.base < 1):
            raise ConfigurationError("power rule needs base >= 1 and a nonnegative exponent a*j+b")
        if self.coef < 1:
            raise NonPositive("ratio rule coefficient must be positive")

    def __call__(self, j: int, m_j: int) -> int:
        if self.kind is RuleKind.CONSTANT:
            return self.a
        if self.kind is RuleKind.LINEAR:
            return self.a * j + self.b
        if self.kind is RuleKind.POWER:
            return self.coef * self.base ** (self.a * j + self.b)
        return self.coef * m_j

    @property
    def monotone(self) -> bool:
        """True se r_j è non decrescente in j."""
        if self.kind is RuleKind.LINEAR:
            return self.a >= 0
        return True

    @property
    def needs_value(self) -> bool:
        return self.kind is RuleKind.SQUARE

    def to_json(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "a": self.a, "b": self.b, "base": self.base, "coef": self.coef}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "RatioRule":
        try:
            return cls(
                kind=RuleKind(data["kind"]),
                a=int(data.get("a", 0)),
                b=int(data.get("b", 0)),
                base=int(data.get("base", 2)),
                coef=int(data.get("coef", 1)),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigurationError(f"malformed ratio rule: {data!r}") from exc


Rule = Union[RatioRule, Callable[[int, int], int]]


@dataclass(frozen=True)
class FamilyDescriptor:
    """Descrittore di una famiglia di moduli (serializzabile in JSON)."""

    family: Family
    base: Optional[int] = None
    offset: Optional[int] = None
    values: Optional[Tuple[int, ...]] = None
    first: Optional[int] = None
    rule: Optional[Rule] = None

    @classmethod
    def geometric(cls, base: int) -> "FamilyDescriptor":
        return cls(Family.GEOMETRIC, base=base)

    @classmethod
    def factorial_shift(cls, offset: int) -> "FamilyDescriptor":
        return cls(Family.FACTORIAL_SHIFT, offset=offset)

    @classmethod
    def explicit(cls, values: List[int]) -> "FamilyDescriptor":
        return cls(Family.EXPLICIT, values=tuple(int(v) for v in values))

    @classmethod
    def custom(cls, first: int, rule: Rule) -> "FamilyDescriptor":
        return cls(Family.CUSTOM, first=first, rule=rule)

    def to_json(self) -> Dict[str, Any]:
        """Serializza il descrittore; gli interi grandi diventano stringhe decimali."""
        if self.family is Family.GEOMETRIC:
            return {"family": "geometric", "base": self.base}
        if self.family is Family.FACTORIAL_SHIFT:
            return {"family": "factorial_shift", "offset": self.offset}
        if self.family is Family.EXPLICIT:
            return {"family": "explicit", "values": [str(v) for v in self.values or ()]}
        if not isinstance(self.rule, RatioRule):
            raise ConfigurationError("custom families with a Python callable cannot be serialized")
        return {"family": "custom", "first": str(self.first), "ratio": self.rule.to_json()}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "FamilyDescriptor":
        try:
            family = Family(data["family"])
            if family is Family.GEOMETRIC:
                return cls.geometric(int(data["base"]))
            if family is Family.FACTORIAL_SHIFT:
                return cls.factorial_shift(int(data["offset"]))
            if family is Family.EXPLICIT:
                return cls.explicit([int(v) for v in data["values"]])
            return cls.custom(int(data["first"]), RatioRule.from_json(data["ratio"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigurationError(f"malformed family descriptor: {data!r}") from exc

    @classmethod
    def parse(cls, text: str) -> "FamilyDescriptor":
        """Analizza la forma abbreviata usata dalla CLI.

        Argomenti:
            text: es. "geometric:3", "factorial:2", "explicit:3,9,20",
                  "squaring:3:3", "power:2:2:2:1"

        Ritorna:
            Il descrittore corrispondente
        """
        text = text.strip()
        if match := re.match(r"^geometric:(\d+)$", text):
            return cls.geometric(int(match.group(1)))
        if match := re.match(r"^factorial:(\d+)$", text):
            return cls.factorial_shift(int(match.group(1)))
        if match := re.match(r"^explicit:(-?\d+(?:,-?\d+)*)$", text):
            return cls.explicit([int(v) for v in match.group(1).split(",")])
        if match := re.match(r"^squaring:(\d+)(?::(\d+))?$", text):
            coef = int(match.group(2) or 1)
            return cls.custom(int(match.group(1)), RatioRule(RuleKind.SQUARE, coef=coef))
        if match := re.match(r"^power:(\d+):(\d+):(\d+):(-?\d+)$", text):
            first, base, a, b = (int(g) for g in match.groups())
            return cls.custom(first, RatioRule(RuleKind.POWER, a=a, b=b, base=base))
        raise ConfigurationError(f"unrecognised family {text!r}")


class ModulusSequence:
    """Successione lacunare (m_j)_{j≥1} con rapporti ≥ 3, calcolata pigramente.

    I valori generati vengono memorizzati in un `MemoRepository` condiviso
    in modo sicuro tra thread lettori.
    """

    def __init__(self, descriptor: FamilyDescriptor, max_index: Optional[int] = None):
        self.descriptor = descriptor
        self.max_index = max_index if max_index is not None else get_settings().max_index
        self._explicit: Optional[Tuple[int, ...]] = None
        self._memo: Optional[MemoRepository] = None
        if descriptor.family is Family.EXPLICIT:
            self._explicit = _validate_explicit(descriptor.values or ())
        else:
            first, producer = self._generator()
            self._memo = MemoRepository(first, producer, self.max_index)

    def _generator(self) -> Tuple[int, Callable[[int, int], int]]:
        d = self.descriptor
        if d.family is Family.GEOMETRIC:
            if d.base is None or d.base < 3:
                raise RatioTooSmall(f"geometric base {d.base} < 3")
            base = d.base
            return base, lambda j, m: m * base
        if d.family is Family.FACTORIAL_SHIFT:
            if d.offset is None or d.offset < 1:
                # m_2/m_1 = offset + 2
                raise RatioTooSmall(f"factorial offset {d.offset} gives a ratio below 3")
            offset = d.offset
            return math.factorial(1 + offset), lambda j, m: m * (j + offset + 1)
        if d.first is None or d.first < 1:
            raise NonPositive(f"first modulus {d.first} is not positive")
        if d.rule is None:
            raise ConfigurationError("custom family needs a ratio rule")
        rule = d.rule

        def produce(j: int, m: int) -> int:
            r = rule(j, m)
            if not isinstance(r, int):
                raise ConfigurationError(f"ratio r_{j} = {r!r} is not an integer")
            if r < 3:
                raise RatioTooSmall(f"ratio m_{j + 1}/m_{j} = {r} < 3")
            return m * r

        return d.first, produce

    def __repr__(self) -> str:
        return f"ModulusSequence({self.descriptor.family.value})"

    def __getitem__(self, j: int) -> int:
        if j < 1:
            raise IndexError("moduli are indexed from 1")
        if self._explicit is not None:
            if j > len(self._explicit):
                raise HorizonExceeded(f"explicit list has only {len(self._explicit)} moduli (asked m_{j})")
            return self._explicit[j - 1]
        if j > self.max_index:
            raise HorizonExceeded(f"index {j} exceeds the materialization limit {self.max_index}")
        return self._memo.extend_to(j)

    def prefix(self, k: int) -> List[int]:
        """Ritorna [m_1, ..., m_k]."""
        return [self[j] for j in range(1, k + 1)]

    @property
    def finite_length(self) -> Optional[int]:
        return len(self._explicit) if self._explicit is not None else None

    @property
    def integer_ratios(self) -> bool:
        """True se m_j | m_{j+1} per ogni j (famiglie generate)."""
        return self._explicit is None

    @property
    def monotone_ratio(self) -> bool:
        """True se la formula del rapporto m_j/m_{j-1} è non decrescente."""
        d = self.descriptor
        if d.family in (Family.GEOMETRIC, Family.FACTORIAL_SHIFT):
            return True
        if d.family is Family.CUSTOM and isinstance(d.rule, RatioRule):
            return d.rule.monotone
        return False

    def divides_chain(self, upto: int) -> bool:
        """Verifica m_j | m_{j+1} per ogni j < upto (entro i valori disponibili)."""
        if self.integer_ratios:
            return True
        values = self._explicit[:upto]
        return all(b % a == 0 for a, b in zip(values, values[1:]))

    def ratio_at(self, j: int) -> Fraction:
        """Rapporto m_j/m_{j-1} per j ≥ 2, senza materializzare m_j quando possibile."""
        if j < 2:
            raise IndexError("ratio m_j/m_{j-1} needs j >= 2")
        d = self.descriptor
        if d.family is Family.GEOMETRIC:
            return Fraction(d.base)
        if d.family is Family.FACTORIAL_SHIFT:
            return Fraction(j + d.offset)
        if d.family is Family.CUSTOM and isinstance(d.rule, RatioRule) and not d.rule.needs_value:
            return Fraction(d.rule(j - 1, 0))
        return Fraction(self[j], self[j - 1])

    def first_index_with_ratio_above(self, bound: Union[int, Fraction], start: int = 2) -> Optional[int]:
        """Minimo j ≥ start con m_j/m_{j-1} > bound.

        Per le formule monotone il calcolo è simbolico e l'indice trovato può
        superare il limite di materializzazione.

        Argomenti:
            bound: soglia (intera o razionale)
            start: primo indice ammesso (almeno 2)

        Ritorna:
            L'indice trovato oppure None
        """
        start = max(start, 2)
        bound = Fraction(bound)
        floor_b = math.floor(bound)
        d = self.descriptor
        if d.family is Family.GEOMETRIC:
            return start if d.base > bound else None
        if d.family is Family.FACTORIAL_SHIFT:
            return max(start, floor_b + 1 - d.offset)
        if d.family is Family.CUSTOM and isinstance(d.rule, RatioRule):
            rule = d.rule
            if rule.kind is RuleKind.CONSTANT or (rule.kind is RuleKind.POWER and rule.a == 0):
                return start if self.ratio_at(start) > bound else None
            if rule.kind is RuleKind.LINEAR and rule.a > 0:
                # a*(j-1) + b > bound  <=>  j-1 >= ceil((floor_b + 1 - b) / a)
                need = floor_b + 1 - rule.b
                return max(start, 1 - (-need // rule.a))
        limit = self.finite_length or self.max_index
        j = start
        while j <= limit:
            if self.ratio_at(j) > bound:
                return j
            j += 1
        return None

    def residues(self, q: int) -> Iterator[int]:
        """Genera m_1 mod q, m_2 mod q, ... senza materializzare i moduli.

        Il rapporto r_j viene ridotto mod q quando la sua formula è nota;
        le regole arbitrarie e le liste esplicite usano i valori veri.
        """
        d = self.descriptor
        if self._explicit is not None or (d.family is Family.CUSTOM and not isinstance(d.rule, RatioRule)):
            yield from (self[j] % q for j in itertools.count(1))
            return
        if d.family is Family.GEOMETRIC:
            first, ratio = d.base, lambda j, r: d.base
        elif d.family is Family.FACTORIAL_SHIFT:
            first, ratio = math.factorial(1 + d.offset), lambda j, r: j + d.offset + 1
        else:
            rule = d.rule
            first = d.first
            if rule.kind is RuleKind.SQUARE:
                if rule.coef * first < 3:
                    raise RatioTooSmall(f"ratio m_2/m_1 = {rule.coef * first} < 3")
                ratio = lambda j, r: rule.coef * r
            elif rule.kind is RuleKind.POWER:
                ratio = lambda j, r: rule.coef * pow(rule.base, rule.a * j + rule.b, q)
            else:
                ratio = rule
        r = first % q
        j = 1
        while True:
            yield r
            if d.family is Family.CUSTOM and not d.rule.needs_value and self.ratio_at(j + 1) < 3:
                raise RatioTooSmall(f"ratio m_{j + 1}/m_{j} = {self.ratio_at(j + 1)} < 3")
            r = r * ratio(j, r) % q
            j += 1

    def to_json(self) -> Dict[str, Any]:
        return self.descriptor.to_json()

    def memo_stats(self) -> Dict[str, Any]:
        if self._memo is None:
            return {"entries": len(self._explicit), "explicit": True}
        return self._memo.stats()


def _validate_explicit(values: Tuple[int, ...]) -> Tuple[int, ...]:
    if not values:
        raise ConfigurationError("explicit family needs at least one modulus")
    if any(v <= 0 for v in values):
        raise NonPositive("explicit moduli must be positive")
    for j, (a, b) in enumerate(zip(values, values[1:]), start=1):
        if b <= a:
            raise NotIncreasing(f"m_{j + 1} = {b} is not larger than m_{j} = {a}")
        if 3 * a > b:
            raise RatioTooSmall(f"m_{j + 1}/m_{j} = {b}/{a} < 3")
    return tuple(values)


def build_modulus(spec: Union[FamilyDescriptor, Dict[str, Any], str], max_index: Optional[int] = None) -> ModulusSequence:
    """Costruisce una successione di moduli da un descrittore.

    Argomenti:
        spec: descrittore, dizionario JSON o forma abbreviata ("geometric:3")
        max_index: limite di materializzazione (default dalle impostazioni)

    Ritorna:
        La `ModulusSequence` validata (liste esplicite subito, famiglie generate all'accesso)
    """
    if isinstance(spec, str):
        spec = FamilyDescriptor.parse(spec)
    elif isinstance(spec, dict):
        spec = FamilyDescriptor.from_json(spec)
    return ModulusSequence(spec, max_index=max_index)


class Verdict(str, Enum):
    A1_PLAUSIBLE = "a1_plausible"
    A2_HOLDS = "a2_holds_up_to_horizon"
    BOTH = "both"
    NEITHER = "neither"


@dataclass(frozen=True)
class ConditionReport:
    """Diagnostica a orizzonte finito delle condizioni (A1)/(A2); non è una prova."""

    horizon: int
    a1_partial_sum: Fraction
    a1_terms_summable_hint: bool
    a2_divisible: bool
    a2_ratio_increasing: bool
    verdict: Verdict

    @property
    def a2_holds(self) -> bool:
        return self.verdict in (Verdict.A2_HOLDS, Verdict.BOTH)


def check_conditions(m: ModulusSequence, K: int) -> ConditionReport:
    """Calcola la diagnostica (A1)/(A2) sui primi K moduli.

    Argomenti:
        m: successione di moduli
        K: orizzonte (almeno 2)

    Ritorna:
        `ConditionReport` con somma parziale esatta di (m_j/m_{j+1})^2, j < K
    """
    if K < 2:
        raise ConfigurationError("check_conditions needs K >= 2")
    if m.finite_length is not None:
        K = min(K, m.finite_length)
    values = m.prefix(K)
    terms = [Fraction(a, b) ** 2 for a, b in zip(values, values[1:])]
    ratios = [Fraction(b, a) for a, b in zip(values, values[1:])]
    hint = len(terms) >= 2 and all(t2 <= t1 * GEOMETRIC_DECAY for t1, t2 in zip(terms, terms[1:]))
    divisible = all(b % a == 0 for a, b in zip(values, values[1:]))
    increasing = all(r1 < r2 for r1, r2 in zip(ratios, ratios[1:]))
    a2 = divisible and increasing
    if hint and a2:
        verdict = Verdict.BOTH
    elif hint:
        verdict = Verdict.A1_PLAUSIBLE
    elif a2:
        verdict = Verdict.A2_HOLDS
    else:
        verdict = Verdict.NEITHER
    return ConditionReport(
        horizon=K,
        a1_partial_sum=sum(terms, Fraction(0)),
        a1_terms_summable_hint=hint,
        a2_divisible=divisible,
        a2_ratio_increasing=increasing,
        verdict=verdict,
    )


@dataclass(frozen=True)
class BalancedTernaryIndex:
    """Indirizzo (k, ω_1..ω_{k-1}) di un elemento di S; la cifra j moltiplica m_j."""

    k: int
    digits: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("block index k must be >= 1")
        if len(self.digits) != self.k - 1:
            raise ValueError(f"block {self.k} needs {self.k - 1} digits, got {len(self.digits)}")
        if any(d not in (-1, 0, 1) for d in self.digits):
            raise ValueError("balanced ternary digits must be in {-1, 0, 1}")


def block_range(k: int) -> Tuple[int, int]:
    """Rango del primo e dell'ultimo elemento del blocco k."""
    return (3 ** (k - 1) - 1) // 2 + 1, (3 ** k - 1) // 2


def locate_rank(n: int) -> BalancedTernaryIndex:
    """Blocco k e cifre del rango n; non dipende dai valori dei moduli."""
    if n < 1:
        raise ValueError("ranks start at 1")
    k = 1
    while (3 ** k - 1) // 2 < n:
        k += 1
    offset = n - 1 - (3 ** (k - 1) - 1) // 2
    digits = []
    for _ in range(k - 1):
        offset, d = divmod(offset, 3)
        digits.append(d - 1)
    return BalancedTernaryIndex(k, tuple(digits))


def rank_to_index(m: ModulusSequence, n: int) -> BalancedTernaryIndex:
    """Indirizzo dell'n-esimo elemento di S.

    Per le liste esplicite verifica anche che il blocco k esista.
    """
    idx = locate_rank(n)
    if m.finite_length is not None and idx.k > m.finite_length:
        raise HorizonExceeded(f"rank {n} lies in block {idx.k}, beyond the {m.finite_length} explicit moduli")
    return idx


def index_to_rank(idx: BalancedTernaryIndex) -> int:
    offset = sum((d + 1) * 3 ** i for i, d in enumerate(idx.digits))
    return (3 ** (idx.k - 1) - 1) // 2 + 1 + offset


def index_to_element(m: ModulusSequence, idx: BalancedTernaryIndex) -> int:
    return m[idx.k] + sum(d * m[j] for j, d in enumerate(idx.digits, start=1) if d)


def element_at(m: ModulusSequence, n: int) -> int:
    """Ritorna s_n."""
    return index_to_element(m, rank_to_index(m, n))


def block_elements(m: ModulusSequence, k: int) -> Iterator[int]:
    """Elementi del blocco k in ordine lessicografico (cifra più significativa prima)."""
    top = m[k]
    desc = [m[j] for j in range(k - 1, 0, -1)]
    for combo in itertools.product((-1, 0, 1), repeat=k - 1):
        yield top + sum(w * v for w, v in zip(combo, desc) if w)


def enumerate_stream(m: ModulusSequence, N: int) -> Iterator[int]:
    """Genera s_1, ..., s_N in ordine strettamente crescente."""
    if N < 1:
        raise ValueError("N must be >= 1")
    produced = 0
    k = 1
    while True:
        for value in block_elements(m, k):
            yield value
            produced += 1
            if produced == N:
                return
        k += 1


def _rank_within(m: ModulusSequence, y: int, d: int) -> int:
    """Quanti vettori (ω_1..ω_d) hanno Σ ω_j m_j ≤ y."""
    below = [0]
    for j in range(1, d + 1):
        below.append(below[-1] + m[j])
    count = 0
    for i in range(d, 0, -1):
        mi = m[i]
        for w in (-1, 0, 1):
            if y >= w * mi + below[i - 1]:
                count += 3 ** (i - 1)
                continue
            if y >= w * mi - below[i - 1]:
                y -= w * mi
                break
            return count
        else:
            return count
    return count + (1 if y >= 0 else 0)


def count_up_to(m: ModulusSequence, x: int) -> int:
    """Numero di elementi di S minori o uguali a x (π_S(x)).

    Usa l'aritmetica dei blocchi e una ricerca del rango nel blocco,
    senza mai enumerare S.
    """
    if x < m[1]:
        return 0
    k = 1
    partial = 0
    while True:
        try:
            next_min = m[k + 1] - (partial + m[k])
        except HorizonExceeded:
            break
        if next_min > x:
            break
        partial += m[k]
        k += 1
    return (3 ** (k - 1) - 1) // 2 + _rank_within(m, x - m[k], k - 1)
