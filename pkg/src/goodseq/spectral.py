"""Funzione limite L(θ), medie di Cesàro e diagnostiche spettrali.

L_k(θ) = Π_{j<k} (1 + 2cos 2π m_jθ)/3 converge a L(θ), che coincide con il
limite delle medie (1/N) Σ_{n≤N} e^{2iπ s_nθ}. Le medie si calcolano termine
per termine (`direct_average`) o con la decomposizione in blocchi
(`block_average`, costo O(k_N^2)).

Per θ = p/q con q piccolo entrambe costruiscono l'istogramma esatto dei residui
s_n·p mod q, quindi coincidono esattamente.
"""
from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from goodseq.config import Policy, get_settings
from goodseq.errors import ConfigurationError, GoodSeqError, HorizonExceeded
from goodseq.lacunary import ModulusSequence, enumerate_stream, locate_rank
from goodseq.modone import (
    Angle,
    BoundedComplex,
    DyadicAngle,
    RationalAngle,
    angle_repr,
    context,
    cos_factor,
    dist_nearest_int,
    is_third,
    is_zero,
    times_int_mod1,
    to_fraction,
    to_mpf,
    unit_exp,
)

logger = logging.getLogger(__name__)

# 1 - (1 + 2cos 2πt)/3 ≤ (4π²/3)‖t‖²
FACTOR_LOSS = 4 * math.pi ** 2 / 3

# ‖t‖² < 1/9 implica un fattore strettamente positivo
POSITIVE_REGIME = Fraction(1, 9)

# celle int64 dei livelli di `block_histogram`, in multipli di GOODSEQ_EXACT_MODULUS_LIMIT
EXACT_CELLS_PER_MODULUS = 8

# majorante: k -> limite superiore di Σ_{j≥k} ‖m_jθ‖²
Majorant = Callable[[int], Any]

CSV_HEADER = ["theta", "repr", "L", "classification", "truncation_k", "tail_bound", "avg_re", "avg_im", "avg_err", "N"]


class Classification(str, Enum):
    ZERO_EXACT = "zero_exact"
    ZERO_BY_NONPOSITIVE_FACTORS = "zero_by_nonpositive_factors"
    POSITIVE_CONVERGED = "positive_converged"
    SIGNED_CONVERGED = "signed_converged"
    TRUNCATED = "truncated"


class Method(str, Enum):
    DIRECT = "direct"
    BLOCK = "block"


@dataclass(frozen=True)
class SpectralValue:
    """Stima di L(θ) con classificazione e limite sulla coda."""

    value: float
    classification: Classification
    truncation_k: int
    tail_bound: float
    err: float = 0.0

    @property
    def certified(self) -> bool:
        return self.classification is not Classification.TRUNCATED

    @property
    def nonzero(self) -> bool:
        return self.classification in (Classification.POSITIVE_CONVERGED, Classification.SIGNED_CONVERGED)


@dataclass(frozen=True)
class ProductTrace:
    """Prodotti parziali L_1..L_K (Fraction finché esatti, poi mpf)."""

    values: Tuple[Any, ...]
    factors: Tuple[Any, ...]
    errors: Tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CesaroEstimate:
    """Somma e media di Cesàro al passo N.

    `histogram` è l'elemento esatto di Z[Z/q] (conteggi dei residui s_n·p mod q)
    quando θ = p/q è trattato esattamente.
    """

    n: int
    total: BoundedComplex
    average: BoundedComplex
    method: Method
    err: float
    histogram: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    @property
    def exact(self) -> bool:
        return self.histogram is not None

    def matches(self, other: "CesaroEstimate") -> bool:
        """Uguaglianza esatta sugli istogrammi, altrimenti entro la somma degli errori."""
        if self.histogram is not None and other.histogram is not None:
            return bool(np.array_equal(self.histogram, other.histogram))
        diff = self.average.to_complex() - other.average.to_complex()
        return abs(diff) <= self.err + other.err


class GrowthKind(str, Enum):
    APPARENTLY_BOUNDED = "apparently_bounded"
    APPARENTLY_DIVERGENT = "apparently_divergent"


@dataclass(frozen=True)
class GrowthFlag:
    kind: GrowthKind
    # bound per APPARENTLY_BOUNDED, pendenza per APPARENTLY_DIVERGENT
    value: float


@dataclass(frozen=True)
class H2Report:
    K: int
    partial_sums: Tuple[Fraction, ...]
    growth_flag: GrowthFlag

    @property
    def total(self) -> Fraction:
        return self.partial_sums[-1] if self.partial_sums else Fraction(0)


def _working_precision(theta: Angle, prec: Optional[int] = None) -> int:
    prec = prec or get_settings().precision_bits
    if isinstance(theta, DyadicAngle):
        return max(prec, theta.bits + 16)
    return prec


def multiples(m: ModulusSequence, theta: Angle, K: int) -> Iterator[Angle]:
    """Genera m_jθ mod 1 per j = 1..K (per i razionali lavora sui residui m_j mod q)."""
    if isinstance(theta, RationalAngle):
        residues = m.residues(theta.q)
        for _ in range(K):
            yield RationalAngle(Fraction(next(residues) * theta.p % theta.q, theta.q))
        return
    for j in range(1, K + 1):
        yield times_int_mod1(theta, m[j])


def factor(t: Angle, prec: Optional[int] = None) -> BoundedComplex:
    """Fattore (1 + 2cos 2πt)/3 ∈ [-1/3, 1]."""
    return cos_factor(t, prec)


def _times(ctx: Any, value: Any, err: Fraction, f: BoundedComplex, rounding: Fraction) -> Tuple[Any, Fraction]:
    if isinstance(value, Fraction) and isinstance(f.re, Fraction):
        return value * f.re, err
    return to_mpf(ctx, value) * to_mpf(ctx, f.re), err + f.err + rounding


def partial_products(m: ModulusSequence, theta: Angle, K: int, prec: Optional[int] = None) -> ProductTrace:
    """Calcola L_1, ..., L_K con L_1 = 1 e L_{k+1} = L_k·(1 + 2cos 2π m_kθ)/3.

    Argomenti:
        m: successione di moduli
        theta: angolo
        K: numero di prodotti richiesti (≥ 1)
        prec: precisione di lavoro in bit

    Ritorna:
        `ProductTrace` con valori, fattori ed errori accumulati
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    prec = _working_precision(theta, prec)
    ctx = context(prec)
    rounding = Fraction(1, 1 << (prec - 2))
    values: List[Any] = [Fraction(1)]
    errors: List[Fraction] = [Fraction(0)]
    factors: List[Any] = []
    for t in multiples(m, theta, K - 1):
        f = factor(t, prec)
        factors.append(f.re)
        value, err = _times(ctx, values[-1], errors[-1], f, rounding)
        values.append(value)
        errors.append(err)
    return ProductTrace(tuple(values), tuple(factors), tuple(errors))


def _converged(value: Any, signed: bool, k: int, tail_bound: float, err: Fraction) -> SpectralValue:
    classification = Classification.SIGNED_CONVERGED if signed else Classification.POSITIVE_CONVERGED
    return SpectralValue(float(value), classification, k, tail_bound, float(err))


def limit_L(
    m: ModulusSequence,
    theta: Angle,
    policy: Optional[Policy] = None,
    majorant: Optional[Majorant] = None,
) -> SpectralValue:
    """Stima certificata di L(θ).

    La coda viene certificata da:
    - un fattore esattamente nullo (m_jθ ≡ ±1/3)
    - una coda intera (m_jθ ≡ 0 e rapporti interi: tutti i fattori successivi valgono 1)
    - un majorante Σ_{j≥k} ‖m_jθ‖² < 1/9 con perdita relativa (4π²/3)·coda sotto tail_tol

    Senza certificazione il risultato è TRUNCATED con |L_{K_max}|.
    """
    policy = policy or Policy.default()
    if policy.k_max < 2 or policy.tail_tol <= 0:
        raise ConfigurationError("policy needs k_max >= 2 and tail_tol > 0")
    if is_zero(theta):
        return SpectralValue(1.0, Classification.POSITIVE_CONVERGED, 1, 0.0, 0.0)
    prec = _working_precision(theta, policy.precision_bits)
    ctx = context(prec)
    rounding = Fraction(1, 1 << (prec - 2))
    value: Any = Fraction(1)
    err = Fraction(0)
    signed = False
    k = 1
    factors = multiples(m, theta, policy.k_max - 1)
    while True:
        try:
            t = next(factors)
        except StopIteration:
            break
        except HorizonExceeded as exc:
            logger.info("⚠ %s: product truncated at k=%d", exc, k)
            break
        k += 1
        if is_third(t):
            return SpectralValue(0.0, Classification.ZERO_EXACT, k, 0.0, 0.0)
        f = factor(t, prec)
        value, err = _times(ctx, value, err, f, rounding)
        if f.re <= 0:
            signed = True
        if is_zero(t) and m.integer_ratios:
            return _converged(value, signed, k, float(err), err)
        if majorant is not None:
            tail = Fraction(majorant(k))
            if tail < POSITIVE_REGIME:
                loss = abs(float(value)) * FACTOR_LOSS * float(tail)
                if loss <= policy.tail_tol:
                    return _converged(value, signed, k, loss + float(err), err)
    if signed and abs(to_mpf(ctx, value)) < policy.tail_tol:
        return SpectralValue(0.0, Classification.ZERO_BY_NONPOSITIVE_FACTORS, k, abs(float(value)) + float(err), float(err))
    return SpectralValue(abs(float(value)), Classification.TRUNCATED, k, math.inf, float(err))


def _exact_track(theta: Angle, N: int) -> bool:
    """Istogrammi esatti solo se q e i k_N livelli da q celle restano nei limiti."""
    if not isinstance(theta, RationalAngle):
        return False
    limit = get_settings().exact_modulus_limit
    return theta.q <= limit and theta.q * locate_rank(N + 1).k <= EXACT_CELLS_PER_MODULUS * limit


def _count_dtype(N: int) -> Any:
    return np.int64 if N < (1 << 62) else object


def _histogram_total(hist: np.ndarray, q: int, N: int, prec: int) -> BoundedComplex:
    """Valuta Σ_r hist[r]·e^{2iπr/q}."""
    ctx = context(prec)
    re_terms, im_terms = [], []
    err = Fraction(2 * N, 1 << prec)
    for r in np.flatnonzero(hist):
        count = int(hist[r])
        e = unit_exp(RationalAngle(Fraction(int(r), q)), prec)
        re_terms.append(count * to_mpf(ctx, e.re))
        im_terms.append(count * to_mpf(ctx, e.im))
        err += count * e.err
    return BoundedComplex(ctx.fsum(re_terms), ctx.fsum(im_terms), err)


def _estimate(N: int, total: BoundedComplex, method: Method, prec: int, hist: Optional[np.ndarray] = None) -> CesaroEstimate:
    ctx = context(prec)
    average = BoundedComplex(to_mpf(ctx, total.re) / N, to_mpf(ctx, total.im) / N, total.err / N)
    return CesaroEstimate(N, total, average, method, float(average.err), hist)


def direct_histogram(m: ModulusSequence, theta: RationalAngle, N: int) -> np.ndarray:
    """Istogramma dei residui s_n·p mod q per n ≤ N."""
    p, q = theta.p, theta.q
    residues = np.fromiter((s * p % q for s in enumerate_stream(m, N)), dtype=np.int64, count=N)
    return np.bincount(residues, minlength=q).astype(_count_dtype(N))


def block_histogram(m: ModulusSequence, theta: RationalAngle, N: int) -> np.ndarray:
    """Lo stesso istogramma di `direct_histogram` tramite la decomposizione in blocchi.

    H_1 = δ_0 e H_{j+1} = H_j + H_j(· − a_j) + H_j(· + a_j), con a_j = m_j·p mod q:
    il blocco j contribuisce H_j traslato di a_j, il blocco parziale k_N le
    traslazioni di H_j per u_j(ω), ω < ω_j(N).
    """
    p, q = theta.p, theta.q
    idx = locate_rank(N + 1)
    k_n = idx.k
    residues = list(itertools.islice(m.residues(q), k_n - 1))
    shifts = [r * p % q for r in residues]
    hist = np.zeros(q, dtype=_count_dtype(N))
    hist[0] = 1
    levels = [hist]
    total = np.zeros(q, dtype=hist.dtype)
    for a in shifts:
        current = levels[-1]
        total += np.roll(current, a)
        levels.append(current + np.roll(current, a) + np.roll(current, -a))
    if any(d > -1 for d in idx.digits):
        top = m[k_n] * p % q
        for j in range(k_n - 1, 0, -1):
            digit = idx.digits[j - 1]
            for w in range(-1, digit):
                total += np.roll(levels[j - 1], (top + w * shifts[j - 1]) % q)
            top = (top + digit * shifts[j - 1]) % q
    return total


def direct_average(m: ModulusSequence, theta: Angle, N: int, prec: Optional[int] = None) -> CesaroEstimate:
    """Media (1/N) Σ_{n≤N} e^{2iπ s_nθ} calcolata termine per termine."""
    if N < 1:
        raise ValueError("N must be >= 1")
    prec = _working_precision(theta, prec)
    if _exact_track(theta, N):
        hist = direct_histogram(m, theta, N)
        return _estimate(N, _histogram_total(hist, theta.q, N, prec), Method.DIRECT, prec, hist)
    ctx = context(prec)
    re_terms, im_terms = [], []
    err = Fraction(2 * N, 1 << prec)
    for s in enumerate_stream(m, N):
        e = unit_exp(times_int_mod1(theta, s), prec)
        re_terms.append(e.re)
        im_terms.append(e.im)
        err += e.err
    total = BoundedComplex(ctx.fsum(re_terms), ctx.fsum(im_terms), err)
    return _estimate(N, total, Method.DIRECT, prec)


def block_average(m: ModulusSequence, theta: Angle, N: int, prec: Optional[int] = None) -> CesaroEstimate:
    """Media di Cesàro tramite la decomposizione in blocchi (O(k_N^2) valutazioni).

    Σ = Σ_{j<k_N} 3^{j-1} e(m_jθ) L_j + Σ_{j<k_N} Σ_{ω<ω_j(N)} 3^{j-1} e(u_j(ω)θ) L_j,
    con k_N e ω(N) presi dall'indirizzo di s_{N+1}.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    prec = _working_precision(theta, prec)
    if _exact_track(theta, N):
        hist = block_histogram(m, theta, N)
        return _estimate(N, _histogram_total(hist, theta.q, N, prec), Method.BLOCK, prec, hist)
    ctx = context(prec)
    idx = locate_rank(N + 1)
    k_n = idx.k
    trace = partial_products(m, theta, k_n, prec)
    rounding = Fraction(1, 1 << (prec - 2))
    re_terms, im_terms = [], []
    err = Fraction(0)

    def add(j: int, u: int) -> None:
        nonlocal err
        weight = 3 ** (j - 1)
        e = unit_exp(times_int_mod1(theta, u), prec)
        scale = weight * to_mpf(ctx, trace.values[j - 1])
        re_terms.append(scale * to_mpf(ctx, e.re))
        im_terms.append(scale * to_mpf(ctx, e.im))
        err += weight * (e.err + trace.errors[j - 1] + rounding)

    for j in range(1, k_n):
        add(j, m[j])
    if any(d > -1 for d in idx.digits):
        top = m[k_n]
        for j in range(k_n - 1, 0, -1):
            digit = idx.digits[j - 1]
            for w in range(-1, digit):
                add(j, top + w * m[j])
            top += digit * m[j]
    total = BoundedComplex(ctx.fsum(re_terms), ctx.fsum(im_terms), err)
    return _estimate(N, total, Method.BLOCK, prec)


def cesaro_average(m: ModulusSequence, theta: Angle, N: int, method: Method = Method.DIRECT, prec: Optional[int] = None) -> CesaroEstimate:
    if Method(method) is Method.BLOCK:
        return block_average(m, theta, N, prec)
    return direct_average(m, theta, N, prec)


def h2_diagnostic(m: ModulusSequence, theta: Angle, K: int, tol: Optional[float] = None) -> H2Report:
    """Somme parziali Σ_{j≤k} ‖m_jθ‖² per k ≤ K e andamento dell'ultimo quarto.

    Non solleva mai: se la precisione o l'orizzonte finiscono, le somme si fermano
    all'ultimo indice disponibile.
    """
    tol = get_settings().h2_tol if tol is None else tol
    sums: List[Fraction] = []
    running = Fraction(0)
    try:
        for t in multiples(m, theta, K):
            running += dist_nearest_int(t) ** 2
            sums.append(running)
    except GoodSeqError as exc:
        logger.info("⚠ H2 diagnostic stopped after %d terms: %s", len(sums), exc)
    horizon = len(sums)
    if horizon == 0:
        return H2Report(0, (), GrowthFlag(GrowthKind.APPARENTLY_BOUNDED, 0.0))
    start = (3 * horizon) // 4
    increment = sums[-1] - (sums[start - 1] if start > 0 else Fraction(0))
    if increment <= tol:
        flag = GrowthFlag(GrowthKind.APPARENTLY_BOUNDED, float(sums[-1]))
    else:
        flag = GrowthFlag(GrowthKind.APPARENTLY_DIVERGENT, float(increment) / (horizon - start))
    return H2Report(horizon, tuple(sums), flag)


@dataclass(frozen=True)
class ScanRow:
    theta: Angle
    label: str
    spectral: Optional[SpectralValue] = None
    estimate: Optional[CesaroEstimate] = None
    blocks_match: Optional[bool] = None
    error: Optional[str] = None


def spectrum_scan(
    m: ModulusSequence,
    angles: Sequence[Angle],
    policy: Optional[Policy] = None,
    n: Optional[int] = None,
    method: Method = Method.DIRECT,
    check_blocks: bool = False,
    majorants: Optional[Sequence[Optional[Majorant]]] = None,
    labels: Optional[Sequence[str]] = None,
) -> List[ScanRow]:
    """Tabula L(θ) (e facoltativamente la media di Cesàro al passo n) per ogni angolo.

    Argomenti:
        m: successione di moduli
        angles: angoli da valutare, nell'ordine di uscita
        policy: politica di troncamento
        n: se dato, aggiunge la media di Cesàro con `method`
        check_blocks: calcola entrambe le medie e registra `blocks_match`
        majorants: majoranti opzionali allineati agli angoli
        labels: etichette per la colonna repr

    Ritorna:
        Una riga per angolo, nello stesso ordine; gli errori restano nella riga
    """
    policy = policy or Policy.default()
    angles = list(angles)
    majorants = list(majorants) if majorants is not None else [None] * len(angles)
    labels = list(labels) if labels is not None else [angle_repr(a) for a in angles]
    if check_blocks and n is None:
        raise ConfigurationError("check_blocks needs a Cesàro length n")

    def evaluate(i: int) -> ScanRow:
        theta = angles[i]
        try:
            value = limit_L(m, theta, policy, majorants[i])
            estimate = None
            match = None
            if n is not None:
                estimate = cesaro_average(m, theta, n, method, policy.precision_bits)
                if check_blocks:
                    other = Method.BLOCK if Method(method) is Method.DIRECT else Method.DIRECT
                    match = estimate.matches(cesaro_average(m, theta, n, other, policy.precision_bits))
            return ScanRow(theta, labels[i], value, estimate, match)
        except GoodSeqError as exc:
            logger.warning("⚠ scan row %s failed: %s", labels[i], exc)
            return ScanRow(theta, labels[i], error=f"{type(exc).__name__}: {exc}")

    threads = get_settings().threads
    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(evaluate, range(len(angles))))
    logger.info("✓ scanned %d angles (%d threads)", len(rows), threads)
    return rows


def scan_record(row: ScanRow) -> Dict[str, Any]:
    """Colonne CSV/JSON di una riga di scansione (numeri ancora non formattati)."""
    record: Dict[str, Any] = {
        "theta": float(to_fraction(row.theta)),
        "repr": row.label,
        "L": None,
        "classification": row.error or None,
        "truncation_k": None,
        "tail_bound": None,
        "avg_re": None,
        "avg_im": None,
        "avg_err": None,
        "N": None,
    }
    if row.spectral is not None:
        record.update(
            L=row.spectral.value,
            classification=row.spectral.classification.value,
            truncation_k=row.spectral.truncation_k,
            tail_bound=row.spectral.tail_bound,
        )
    if row.estimate is not None:
        average = row.estimate.average.to_complex()
        record.update(avg_re=average.real, avg_im=average.imag, avg_err=row.estimate.err, N=row.estimate.n)
    if row.blocks_match is not None:
        record["blocks_match"] = row.blocks_match
    return record
