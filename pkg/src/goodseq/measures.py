"""Punti θ(η), misura continua μ e misura di Dirichlet ν.

- `select_subsequence`: indici j_1 < j_2 < ... con m_j/m_{j-1} > 2^{k+2}
  (modalità prop5) o > 2^{k+2}·m_{j_{k-1}} (modalità thm6) per ogni j ≥ j_k
- `theta_of_eta`: θ(η) = Σ η_k/m_{j_k}, razionale esatto
- `mu_hat`: μ̂(s) = Π_k (1 + e^{2iπ s/m_{j_k}})/2, legge di e^{2iπθ(ξ)} con ξ bit equi
- `wiener_average`: (1/N)Σ μ̂(s_n) e (1/N)Σ |μ̂(s_n)|²
- `dirichlet_check`: code Σ_j ‖m_{j_n} m_j θ‖² contro (4/3)·4^{-n}
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.random import PCG64, SeedSequence

from goodseq.config import Policy, get_settings
from goodseq.errors import (
    BoundViolation,
    ConfigurationError,
    GrowthTooSlow,
    HorizonExceeded,
    NotDivisible,
    SelectionTooShallow,
)
from goodseq.lacunary import ModulusSequence, enumerate_stream
from goodseq.modone import (
    Angle,
    BoundedComplex,
    RationalAngle,
    context,
    dist_nearest_int,
    times_int_mod1,
    to_mpf,
    unit_exp,
)
from goodseq.spectral import SpectralValue, limit_L

logger = logging.getLogger(__name__)

# tolleranza numerica per mean_sq ≥ |mean_coeff|²
CAUCHY_SCHWARZ_SLACK = 1e-12

WIENER_HEADER = ["N", "mean_re", "mean_im", "mean_sq", "method", "std_err"]
DIRICHLET_HEADER = ["n", "L_lower", "L_value", "tail_sum", "tail_bound"]


class SelectionMode(str, Enum):
    PROP5 = "prop5"
    THM6 = "thm6"


@dataclass(frozen=True)
class SubsequenceSelection:
    mode: SelectionMode
    indices: Tuple[int, ...]
    horizon: int
    # True se la condizione "per ogni j ≥ j_k" è certificata dalla formula monotona del rapporto
    certified: bool = False

    def to_json(self) -> Dict[str, Any]:
        return {"mode": self.mode.value, "indices": list(self.indices), "horizon": self.horizon}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "SubsequenceSelection":
        try:
            return cls(SelectionMode(data["mode"]), tuple(int(j) for j in data["indices"]), int(data["horizon"]))
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigurationError(f"malformed selection: {data!r}") from exc


@dataclass(frozen=True)
class EtaPoint:
    eta: Tuple[int, ...]
    selection: SubsequenceSelection
    theta: RationalAngle
    truncation_err: Fraction


class WienerMethod(str, Enum):
    EXACT_PRODUCT = "exact_product"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class MonteCarloEstimate:
    value: complex
    std_err: float
    samples: int
    seed: int


@dataclass(frozen=True)
class WienerEstimate:
    n: int
    mean_coeff: complex
    mean_sq: float
    method: WienerMethod
    std_err: Optional[float] = None
    samples: Optional[int] = None
    seed: Optional[int] = None

    def record(self) -> Dict[str, Any]:
        return {
            "N": self.n,
            "mean_re": self.mean_coeff.real,
            "mean_im": self.mean_coeff.imag,
            "mean_sq": self.mean_sq,
            "method": self.method.value,
            "std_err": self.std_err,
        }


@dataclass(frozen=True)
class DirichletRow:
    n: int
    j_n: int
    L_lower: float
    L_value: SpectralValue
    tail_sum: Fraction
    tail_bound: Fraction

    def record(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "L_lower": self.L_lower,
            "L_value": self.L_value.value,
            "tail_sum": float(self.tail_sum),
            "tail_bound": float(self.tail_bound),
        }


def _first_admissible(m: ModulusSequence, bound: int, start: int, window: int) -> Optional[int]:
    """Minimo j ≥ start con m_i/m_{i-1} > bound per ogni i ≥ j (verificato fino a j + window)."""
    if m.monotone_ratio:
        return m.first_index_with_ratio_above(bound, start)
    limit = m.finite_length or m.max_index
    j = max(start, 2)
    while j <= limit:
        last = min(j + window, limit)
        bad = next((i for i in range(j, last + 1) if m.ratio_at(i) <= bound), None)
        if bad is None:
            return j
        j = bad + 1
    return None


def select_subsequence(
    m: ModulusSequence,
    mode: SelectionMode,
    K: int,
    window: Optional[int] = None,
) -> SubsequenceSelection:
    """Sceglie gli indici minimi j_1 < ... < j_K ammessi dalla modalità.

    Argomenti:
        m: successione di moduli (deve valere m_j | m_{j+1})
        mode: prop5 oppure thm6 (thm6 impone anche la condizione di prop5 per k = 1)
        K: numero di indici (≥ 1)
        window: finestra di verifica per i rapporti non monotoni

    Ritorna:
        La selezione, con horizon = j_K + window
    """
    mode = SelectionMode(mode)
    if K < 1:
        raise ConfigurationError("selection needs K >= 1")
    window = window or get_settings().selection_window
    indices: List[int] = []
    previous = 1
    for k in range(1, K + 1):
        bound = 2 ** (k + 2)
        if mode is SelectionMode.THM6 and k > 1:
            try:
                bound *= m[indices[-1]]
            except HorizonExceeded as exc:
                raise GrowthTooSlow(
                    f"thm6 index j_{k} needs m_{indices[-1]}, which cannot be materialized ({exc})"
                ) from exc
        j = _first_admissible(m, bound, previous + 1, window)
        if j is None:
            raise GrowthTooSlow(f"no index j > {previous} has m_j/m_(j-1) > {bound} for all later j")
        indices.append(j)
        previous = j
    horizon = indices[-1] + window
    if not m.divides_chain(horizon):
        raise NotDivisible("selection needs m_j | m_(j+1) up to the horizon")
    logger.info("✓ %s selection: %s", mode.value, indices)
    return SubsequenceSelection(mode, tuple(indices), horizon, certified=m.monotone_ratio)


def eta_words(K: int) -> List[Tuple[int, ...]]:
    """Tutte le parole binarie di lunghezza K, in ordine lessicografico."""
    return list(itertools.product((0, 1), repeat=K))


def theta_of_eta(m: ModulusSequence, eta: Sequence[int], sel: SubsequenceSelection) -> EtaPoint:
    """Costruisce θ(η) = Σ_{k≤K} η_k/m_{j_k} esattamente.

    L'errore di troncamento è 2/m_{j_{K+1}} se l'indice successivo è noto,
    altrimenti 2/m_{j_K+1} ≤ 2/(3·m_{j_K}).
    """
    eta = tuple(int(e) for e in eta)
    if any(e not in (0, 1) for e in eta):
        raise ConfigurationError("eta must be a binary word")
    K = len(eta)
    if K > len(sel.indices):
        raise SelectionTooShallow(f"eta has {K} letters but only {len(sel.indices)} indices are selected")
    theta = sum((Fraction(e, m[j]) for e, j in zip(eta, sel.indices) if e), Fraction(0))
    if K < len(sel.indices):
        truncation_err = Fraction(2, m[sel.indices[K]])
    elif K == 0:
        truncation_err = Fraction(2, m[sel.indices[0]])
    else:
        try:
            truncation_err = Fraction(2, m[sel.indices[-1] + 1])
        except HorizonExceeded:
            truncation_err = Fraction(2, 3 * m[sel.indices[-1]])
    return EtaPoint(eta, sel, RationalAngle(theta), truncation_err)


def mtheta_bound(m: ModulusSequence, sel: SubsequenceSelection, j: int, K: Optional[int] = None) -> Fraction:
    """Limite 2·m_j/m_{j_k} su ‖m_jθ(η)‖, con j_k il primo indice selezionato > j.

    Vale 0 se nessuno dei primi K indici supera j: θ troncato è allora un
    multiplo di 1/m_{j_K}, che divide m_j.
    """
    if j < 1:
        raise ValueError("j must be >= 1")
    selected = sel.indices[: len(sel.indices) if K is None else K]
    nxt = next((jk for jk in selected if jk > j), None)
    if nxt is None:
        return Fraction(0)
    return Fraction(2 * m[j], m[nxt])


def eta_majorant(m: ModulusSequence, sel: SubsequenceSelection, K: Optional[int] = None) -> Callable[[int], Fraction]:
    """Majorante k ↦ Σ_{j≥k} ‖m_jθ‖² valido per ogni θ(η) troncato a K lettere.

    Su ciascun tratto [j_{i-1}, j_i) i termini (2m_j/m_{j_i})² decrescono almeno
    di 1/9 a ogni passo, quindi il tratto pesa al più (9/2)/(m_{j_i}/m_{j_i-1})².
    """
    selected = sel.indices[: len(sel.indices) if K is None else K]
    weights = [(jk, Fraction(9, 2) / m.ratio_at(jk) ** 2) for jk in selected]

    def majorant(k: int) -> Fraction:
        return sum((w for jk, w in weights if jk > k), Fraction(0))

    return majorant


def mu_hat(
    m: ModulusSequence,
    sel: SubsequenceSelection,
    s: int,
    K: Optional[int] = None,
    prec: Optional[int] = None,
) -> BoundedComplex:
    """μ̂(s) = Π_{k≤K} (1 + e^{2iπ s/m_{j_k}})/2."""
    if s < 0:
        raise ValueError("s must be >= 0")
    prec = prec or get_settings().precision_bits
    ctx = context(prec)
    selected = sel.indices[: len(sel.indices) if K is None else K]
    re, im = ctx.mpf(1), ctx.mpf(0)
    err = Fraction(0)
    rounding = Fraction(1, 1 << (prec - 3))
    for j in selected:
        mj = m[j]
        t = RationalAngle(Fraction(s % mj, mj))
        if t.p == 0:
            continue
        if t.q == 2:
            return BoundedComplex(0, 0, Fraction(0))
        e = unit_exp(t, prec)
        fre, fim = (1 + to_mpf(ctx, e.re)) / 2, to_mpf(ctx, e.im) / 2
        re, im = re * fre - im * fim, re * fim + im * fre
        err += e.err / 2 + rounding
    return BoundedComplex(re, im, err)


def _sample_words(K: int, samples: int, seed: int) -> Counter:
    """Conta le parole η campionate: un generatore PCG64 per blocco, seme (seed, blocco)."""
    if seed < 0:
        raise ConfigurationError("seed must be nonnegative")
    chunk = get_settings().mc_chunk
    sizes = [min(chunk, samples - start) for start in range(0, samples, chunk)]
    weights = 1 << np.arange(K, dtype=np.int64)

    def draw(i: int) -> Counter:
        rng = np.random.Generator(PCG64(SeedSequence((seed, i))))
        bits = rng.integers(0, 2, size=(sizes[i], K), dtype=np.int64)
        words, counts = np.unique(bits @ weights, return_counts=True)
        return Counter({int(w): int(c) for w, c in zip(words, counts)})

    with ThreadPoolExecutor(max_workers=get_settings().threads) as pool:
        parts = list(pool.map(draw, range(len(sizes))))
    total: Counter = Counter()
    for part in parts:
        total.update(part)
    return total


def _word_angle(m: ModulusSequence, selected: Sequence[int], word: int, s: int) -> RationalAngle:
    """s·θ(η) mod 1 per la parola codificata in `word` (bit k-1 = η_k)."""
    value = Fraction(0)
    for k, j in enumerate(selected):
        if word >> k & 1:
            mj = m[j]
            value += Fraction(s % mj, mj)
    return RationalAngle(value)


def mu_hat_mc(
    m: ModulusSequence,
    sel: SubsequenceSelection,
    s: int,
    samples: int,
    seed: int,
    K: Optional[int] = None,
) -> MonteCarloEstimate:
    """Stima Monte Carlo di μ̂(s) su `samples` parole η estratte con il seme dato.

    Ritorna:
        Media empirica di e^{2iπ sθ(η)} ed errore standard (deviazione campionaria / √M)
    """
    if samples < 1:
        raise ConfigurationError("samples must be >= 1")
    selected = sel.indices[: len(sel.indices) if K is None else K]
    counts = _sample_words(len(selected), samples, seed)
    ctx = context(get_settings().precision_bits)
    re_terms, im_terms = [], []
    for word in sorted(counts):
        e = unit_exp(_word_angle(m, selected, word, s))
        re_terms.append(counts[word] * to_mpf(ctx, e.re))
        im_terms.append(counts[word] * to_mpf(ctx, e.im))
    mean = complex(float(ctx.fsum(re_terms) / samples), float(ctx.fsum(im_terms) / samples))
    return MonteCarloEstimate(mean, _standard_error(mean, samples), samples, seed)


def _standard_error(mean: complex, samples: int) -> float:
    # valori sul cerchio unitario: Σ|z - z̄|² = M - M|z̄|²
    if samples == 1:
        return 0.0
    variance = max(samples - samples * abs(mean) ** 2, 0.0) / (samples - 1)
    return math.sqrt(variance / samples)


def _residue_counts(m: ModulusSequence, modulus: int, N: int) -> Counter:
    return Counter(s % modulus for s in enumerate_stream(m, N))


def _enforce_cauchy_schwarz(mean: complex, mean_sq: float) -> float:
    gap = abs(mean) ** 2 - mean_sq
    if gap > CAUCHY_SCHWARZ_SLACK:
        raise BoundViolation(f"mean_sq {mean_sq!r} < |mean_coeff|^2 {abs(mean) ** 2!r}")
    return max(mean_sq, abs(mean) ** 2)


def wiener_average(
    m: ModulusSequence,
    sel: SubsequenceSelection,
    N: int,
    K: Optional[int] = None,
    method: WienerMethod = WienerMethod.EXACT_PRODUCT,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> WienerEstimate:
    """Medie (1/N)Σ μ̂(s_n) e (1/N)Σ |μ̂(s_n)|².

    μ̂(s) dipende solo da s mod m_{j_K}: ogni residuo distinto viene valutato una volta.
    Con method=monte_carlo le parole η sono campionate una sola volta e condivise da
    tutti gli s_n; `std_err` è l'errore standard di mean_coeff.
    """
    if N < 1:
        raise ConfigurationError("N must be >= 1")
    method = WienerMethod(method)
    selected = sel.indices[: len(sel.indices) if K is None else K]
    if K is not None and K > len(sel.indices):
        raise SelectionTooShallow(f"K = {K} exceeds the {len(sel.indices)} selected indices")
    if not selected:
        return WienerEstimate(N, complex(1.0, 0.0), 1.0, method)
    modulus = m[selected[-1]]
    residues = _residue_counts(m, modulus, N)
    ctx = context(get_settings().precision_bits)

    if method is WienerMethod.EXACT_PRODUCT:
        re_terms, im_terms, sq_terms = [], [], []
        for r in sorted(residues):
            mu = mu_hat(m, sel, r, len(selected))
            c = residues[r]
            re_terms.append(c * mu.re)
            im_terms.append(c * mu.im)
            sq_terms.append(c * (to_mpf(ctx, mu.re) ** 2 + to_mpf(ctx, mu.im) ** 2))
        mean = complex(float(ctx.fsum(re_terms) / N), float(ctx.fsum(im_terms) / N))
        mean_sq = _enforce_cauchy_schwarz(mean, float(ctx.fsum(sq_terms) / N))
        return WienerEstimate(N, mean, mean_sq, method)

    if samples is None or seed is None:
        raise ConfigurationError("monte carlo Wiener averages need samples and an explicit seed")
    counts = _sample_words(len(selected), samples, seed)
    words = sorted(counts)
    # per parola: Y_w = (1/N) Σ_n e(s_n θ_w); per residuo: μ̂_MC(r) = (1/M) Σ_w c_w e(r θ_w)
    word_re = {w: [] for w in words}
    word_im = {w: [] for w in words}
    mean_re, mean_im, sq_terms = [], [], []
    for r in sorted(residues):
        c = residues[r]
        mu_re, mu_im = [], []
        for w in words:
            e = unit_exp(_word_angle(m, selected, w, r))
            er, ei = to_mpf(ctx, e.re), to_mpf(ctx, e.im)
            mu_re.append(counts[w] * er)
            mu_im.append(counts[w] * ei)
            word_re[w].append(c * er)
            word_im[w].append(c * ei)
        zr, zi = ctx.fsum(mu_re) / samples, ctx.fsum(mu_im) / samples
        mean_re.append(c * zr)
        mean_im.append(c * zi)
        sq_terms.append(c * (zr ** 2 + zi ** 2))
    mean = complex(float(ctx.fsum(mean_re) / N), float(ctx.fsum(mean_im) / N))
    mean_sq = _enforce_cauchy_schwarz(mean, float(ctx.fsum(sq_terms) / N))
    spread = 0.0
    for w in words:
        y = complex(float(ctx.fsum(word_re[w]) / N), float(ctx.fsum(word_im[w]) / N))
        spread += counts[w] * abs(y - mean) ** 2
    std_err = math.sqrt(spread / (samples - 1) / samples) if samples > 1 else 0.0
    return WienerEstimate(N, mean, mean_sq, method, std_err, samples, seed)


def mean_limit(
    m: ModulusSequence,
    sel: SubsequenceSelection,
    K: Optional[int] = None,
    policy: Optional[Policy] = None,
) -> float:
    """E[L(θ(ξ))] sulle 2^K parole: limite di (1/N)Σ μ̂(s_n)."""
    K = len(sel.indices) if K is None else K
    majorant = eta_majorant(m, sel, K)
    values = []
    for eta in eta_words(K):
        value = limit_L(m, theta_of_eta(m, eta, sel).theta, policy, majorant)
        if not value.certified:
            logger.warning("⚠ L(theta(%s)) not certified", "".join(map(str, eta)))
        values.append(value.value)
    return math.fsum(values) / 2 ** K


def wiener_limit(
    m: ModulusSequence,
    sel: SubsequenceSelection,
    K: Optional[int] = None,
    policy: Optional[Policy] = None,
) -> float:
    """(1/4^K) Σ_{η,η'} L(θ(η) − θ(η')): limite di (1/N)Σ |μ̂(s_n)|²."""
    K = len(sel.indices) if K is None else K
    majorant = eta_majorant(m, sel, K)
    thetas = [theta_of_eta(m, eta, sel).theta.value for eta in eta_words(K)]
    total = []
    for a, b in itertools.combinations_with_replacement(range(len(thetas)), 2):
        value = limit_L(m, RationalAngle(thetas[a] - thetas[b]), policy, majorant).value
        total.append(value if a == b else 2 * value)
    return math.fsum(total) / 4 ** K


def nu_hat(m: ModulusSequence, theta: Angle, t: int, policy: Optional[Policy] = None) -> SpectralValue:
    """ν̂(t) = L(tθ) per la distribuzione asintotica dell'orbita e^{2iπ s_nθ}."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return limit_L(m, times_int_mod1(theta, t), policy)


def _orbit_tail(m: ModulusSequence, theta: RationalAngle) -> Fraction:
    """Σ_j ‖m_jθ‖², esatta: con m_j | m_{j+1} i termini si annullano dal primo residuo nullo."""
    total = Fraction(0)
    residues = m.residues(theta.q)
    for _ in range(m.finite_length or m.max_index):
        try:
            r = next(residues)
        except HorizonExceeded:
            break
        if r * theta.p % theta.q == 0:
            break
        total += dist_nearest_int(RationalAngle(Fraction(r * theta.p, theta.q))) ** 2
    return total


def dirichlet_check(
    m: ModulusSequence,
    point: EtaPoint,
    n_max: int,
    policy: Optional[Policy] = None,
) -> List[DirichletRow]:
    """Verifica la proprietà di Dirichlet lungo t = m_{j_n}, n ≤ n_max.

    Per ogni n: tail_sum = Σ_j ‖m_j·m_{j_n}θ‖² < (4/3)·4^{-n}, e
    L(m_{j_n}θ) ≥ 1 − (4π²/3)·tail_sum.
    """
    sel = point.selection
    if sel.mode is not SelectionMode.THM6:
        raise ConfigurationError("dirichlet_check needs a thm6 selection")
    if n_max < 1:
        raise ConfigurationError("n_max must be >= 1")
    if n_max > len(sel.indices):
        raise SelectionTooShallow(f"n_max = {n_max} exceeds the {len(sel.indices)} selected indices")
    ctx = context((policy or Policy.default()).precision_bits)
    rows: List[DirichletRow] = []
    for n in range(1, n_max + 1):
        j_n = sel.indices[n - 1]
        shifted = times_int_mod1(point.theta, m[j_n])
        tail_sum = _orbit_tail(m, shifted)
        tail_bound = Fraction(4, 3) / 4 ** n
        if tail_sum >= tail_bound:
            raise BoundViolation(f"tail sum {float(tail_sum):.6g} >= {float(tail_bound):.6g} at n={n}")
        lower = max(ctx.mpf(-1), 1 - 4 * ctx.pi ** 2 / 3 * to_mpf(ctx, tail_sum))
        rows.append(DirichletRow(n, j_n, float(lower), limit_L(m, shifted, policy), tail_sum, tail_bound))
    logger.info("✓ dirichlet check passed for n <= %d", n_max)
    return rows
