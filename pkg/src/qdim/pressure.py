"""Pressure-function evaluation and jump-point root finding.

Two evaluation modes mirror the two pressure definitions: fixed-depth sums
over all level-k words (with 1/k normalization) and cut-set sums over
C(delta) (with 1/k_delta normalization).  Both are strictly decreasing in
t, so the candidate dimension for each q is located by bracketed bisection.
Similarity systems carrying product measures use an exact per-level product
formula; for periodic-tail schedules its level average converges to the
period average, which we use as the limiting value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .measures import GibbsMeasure, ProductMeasure, SymbolicMeasure
from .system import System

DEFAULT_TOL = 1e-9
DEFAULT_FAST_LEVEL = 24
DEFAULT_ENUM_LEVEL = 12
DEFAULT_DELTAS = tuple(2.0**-j for j in range(6, 17))
BRACKET_LIMIT = 50.0


class RootOutOfRangeError(RuntimeError):
    """No sign change found for the pressure in the admissible t range."""


@dataclass
class PressureSample:
    t: float
    lower: float
    upper: float


@dataclass
class PressureCurve:
    q: float
    mode: str
    strategy: str
    samples: list[PressureSample]


@dataclass
class DimensionRoot:
    q: float
    d_value: float
    bracket: tuple[float, float]
    drift: float
    mode: str
    strategy: str
    # Richardson-extrapolated root: the finite-depth roots carry an O(1/k)
    # truncation bias, which the two-depth extrapolation cancels.
    extrapolated: float = math.nan


@dataclass
class SeriesReport:
    t: float
    q: float
    partial_sums: np.ndarray
    ratios: np.ndarray
    verdict: str


def has_fast_path(system: System, measure: SymbolicMeasure) -> bool:
    return system.is_similarity and isinstance(measure, ProductMeasure)


def _check_measure(system: System, measure: SymbolicMeasure):
    if isinstance(measure, GibbsMeasure):
        sizes = {
            system.schedule.alphabet_size(k)
            for k in range(1, len(system.schedule.prefix) + system.schedule.period + 1)
        }
        if sizes != {measure.n_symbols}:
            raise ValueError("Gibbs measures require an autonomous alphabet matching the potential")
    else:
        for k in range(1, len(system.schedule.prefix) + system.schedule.period + 1):
            if len(measure.vector(k)) != system.schedule.alphabet_size(k):
                raise ValueError(f"measure vector at level {k} does not match alphabet size")


# -- level sums ------------------------------------------------------------


def _fast_level_terms(system: System, measure: ProductMeasure, k: int):
    ratios = [
        np.array([m.ratio for m in system.schedule.family(j)]) for j in range(1, k + 1)
    ]
    probs = [measure.vector(j) for j in range(1, k + 1)]
    return ratios, probs


def level_sum(
    system: System, measure: SymbolicMeasure, t: float, q: float, k: int
) -> float:
    """Depth-k pressure value sgn(1-q)/k * log sum over all level-k words."""
    if q <= 0 or q == 1:
        raise ValueError("level_sum needs q > 0, q != 1; use level_sum_q1 for q = 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_measure(system, measure)
    sgn = 1.0 if q < 1 else -1.0
    if has_fast_path(system, measure):
        ratios, probs = _fast_level_terms(system, measure, k)
        total = sum(
            float(logsumexp(t * (1 - q) * np.log(r) + q * np.log(p)))
            for r, p in zip(ratios, probs)
        )
        return sgn * total / k
    data = system.level_data(k)
    log_n = np.log(data.norms)
    log_m = np.log(measure.mass_array(data.words))
    return sgn / k * float(logsumexp(t * (1 - q) * log_n + q * log_m))


def level_sum_q1(
    system: System, measure: SymbolicMeasure, k: int
) -> tuple[float, float]:
    """(entropy part H_k, Lyapunov part L_k) over level-k words.

    The q = 1 pressure at depth k is (H_k - t * L_k) / k with root H_k/L_k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    _check_measure(system, measure)
    if has_fast_path(system, measure):
        ratios, probs = _fast_level_terms(system, measure, k)
        h = sum(-float(np.sum(p * np.log(p))) for p in probs)
        lam = sum(float(np.sum(p * np.log(1.0 / r))) for r, p in zip(ratios, probs))
        return h, lam
    data = system.level_data(k)
    masses = measure.mass_array(data.words)
    h = -float(np.sum(masses * np.log(masses)))
    lam = -float(np.sum(masses * np.log(data.norms)))
    return h, lam


def cutset_sum(
    system: System, measure: SymbolicMeasure, t: float, q: float, delta: float
) -> tuple[float, int]:
    """Pressure value over the cut set C(delta); returns (value, k_delta)."""
    if q <= 0:
        raise ValueError("q must be > 0")
    _check_measure(system, measure)
    terms = _CutsetTerms(system, measure, delta)
    return terms.value(t, q), terms.k_delta


# -- evaluators ------------------------------------------------------------


class _LevelTerms:
    """Enumerated level-k word data reused across bisection steps."""

    def __init__(self, system: System, measure: SymbolicMeasure, k: int):
        data = system.level_data(k)
        self.k = k
        self.log_n = np.log(data.norms)
        masses = measure.mass_array(data.words)
        self.log_m = np.log(masses)
        self.masses = masses
        self.norms = data.norms

    def value(self, t: float, q: float) -> float:
        if q == 1:
            h = -float(np.sum(self.masses * self.log_m))
            lam = -float(np.sum(self.masses * self.log_n))
            return (h - t * lam) / self.k
        sgn = 1.0 if q < 1 else -1.0
        return sgn / self.k * float(logsumexp(t * (1 - q) * self.log_n + q * self.log_m))


class _CutsetTerms:
    def __init__(self, system: System, measure: SymbolicMeasure, delta: float):
        cut = system.cut_groups(delta)
        self.k_delta = cut.k_min
        log_n = []
        masses = []
        for g in cut.groups:
            log_n.append(np.log(g.norms))
            masses.append(measure.mass_array(g.words))
        self.log_n = np.concatenate(log_n)
        self.masses = np.concatenate(masses)
        self.log_m = np.log(self.masses)

    def value(self, t: float, q: float) -> float:
        if q == 1:
            h = -float(np.sum(self.masses * self.log_m))
            lam = -float(np.sum(self.masses * self.log_n))
            return (h - t * lam) / self.k_delta
        sgn = 1.0 if q < 1 else -1.0
        return sgn / self.k_delta * float(
            logsumexp(t * (1 - q) * self.log_n + q * self.log_m)
        )


class _FastLimitTerms:
    """Exact limiting pressure for similarity systems with product measures.

    The per-level log terms are eventually periodic, so their Cesaro mean
    converges to the average over one tail period; the prefix washes out.
    """

    def __init__(self, system: System, measure: ProductMeasure):
        start = len(system.schedule.prefix) + 1
        period = system.schedule.period
        self.ratios = [
            np.array([m.ratio for m in system.schedule.family(j)])
            for j in range(start, start + period)
        ]
        self.probs = [measure.vector(j) for j in range(start, start + period)]

    def value(self, t: float, q: float) -> float:
        if q == 1:
            h = np.mean([-float(np.sum(p * np.log(p))) for p in self.probs])
            lam = np.mean(
                [
                    float(np.sum(p * np.log(1.0 / r)))
                    for r, p in zip(self.ratios, self.probs)
                ]
            )
            return h - t * lam
        sgn = 1.0 if q < 1 else -1.0
        return sgn * float(
            np.mean(
                [
                    logsumexp(t * (1 - q) * np.log(r) + q * np.log(p))
                    for r, p in zip(self.ratios, self.probs)
                ]
            )
        )


def _bisect_root(value, tol: float) -> tuple[float, tuple[float, float]]:
    """Bracketed bisection of a strictly decreasing function of t."""
    t_lo, t_hi = 0.0, 2.0
    f_lo, f_hi = value(t_lo), value(t_hi)
    step = 2.0
    while f_lo <= 0.0:
        t_lo -= step
        step *= 2
        if t_lo < -BRACKET_LIMIT:
            raise RootOutOfRangeError("root out of range")
        f_lo = value(t_lo)
    step = 2.0
    while f_hi >= 0.0:
        t_hi += step
        step *= 2
        if t_hi > BRACKET_LIMIT:
            raise RootOutOfRangeError("root out of range")
        f_hi = value(t_hi)
    while t_hi - t_lo > tol:
        mid = 0.5 * (t_lo + t_hi)
        if mid in (t_lo, t_hi):
            break
        if value(mid) > 0.0:
            t_lo = mid
        else:
            t_hi = mid
    return 0.5 * (t_lo + t_hi), (t_lo, t_hi)


def root_dq(
    system: System,
    measure: SymbolicMeasure,
    q: float,
    mode: str = "level",
    tol: float = DEFAULT_TOL,
    level: Optional[int] = None,
    deltas: Optional[Sequence[float]] = None,
) -> DimensionRoot:
    """Jump point of the pressure in t, with bracketing certificate.

    The drift reports the distance to the root recomputed at half the depth
    (level mode) or at the next-coarser delta rung (cut-set mode), as a
    Richardson-style error estimate.
    """
    if q <= 0:
        raise ValueError("q must be > 0")
    _check_measure(system, measure)
    fast = has_fast_path(system, measure)
    if mode == "level":
        if fast:
            strategy = "product_fast_path"
            terms = _FastLimitTerms(system, measure)
            k = level if level is not None else DEFAULT_FAST_LEVEL
            root, bracket = _bisect_root(lambda t: terms.value(t, q), tol)
            # finite-level root for the drift estimate
            fine_terms = _FiniteFast(system, measure, k)
            root_fine, _ = _bisect_root(lambda t: fine_terms.value(t, q), tol)
            drift = abs(root - root_fine)
            extrapolated = root
        else:
            strategy = "enumerate"
            k = level if level is not None else DEFAULT_ENUM_LEVEL
            terms = _LevelTerms(system, measure, k)
            root, bracket = _bisect_root(lambda t: terms.value(t, q), tol)
            half_k = max(1, k // 2)
            half = _LevelTerms(system, measure, half_k)
            root_half, _ = _bisect_root(lambda t: half.value(t, q), tol)
            drift = abs(root - root_half)
            if k > half_k:
                extrapolated = (k * root - half_k * root_half) / (k - half_k)
            else:
                extrapolated = root
    elif mode == "cutset":
        strategy = "product_fast_path" if fast else "enumerate"
        ladder = sorted(deltas if deltas is not None else DEFAULT_DELTAS, reverse=True)
        terms = _CutsetTerms(system, measure, ladder[-1])
        root, bracket = _bisect_root(lambda t: terms.value(t, q), tol)
        if len(ladder) > 1:
            prev = _CutsetTerms(system, measure, ladder[-2])
            root_prev, _ = _bisect_root(lambda t: prev.value(t, q), tol)
            drift = abs(root - root_prev)
            k_fine, k_coarse = terms.k_delta, prev.k_delta
            if k_fine > k_coarse:
                extrapolated = (k_fine * root - k_coarse * root_prev) / (k_fine - k_coarse)
            else:
                extrapolated = root
        else:
            drift = math.nan
            extrapolated = root
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return DimensionRoot(
        q=q,
        d_value=root,
        bracket=bracket,
        drift=drift,
        mode=mode,
        strategy=strategy,
        extrapolated=extrapolated,
    )


class _FiniteFast:
    def __init__(self, system: System, measure: ProductMeasure, k: int):
        self.system = system
        self.measure = measure
        self.k = k

    def value(self, t: float, q: float) -> float:
        if q == 1:
            h, lam = level_sum_q1(self.system, self.measure, self.k)
            return (h - t * lam) / self.k
        return level_sum(self.system, self.measure, t, q, self.k)


def pressure_curve(
    system: System,
    measure: SymbolicMeasure,
    q: float,
    ts: Sequence[float],
    mode: str = "level",
    level: Optional[int] = None,
    deltas: Optional[Sequence[float]] = None,
) -> PressureCurve:
    """Sampled pressure values with lower/upper proxies.

    Level mode samples a few depths in [k/2, k]; cut-set mode evaluates the
    finest half of the delta ladder.  For similarity/product systems the
    exact limit is used and lower == upper.
    """
    _check_measure(system, measure)
    fast = has_fast_path(system, measure)
    samples = []
    if fast and mode == "level":
        terms = _FastLimitTerms(system, measure)
        for t in ts:
            v = terms.value(t, q)
            samples.append(PressureSample(t, v, v))
        return PressureCurve(q, mode, "product_fast_path", samples)
    if mode == "level":
        k = level if level is not None else DEFAULT_ENUM_LEVEL
        ks = sorted({max(1, k // 2), max(1, (3 * k) // 4), k})
        evaluators = [_LevelTerms(system, measure, kk) for kk in ks]
    elif mode == "cutset":
        ladder = sorted(deltas if deltas is not None else DEFAULT_DELTAS, reverse=True)
        fine = ladder[len(ladder) // 2 :]
        evaluators = [_CutsetTerms(system, measure, d) for d in fine]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    for t in ts:
        vals = [e.value(t, q) for e in evaluators]
        samples.append(PressureSample(t, min(vals), max(vals)))
    return PressureCurve(q, mode, "enumerate", samples)


def series_partial_sums(
    system: System,
    measure: SymbolicMeasure,
    t: float,
    q: float,
    k_max: int,
    trend_eps: float = 1e-8,
    critical_tol: float = 1e-12,
) -> SeriesReport:
    """Partial sums of the level-indexed moment series with a verdict.

    The series converges iff t is on the subcritical side of the jump
    point, so the trailing per-level ratios sort t against the dimension
    root: "converging" below 1, "diverging" above, "critical" at 1.
    """
    if q <= 0 or q == 1:
        raise ValueError("the series characterization needs q > 0, q != 1")
    _check_measure(system, measure)
    log_terms = np.empty(k_max)
    if has_fast_path(system, measure):
        acc = 0.0
        for j in range(1, k_max + 1):
            r = np.array([m.ratio for m in system.schedule.family(j)])
            p = measure.vector(j)
            acc += float(logsumexp(t * (1 - q) * np.log(r) + q * np.log(p)))
            log_terms[j - 1] = acc
    else:
        for j in range(1, k_max + 1):
            data = system.level_data(j)
            log_m = np.log(measure.mass_array(data.words))
            log_terms[j - 1] = float(
                logsumexp(t * (1 - q) * np.log(data.norms) + q * log_m)
            )
    partial = np.exp(np.array([logsumexp(log_terms[: j + 1]) for j in range(k_max)]))
    ratios = np.exp(np.diff(log_terms, prepend=0.0))
    window = ratios[-min(5, k_max) :]
    if np.all(np.abs(window - 1.0) <= critical_tol):
        verdict = "critical"
    elif np.all(window < 1.0 - trend_eps):
        verdict = "converging"
    elif np.all(window > 1.0 + trend_eps):
        verdict = "diverging"
    else:
        verdict = "inconclusive"
    return SeriesReport(t=t, q=q, partial_sums=partial, ratios=ratios, verdict=verdict)
