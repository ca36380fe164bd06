"""Closed-form dimension oracle for similarity schedules (Moran sets).

For each prefix depth k the defining equation is a product of per-level
power sums equal to 1; its log is strictly decreasing in the exponent, so
the per-prefix root is found by bracketed scalar root finding.  Window
minima/maxima of the root sequence serve as liminf/limsup proxies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .system import LevelSchedule

CONVERGED_GAP = 1e-4


class NotSimilarityError(ValueError):
    """Raised with "Moran formula needs ratios" on non-similarity schedules."""


@dataclass
class MoranReport:
    s_k: np.ndarray
    s_star: float
    s_upper: float
    verdict: str

    @property
    def gap(self) -> float:
        return self.s_upper - self.s_star


def _level_ratios(schedule: LevelSchedule, k: int) -> np.ndarray:
    fam = schedule.family(k)
    if not all(m.is_similarity for m in fam):
        raise NotSimilarityError("Moran formula needs ratios")
    return np.array([m.ratio for m in fam])


def moran_sk(schedule: LevelSchedule, k: int) -> float:
    """Root s of sum_{j<=k} log sum_i ratio_{j,i}^s = 0."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ratios = [_level_ratios(schedule, j) for j in range(1, k + 1)]

    def g(s: float) -> float:
        return float(sum(np.log(np.sum(r**s)) for r in ratios))

    hi = 1.0
    while g(hi) > 0:
        hi *= 2
        if hi > 64:
            raise ValueError("Moran root exceeds bracket; ratios not contracting?")
    if g(hi) == 0.0:
        return hi
    return float(brentq(g, 0.0, hi, xtol=1e-14, rtol=8.881784197001252e-16))


def moran_limits(schedule: LevelSchedule, k_max: int) -> MoranReport:
    """Per-prefix roots with window proxies for liminf/limsup.

    True limits are uncomputable from finite data; the proxies take the
    extreme roots over the trailing half-window and the verdict flags a
    persistent gap as "oscillating".
    """
    if k_max < 4:
        raise ValueError("k_max must be >= 4")
    s = np.array([moran_sk(schedule, k) for k in range(1, k_max + 1)])
    window = s[k_max // 2 :]
    s_star = float(window.min())
    s_upper = float(window.max())
    verdict = "converged" if s_upper - s_star < CONVERGED_GAP else "oscillating"
    return MoranReport(s_k=s, s_star=s_star, s_upper=s_upper, verdict=verdict)
