"""Mesh histograms of the projected measure and q-dimension estimates.

The symbolic measure is pushed to the line by refining the cut set well
below the mesh width and assigning each member cylinder's mass to the cube
containing its interval midpoint.  Cylinders meeting a cube boundary are
tallied into an explicit straddle bound, which shrinks as the refinement
factor grows.  Dimension estimates regress log moment sums against
(q-1) log delta over a geometric ladder, with extreme two-point slopes over
the finest half as liminf/limsup proxies.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .measures import SymbolicMeasure
from .system import System

MASS_TOL = 1e-10
SUBCUBE_THRESHOLD = 1e-15


@dataclass
class MeshHistogram:
    delta: float
    origin: float
    masses: np.ndarray  # dense over cubes intersecting J
    straddle_mass: float
    refine: int
    max_refined_mass: float
    n_boundaries: int

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def occupied(self) -> np.ndarray:
        return self.masses[self.masses > 0.0]

    @property
    def straddle_bound(self) -> float:
        # each interior cube boundary is contained in at most one cylinder
        return self.n_boundaries * self.max_refined_mass


@dataclass
class LadderPoint:
    delta: float
    value: float
    log_delta: float
    log_value: float


@dataclass
class DimensionEstimate:
    q: float
    ladder: list[LadderPoint]
    slope_ls: float
    slope_min: float
    slope_max: float
    pressure_root: Optional[float] = None
    clamp: float = 1.0
    threshold_sensitive: bool = False

    @property
    def clamped_value(self) -> float:
        if self.pressure_root is None:
            return min(self.slope_ls, self.clamp)
        return min(self.slope_ls, min(self.pressure_root, self.clamp))


def mesh_histogram(
    system: System, measure: SymbolicMeasure, delta: float, refine: int = 32
) -> MeshHistogram:
    """Origin-anchored half-open delta-mesh masses of the projected measure."""
    lo, hi = system.interval
    if not 0 < delta < hi - lo:
        raise ValueError("delta must lie in (0, |J|)")
    if refine < 4:
        raise ValueError("refine must be >= 4")
    cut = system.cut_groups(delta / refine)
    n_cubes = int(math.ceil((hi - lo) / delta - 1e-12))
    masses = np.zeros(n_cubes)
    straddle = 0.0
    max_refined = 0.0
    for g in cut.groups:
        m = measure.mass_array(g.words)
        max_refined = max(max_refined, float(m.max()))
        mid = 0.5 * (g.lo + g.hi)
        idx = np.clip(np.floor((mid - lo) / delta).astype(int), 0, n_cubes - 1)
        np.add.at(masses, idx, m)
        f_lo = np.floor((g.lo - lo) / delta)
        hi_frac = (g.hi - lo) / delta
        f_hi = np.floor(hi_frac)
        # forgive intervals whose right endpoint sits exactly on a boundary
        exact = hi_frac - f_hi < 1e-12
        f_hi = np.where(exact, f_hi - 1, f_hi)
        straddle += float(m[f_hi > f_lo].sum())
    return MeshHistogram(
        delta=delta,
        origin=lo,
        masses=masses,
        straddle_mass=straddle,
        refine=refine,
        max_refined_mass=max_refined,
        n_boundaries=n_cubes - 1,
    )


def moment_sum(hist: MeshHistogram, q: float, threshold: float = 0.0) -> float:
    """Sum of cube masses to the q-th power over cubes above the threshold."""
    m = hist.masses[hist.masses > threshold]
    return float(np.sum(m**q))


def entropy_sum(hist: MeshHistogram, threshold: float = 0.0) -> float:
    """Sum of nu(Q) log nu(Q) over occupied cubes (negative)."""
    m = hist.masses[hist.masses > threshold]
    return float(np.sum(m * np.log(m)))


def _slopes(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope_ls = float(np.polyfit(x, y, 1)[0])
    n = len(x)
    half = x[n // 2 :], y[n // 2 :]
    two_point = np.diff(half[1]) / np.diff(half[0])
    return slope_ls, float(two_point.min()), float(two_point.max())


def estimate_Dq(
    system: System,
    measure: SymbolicMeasure,
    q: float,
    deltas: Sequence[float],
    refine: int = 32,
    pressure_root: Optional[float] = None,
    workers: int = 1,
) -> DimensionEstimate:
    """Regression estimate of the generalized q-dimension over a delta ladder."""
    ladder_deltas = sorted(deltas, reverse=True)
    if len(ladder_deltas) < 4:
        raise ValueError("at least 4 ladder points are required")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hists = list(
                pool.map(lambda d: mesh_histogram(system, measure, d, refine), ladder_deltas)
            )
    else:
        hists = [mesh_histogram(system, measure, d, refine) for d in ladder_deltas]
    points = []
    xs = []
    ys = []
    threshold_sensitive = False
    for h in hists:
        if q == 1:
            v = entropy_sum(h)
            v_thr = entropy_sum(h, SUBCUBE_THRESHOLD)
            x = math.log(h.delta)
            y = v
        else:
            v = moment_sum(hist=h, q=q)
            v_thr = moment_sum(hist=h, q=q, threshold=SUBCUBE_THRESHOLD)
            x = (q - 1) * math.log(h.delta)
            y = math.log(v)
        if abs(v - v_thr) > 1e-6 * max(abs(v), 1.0):
            threshold_sensitive = True
        points.append(
            LadderPoint(delta=h.delta, value=v, log_delta=math.log(h.delta), log_value=y)
        )
        xs.append(x)
        ys.append(y)
    slope_ls, slope_min, slope_max = _slopes(np.array(xs), np.array(ys))
    return DimensionEstimate(
        q=q,
        ladder=points,
        slope_ls=slope_ls,
        slope_min=slope_min,
        slope_max=slope_max,
        pressure_root=pressure_root,
        threshold_sensitive=threshold_sensitive,
    )
