"""Level schedules, assembled systems, and the vectorized word traversal.

A schedule is a finite explicit prefix of map families followed by a
periodic tail, which keeps infinite non-autonomous systems finitely
describable.  The System wrapper owns derivative-norm evaluation, cylinder
geometry, separation-condition checks, and the shrink-rate diagnostic
comparing per-level minimum map norms against maximal word norms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .maps import (
    Map1D,
    NestingError,
    NotConformalError,
    Similarity,
    batch_intervals,
    batch_log_dets,
    batch_norm_bounds,
    batch_norms,
    normalize_mats,
)


class BudgetExceededError(RuntimeError):
    """Word enumeration would exceed the configured budget."""


class ContractionError(ValueError):
    """Raised with message "contraction violated" when norms fail to shrink."""


DEFAULT_BUDGET = 2**24


@dataclass(frozen=True)
class LevelSchedule:
    """Per-level map families: explicit prefix plus a periodic tail."""

    interval: tuple[float, float]
    tail: tuple[tuple[Map1D, ...], ...]
    prefix: tuple[tuple[Map1D, ...], ...] = ()

    def __post_init__(self):
        lo, hi = self.interval
        if not hi > lo:
            raise ValueError("base interval must have positive length")
        if not self.tail:
            raise ValueError("a periodic tail with at least one family is required")
        for fam in (*self.prefix, *self.tail):
            if len(fam) < 2:
                raise ValueError("every level family needs at least 2 maps")

    @property
    def period(self) -> int:
        return len(self.tail)

    @property
    def autonomous(self) -> bool:
        return not self.prefix and self.period == 1

    def family(self, k: int) -> tuple[Map1D, ...]:
        if k < 1:
            raise ValueError("levels are 1-based")
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        return self.tail[(k - len(self.prefix) - 1) % self.period]

    def alphabet_size(self, k: int) -> int:
        return len(self.family(k))

    def distinct_families(self) -> tuple[tuple[Map1D, ...], ...]:
        return (*self.prefix, *self.tail)


@dataclass
class LevelData:
    """All depth-k words with their derivative norms and cylinder intervals."""

    depth: int
    words: np.ndarray  # (n, depth) int16, 1-based symbols
    norms: np.ndarray
    lo: np.ndarray
    hi: np.ndarray


@dataclass
class CutGroup:
    depth: int
    words: np.ndarray  # (n, depth)
    norms: np.ndarray
    lo: np.ndarray
    hi: np.ndarray


@dataclass
class CutGroups:
    delta: float
    groups: list[CutGroup]
    k_min: int

    @property
    def size(self) -> int:
        return sum(len(g.norms) for g in self.groups)


@dataclass
class ValidationReport:
    contraction: float
    contraction_ok: bool
    nesting_ok: bool
    osc: bool
    ssc: bool
    depth_checked: int
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.contraction_ok and self.nesting_ok and self.osc


@dataclass
class SystemDiagnostics:
    """Shrink-rate ratios log(min level norm) / log(max word norm)."""

    m_k: np.ndarray
    c_bar_k: np.ndarray
    ratio_k: np.ndarray
    verdict: str


class System:
    """A schedule plus evaluation policy (grid size, enumeration budget)."""

    def __init__(
        self,
        schedule: LevelSchedule,
        grid_points: int = 257,
        budget: int = DEFAULT_BUDGET,
        max_depth_guard: int = 2000,
    ):
        self.schedule = schedule
        self.grid_points = grid_points
        self.budget = budget
        self.max_depth_guard = max_depth_guard
        self._level_mat_cache: dict[int, Optional[np.ndarray]] = {}

    # -- basic structure ---------------------------------------------------

    @property
    def interval(self) -> tuple[float, float]:
        return self.schedule.interval

    @property
    def is_similarity(self) -> bool:
        return all(
            m.is_similarity for fam in self.schedule.distinct_families() for m in fam
        )

    @property
    def is_homography(self) -> bool:
        return all(
            m.matrix is not None for fam in self.schedule.distinct_families() for m in fam
        )

    @property
    def contraction(self) -> float:
        return max(
            m.contraction_bound(self.interval)
            for fam in self.schedule.distinct_families()
            for m in fam
        )

    def _level_key(self, k: int) -> int:
        npre = len(self.schedule.prefix)
        if k <= npre:
            return k
        return npre + (k - npre - 1) % self.schedule.period + 1

    def _family_mats(self, k: int):
        key = self._level_key(k)
        if key not in self._level_mat_cache:
            fam = self.schedule.family(key)
            mats = [m.matrix for m in fam]
            if any(m is None for m in mats):
                self._level_mat_cache[key] = None
            else:
                stacked = np.stack(mats)
                self._level_mat_cache[key] = (stacked, batch_log_dets(stacked))
        return self._level_mat_cache[key]

    def _expand_level(self, mats, log_dets, k):
        """One level of composition with exactly propagated log-dets."""
        fam, fam_ld = self._family_mats(k)
        m = len(fam)
        n = len(mats)
        raw = (mats[:, None, :, :] @ fam[None, :, :, :]).reshape(n * m, 2, 2)
        child, log_scale = normalize_mats(raw)
        child_ld = np.repeat(log_dets, m) + np.tile(fam_ld, n) - 2.0 * log_scale
        return child, child_ld, n, m

    # -- single-word operations --------------------------------------------

    def _check_word(self, word: Sequence[int]) -> tuple[int, ...]:
        w = tuple(int(s) for s in word)
        for j, s in enumerate(w, start=1):
            if not 1 <= s <= self.schedule.alphabet_size(j):
                raise ValueError(f"symbol {s} at level {j} outside alphabet")
        return w

    def _word_matrix(self, word: Sequence[int]):
        if not self.is_homography:
            return None
        mat = np.eye(2)[None]
        log_det = np.zeros(1)
        for j, s in enumerate(word, start=1):
            fam, fam_ld = self._family_mats(j)
            raw = mat @ fam[None, s - 1]
            mat, log_scale = normalize_mats(raw)
            log_det = log_det + fam_ld[s - 1] - 2.0 * log_scale
        return mat[0], float(log_det[0])

    def _grid(self) -> np.ndarray:
        lo, hi = self.interval
        return np.linspace(lo, hi, self.grid_points)

    def _chain_value_deriv(self, word: Sequence[int], x: np.ndarray):
        """Composition value and |derivative| at points x by the chain rule."""
        v = np.asarray(x, dtype=float)
        d = np.ones_like(v)
        for j in range(len(word), 0, -1):
            m = self.schedule.family(j)[word[j - 1] - 1]
            dv = np.abs(m.deriv(v))
            if np.any(dv <= 0):
                raise NotConformalError("not conformal")
            d = d * dv
            v = m.apply(v)
        return v, d

    def deriv_norm(self, word: Sequence[int]) -> float:
        """Sup over J of the composition's |derivative|; exact for
        similarity and Moebius words, grid supremum otherwise."""
        w = self._check_word(word)
        if not w:
            return 1.0
        if self.is_similarity:
            return float(
                np.prod([self.schedule.family(j)[s - 1].ratio for j, s in enumerate(w, 1)])
            )
        if self.is_homography:
            mat, log_det = self._word_matrix(w)
            return float(batch_norms(mat[None], self.interval, np.array([log_det]))[0])
        _, d = self._chain_value_deriv(w, self._grid())
        return float(np.max(d))

    def deriv_norm_bounds(self, word: Sequence[int]) -> tuple[float, float]:
        """(value, certified upper bound).  The bound inflates the grid
        supremum by exp(h * sum of per-map log-derivative Lipschitz bounds)."""
        w = self._check_word(word)
        value = self.deriv_norm(w)
        if self.is_homography or not w:
            return value, value
        lo, hi = self.interval
        h = (hi - lo) / (self.grid_points - 1)
        lip = 0.0
        for j, s in enumerate(w, 1):
            m = self.schedule.family(j)[s - 1]
            lip += getattr(m, "log_deriv_lipschitz", 0.0)
        return value, value * math.exp(lip * h)

    def cylinder_interval(self, word: Sequence[int]) -> tuple[float, float]:
        w = self._check_word(word)
        lo, hi = self.interval
        if not w:
            return lo, hi
        ends, _ = self._chain_value_deriv(w, np.array([lo, hi]))
        a, b = float(np.min(ends)), float(np.max(ends))
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        if a < lo - tol or b > hi + tol:
            raise NestingError("placement violates nesting")
        return a, b

    def distortion_constant(self, max_depth: int) -> float:
        """Empirical max over words to max_depth of sup/inf derivative."""
        if max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.is_similarity:
            return 1.0
        worst = 1.0
        if self.is_homography:
            for data in self._iter_homography_levels(max_depth):
                lo_d, hi_d = batch_norm_bounds(data.mats, self.interval, data.log_dets)
                worst = max(worst, float(np.max(hi_d / lo_d)))
            return worst
        for k in range(1, max_depth + 1):
            for word in self._enumerate_words(k):
                _, d = self._chain_value_deriv(word, self._grid())
                worst = max(worst, float(np.max(d) / np.min(d)))
        return worst

    # -- bulk traversal ----------------------------------------------------

    def _enumerate_words(self, k: int) -> Iterable[tuple[int, ...]]:
        count = 1
        ranges = []
        for j in range(1, k + 1):
            n = self.schedule.alphabet_size(j)
            count *= n
            ranges.append(range(1, n + 1))
        if count > self.budget:
            raise BudgetExceededError(
                f"level {k} holds {count} words, budget is {self.budget}"
            )
        return itertools.product(*ranges)

    def _iter_homography_levels(self, depth: int):
        """Yield per-level batches of (words, mats, norms) down to depth."""
        mats = np.eye(2)[None]
        log_dets = np.zeros(1)
        words = np.zeros((1, 0), dtype=np.int16)
        norms = np.ones(1)
        for k in range(1, depth + 1):
            n = len(mats)
            m = self.schedule.alphabet_size(k)
            if n * m > self.budget:
                raise BudgetExceededError(
                    f"level {k} holds {n * m} words, budget is {self.budget}"
                )
            child, child_ld, n, m = self._expand_level(mats, log_dets, k)
            child_words = np.concatenate(
                [
                    np.repeat(words, m, axis=0),
                    np.tile(np.arange(1, m + 1, dtype=np.int16), n)[:, None],
                ],
                axis=1,
            )
            child_norms = batch_norms(child, self.interval, child_ld)
            if np.any(child_norms >= np.repeat(norms, m)):
                raise ContractionError("contraction violated")
            mats, log_dets, words, norms = child, child_ld, child_words, child_norms
            yield _HomographyLevel(k, words, mats, norms, log_dets)

    def level_data(self, k: int) -> LevelData:
        """Every depth-k word with derivative norm and cylinder interval."""
        if k == 0:
            lo, hi = self.interval
            return LevelData(0, np.zeros((1, 0), np.int16), np.ones(1), np.array([lo]), np.array([hi]))
        if self.is_homography:
            data = None
            for data in self._iter_homography_levels(k):
                pass
            lo, hi = batch_intervals(data.mats, self.interval)
            return LevelData(k, data.words, data.norms, lo, hi)
        words = list(self._enumerate_words(k))
        norms = np.empty(len(words))
        lo = np.empty(len(words))
        hi = np.empty(len(words))
        grid = self._grid()
        for i, w in enumerate(words):
            v, d = self._chain_value_deriv(w, grid)
            norms[i] = np.max(d)
            lo[i] = np.min(v)
            hi[i] = np.max(v)
        return LevelData(k, np.array(words, dtype=np.int16), norms, lo, hi)

    def cut_groups(self, delta: float) -> CutGroups:
        """The cut set {u : norm(u) <= delta < norm(parent)} grouped by depth.

        The root norm is 1 by convention, so the cut set exists for every
        delta < 1 even when some depth-1 norm exceeds delta.  Boundary ties
        norm(u) == delta are included.
        """
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.is_homography:
            return self._cut_groups_homography(delta)
        return self._cut_groups_generic(delta)

    def _cut_groups_homography(self, delta: float) -> CutGroups:
        mats = np.eye(2)[None]
        log_dets = np.zeros(1)
        words = np.zeros((1, 0), dtype=np.int16)
        norms = np.ones(1)
        groups: list[CutGroup] = []
        total = 1
        k = 0
        while len(mats):
            k += 1
            if k > self.max_depth_guard:
                raise ContractionError("contraction violated")
            n = len(mats)
            m = self.schedule.alphabet_size(k)
            total += n * m
            if total > self.budget:
                raise BudgetExceededError(
                    f"cut set at delta={delta} exceeds budget {self.budget}"
                )
            child, child_ld, n, m = self._expand_level(mats, log_dets, k)
            child_words = np.concatenate(
                [
                    np.repeat(words, m, axis=0),
                    np.tile(np.arange(1, m + 1, dtype=np.int16), n)[:, None],
                ],
                axis=1,
            )
            child_norms = batch_norms(child, self.interval, child_ld)
            if np.any(child_norms >= np.repeat(norms, m)):
                raise ContractionError("contraction violated")
            emit = child_norms <= delta
            if np.any(emit):
                sel = child[emit]
                lo, hi = batch_intervals(sel, self.interval)
                groups.append(CutGroup(k, child_words[emit], child_norms[emit], lo, hi))
            keep = ~emit
            mats, log_dets, words, norms = (
                child[keep],
                child_ld[keep],
                child_words[keep],
                child_norms[keep],
            )
        k_min = min(g.depth for g in groups)
        return CutGroups(delta, groups, k_min)

    def _cut_groups_generic(self, delta: float) -> CutGroups:
        grid = self._grid()
        by_depth: dict[int, list[tuple[tuple[int, ...], float, float, float]]] = {}
        stack: list[tuple[tuple[int, ...], float]] = [((), 1.0)]
        total = 1
        while stack:
            word, parent_norm = stack.pop()
            k = len(word) + 1
            if k > self.max_depth_guard:
                raise ContractionError("contraction violated")
            for i in range(1, self.schedule.alphabet_size(k) + 1):
                w = word + (i,)
                total += 1
                if total > self.budget:
                    raise BudgetExceededError(
                        f"cut set at delta={delta} exceeds budget {self.budget}"
                    )
                v, d = self._chain_value_deriv(w, grid)
                norm = float(np.max(d))
                if norm >= parent_norm:
                    raise ContractionError("contraction violated")
                if norm <= delta:
                    by_depth.setdefault(k, []).append(
                        (w, norm, float(np.min(v)), float(np.max(v)))
                    )
                else:
                    stack.append((w, norm))
        groups = [
            CutGroup(
                k,
                np.array([r[0] for r in rows], dtype=np.int16),
                np.array([r[1] for r in rows]),
                np.array([r[2] for r in rows]),
                np.array([r[3] for r in rows]),
            )
            for k, rows in sorted(by_depth.items())
        ]
        return CutGroups(delta, groups, min(by_depth))

    # -- validation and diagnostics ----------------------------------------

    def validate(self, depth: int = 8) -> ValidationReport:
        """Report-style checks: contraction, nesting, OSC, SSC.

        OSC/SSC are sibling-interval checks at each level; together with
        nesting this verifies the separation conditions to finite depth.
        """
        failures: list[str] = []
        c = self.contraction
        contraction_ok = c < 1.0
        if not contraction_ok:
            failures.append(f"contraction >= 1 (attained {c})")
        nesting_ok = True
        osc = True
        ssc = True
        tol = 1e-12
        parent_lo, parent_hi, parent_words = (
            np.array([self.interval[0]]),
            np.array([self.interval[1]]),
            np.zeros((1, 0), np.int16),
        )
        try:
            for k in range(1, depth + 1):
                data = self.level_data(k)
                m = self.schedule.alphabet_size(k)
                n = len(parent_lo)
                lo = data.lo.reshape(n, m)
                hi = data.hi.reshape(n, m)
                # nesting inside the parent cylinder
                bad = (lo < parent_lo[:, None] - tol) | (hi > parent_hi[:, None] + tol)
                if np.any(bad):
                    nesting_ok = False
                    i, j = np.argwhere(bad)[0]
                    failures.append(
                        f"nesting violated at level {k}, parent {tuple(parent_words[i])}, child {j + 1}"
                    )
                # sibling separation
                order = np.argsort(lo, axis=1)
                lo_s = np.take_along_axis(lo, order, axis=1)
                hi_s = np.take_along_axis(hi, order, axis=1)
                overlap = hi_s[:, :-1] > lo_s[:, 1:] + tol
                if np.any(overlap):
                    osc = False
                    i = int(np.argwhere(np.any(overlap, axis=1))[0][0])
                    failures.append(
                        f"OSC violated at level {k} under parent {tuple(parent_words[i])}"
                    )
                if np.any(hi_s[:, :-1] >= lo_s[:, 1:] - tol):
                    ssc = False
                parent_lo, parent_hi, parent_words = data.lo, data.hi, data.words
        except BudgetExceededError:
            failures.append(f"separation check truncated before depth {depth} (budget)")
        return ValidationReport(
            contraction=c,
            contraction_ok=contraction_ok,
            nesting_ok=nesting_ok,
            osc=osc,
            ssc=ssc,
            depth_checked=depth,
            failures=failures,
        )

    def condition_1_10(self, k_max: int) -> SystemDiagnostics:
        """Sampled diagnostic for the vanishing log-ratio shrink condition."""
        if k_max < 2:
            raise ValueError("k_max must be >= 2")
        c_bar = np.array(
            [
                min(self.deriv_norm((j,)) if k == 1 else self._single_map_norm(k, j)
                    for j in range(1, self.schedule.alphabet_size(k) + 1))
                for k in range(1, k_max + 1)
            ]
        )
        if self.is_similarity:
            per_level_max = np.array(
                [
                    max(m.ratio for m in self.schedule.family(k))
                    for k in range(1, k_max + 1)
                ]
            )
            m_k = np.cumprod(per_level_max)
        else:
            m_k = np.empty(k_max)
            for data in self._iter_homography_levels(k_max):
                m_k[data.depth - 1] = np.max(data.norms)
        ratio = np.log(c_bar) / np.log(m_k)
        decreasing = bool(np.all(np.diff(ratio) <= 1e-9))
        verdict = "plausible" if decreasing and ratio[-1] < 0.1 else "fails"
        return SystemDiagnostics(m_k=m_k, c_bar_k=c_bar, ratio_k=ratio, verdict=verdict)

    def _single_map_norm(self, k: int, j: int) -> float:
        m = self.schedule.family(k)[j - 1]
        if m.is_similarity:
            return m.ratio
        if m.matrix is not None:
            return float(batch_norms(m.matrix[None], self.interval)[0])
        grid = self._grid()
        return float(np.max(np.abs(m.deriv(grid))))


@dataclass
class _HomographyLevel:
    depth: int
    words: np.ndarray
    mats: np.ndarray
    norms: np.ndarray
    log_dets: np.ndarray
