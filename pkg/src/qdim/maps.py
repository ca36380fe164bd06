"""One-dimensional contraction maps and their homography representation.

Every map is a monotone contraction of the base interval into itself,
optionally followed by a translation.  Similarities and Moebius maps are
represented exactly as 2x2 homography matrices, so compositions reduce to
matrix products and derivative suprema are attained at interval endpoints.
Smooth maps are supplied as (value, derivative) callables and fall back to
grid evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


class NotConformalError(ValueError):
    """Raised when a map's derivative vanishes or changes sign on J."""


class NestingError(ValueError):
    """Raised when a cylinder image escapes the base interval."""


def _homography_apply(mat: np.ndarray, x):
    a, b = mat[0]
    c, d = mat[1]
    return (a * x + b) / (c * x + d)


def _homography_deriv(mat: np.ndarray, x):
    a, b = mat[0]
    c, d = mat[1]
    det = a * d - b * c
    return det / (c * x + d) ** 2


@dataclass(frozen=True)
class Similarity:
    """x -> orientation * ratio * x + offset."""

    ratio: float
    offset: float = 0.0
    orientation: int = 1

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"similarity ratio must be in (0,1), got {self.ratio}")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.orientation * self.ratio, self.offset], [0.0, 1.0]])

    @property
    def is_similarity(self) -> bool:
        return True

    def apply(self, x):
        return self.orientation * self.ratio * x + self.offset

    def deriv(self, x):
        return self.orientation * self.ratio * np.ones_like(np.asarray(x, dtype=float))

    def contraction_bound(self, interval) -> float:
        return self.ratio


@dataclass(frozen=True)
class Mobius:
    """x -> 1/(x + shift) + offset, shift >= 2 keeps it contracting on [0,1]."""

    shift: float
    offset: float = 0.0

    def __post_init__(self):
        if self.shift < 2.0:
            raise ValueError(f"Moebius shift must be >= 2, got {self.shift}")

    @property
    def matrix(self) -> np.ndarray:
        # (offset*x + 1 + offset*shift) / (x + shift)
        return np.array([[self.offset, 1.0 + self.offset * self.shift], [1.0, self.shift]])

    @property
    def is_similarity(self) -> bool:
        return False

    def apply(self, x):
        return 1.0 / (x + self.shift) + self.offset

    def deriv(self, x):
        return -1.0 / (x + self.shift) ** 2

    def contraction_bound(self, interval) -> float:
        lo, _ = interval
        return 1.0 / (lo + self.shift) ** 2


@dataclass(frozen=True)
class Smooth:
    """Monotone C^1 map given by value and derivative oracles; offset added after."""

    fn: Callable[[np.ndarray], np.ndarray]
    dfn: Callable[[np.ndarray], np.ndarray]
    offset: float = 0.0
    # Lipschitz bound for log|derivative| on J, used for the certified
    # inflation factor of grid suprema; 0 means "not supplied".
    log_deriv_lipschitz: float = 0.0
    label: str = field(default="smooth", compare=False)

    @property
    def matrix(self) -> Optional[np.ndarray]:
        return None

    @property
    def is_similarity(self) -> bool:
        return False

    def apply(self, x):
        return self.fn(np.asarray(x, dtype=float)) + self.offset

    def deriv(self, x):
        return self.dfn(np.asarray(x, dtype=float))

    def contraction_bound(self, interval) -> float:
        grid = np.linspace(interval[0], interval[1], 1025)
        return float(np.max(np.abs(self.deriv(grid))))


Map1D = Similarity | Mobius | Smooth


def map_matrix(m: Map1D) -> Optional[np.ndarray]:
    return m.matrix


def batch_log_dets(mats: np.ndarray) -> np.ndarray:
    """log|det| per homography, safe only for near-orthogonal single maps.

    Long compositions must propagate log-dets additively instead: the
    determinant of a deep composition cancels catastrophically when
    recomputed from the (normalized) product entries.
    """
    det = mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
    if np.any(det == 0):
        raise NotConformalError("degenerate homography")
    return np.log(np.abs(det))


def batch_norms(mats: np.ndarray, interval, log_det: Optional[np.ndarray] = None) -> np.ndarray:
    """Sup over the interval of |derivative| for a batch of homographies.

    The derivative det/(cx+d)^2 is monotone on any interval avoiding the
    pole, so the supremum sits at an endpoint.  mats has shape (..., 2, 2);
    log_det, when given, is the exactly propagated log|det| of each matrix.
    """
    lo, hi = interval
    c = mats[..., 1, 0]
    d = mats[..., 1, 1]
    if log_det is None:
        log_det = batch_log_dets(mats)
    dlo = c * lo + d
    dhi = c * hi + d
    if np.any(dlo * dhi <= 0):
        raise NotConformalError("homography has a pole inside the base interval")
    denom = np.minimum(dlo * dlo, dhi * dhi)
    return np.exp(log_det - np.log(denom))


def batch_norm_bounds(
    mats: np.ndarray, interval, log_det: Optional[np.ndarray] = None
) -> tuple[np.ndarray, np.ndarray]:
    """(inf, sup) of |derivative| over the interval per homography."""
    lo, hi = interval
    c = mats[..., 1, 0]
    d = mats[..., 1, 1]
    if log_det is None:
        log_det = batch_log_dets(mats)
    dlo = (c * lo + d) ** 2
    dhi = (c * hi + d) ** 2
    return (
        np.exp(log_det - np.log(np.maximum(dlo, dhi))),
        np.exp(log_det - np.log(np.minimum(dlo, dhi))),
    )


def batch_intervals(mats: np.ndarray, interval) -> tuple[np.ndarray, np.ndarray]:
    """Image interval endpoints [lo, hi] per homography (maps are monotone)."""
    lo, hi = interval
    vlo = _homography_apply(np.moveaxis(mats, (-2, -1), (0, 1)), lo)
    vhi = _homography_apply(np.moveaxis(mats, (-2, -1), (0, 1)), hi)
    return np.minimum(vlo, vhi), np.maximum(vlo, vhi)


def normalize_mats(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rescale each matrix by its largest entry; the derivative is invariant.

    Returns (rescaled matrices, log of the scale per matrix) so callers can
    keep propagated log-dets consistent: det scales by scale^2.
    """
    scale = np.max(np.abs(mats), axis=(-2, -1), keepdims=True)
    return mats / scale, np.log(scale[..., 0, 0])
