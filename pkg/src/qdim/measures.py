"""Symbolic measures on the word space: level products and Markov-Gibbs.

Product measures assign each cylinder the product of per-level probability
vector entries.  Gibbs measures for a 2-block potential are realized as the
stationary Markov chain built from the transfer matrix's Perron
eigenvectors; the sandwich certificate compares cylinder masses against
exp(-k*pressure + Birkhoff sum) on the periodic extension of each word.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

VECTOR_TOL = 1e-12


class NotMixingError(ValueError):
    """Raised with "potential not mixing" for reducible transfer matrices."""


@dataclass(frozen=True)
class ProductMeasure:
    """Per-level probability vectors following a prefix/periodic-tail layout."""

    tail: tuple[tuple[float, ...], ...]
    prefix: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self):
        if not self.tail:
            raise ValueError("a periodic tail of probability vectors is required")
        for vec in (*self.prefix, *self.tail):
            arr = np.asarray(vec, dtype=float)
            if np.any(arr <= 0):
                raise ValueError("probability entries must be positive")
            if abs(arr.sum() - 1.0) > VECTOR_TOL:
                raise ValueError(f"probability vector sums to {arr.sum()}, not 1")

    @classmethod
    def uniform(cls, sizes: Sequence[int], prefix_sizes: Sequence[int] = ()) -> "ProductMeasure":
        return cls(
            tail=tuple(tuple([1.0 / n] * n) for n in sizes),
            prefix=tuple(tuple([1.0 / n] * n) for n in prefix_sizes),
        )

    def vector(self, k: int) -> np.ndarray:
        if k < 1:
            raise ValueError("levels are 1-based")
        if k <= len(self.prefix):
            return np.asarray(self.prefix[k - 1], dtype=float)
        return np.asarray(self.tail[(k - len(self.prefix) - 1) % len(self.tail)], dtype=float)

    def mass(self, word: Sequence[int]) -> float:
        out = 1.0
        for k, s in enumerate(word, start=1):
            out *= self.vector(k)[s - 1]
        return out

    def mass_array(self, words: np.ndarray) -> np.ndarray:
        """Masses of a (n, k) block of words, one gather per level."""
        n, k = words.shape
        out = np.ones(n)
        for j in range(k):
            out *= self.vector(j + 1)[words[:, j] - 1]
        return out


def _perron(matrix: np.ndarray, tol: float = 1e-13, max_iter: int = 100_000):
    """Perron eigenvalue and positive eigenvector by power iteration."""
    n = matrix.shape[0]
    v = np.full(n, 1.0 / n)
    lam = 0.0
    for _ in range(max_iter):
        w = matrix @ v
        new_lam = float(np.linalg.norm(w))
        w = w / new_lam
        if abs(new_lam - lam) <= tol * new_lam and np.allclose(w, v, rtol=0, atol=tol):
            return new_lam, w
        lam, v = new_lam, w
    return lam, v


def _check_primitive(matrix: np.ndarray):
    n = matrix.shape[0]
    reach = (matrix > 0).astype(bool)
    power = reach.copy()
    for _ in range(n * n):
        if power.all():
            return
        power = power @ reach
    raise NotMixingError("potential not mixing")


def gibbs_pressure(potential: np.ndarray) -> float:
    """log of the Perron eigenvalue of exp(potential)."""
    f = np.asarray(potential, dtype=float)
    if f.ndim != 2 or f.shape[0] != f.shape[1]:
        raise ValueError("potential must be a square matrix")
    if not np.all(np.isfinite(f)):
        raise ValueError("potential entries must be finite")
    transfer = np.exp(f)
    _check_primitive(transfer)
    lam, _ = _perron(transfer)
    return math.log(lam)


@dataclass
class GibbsMeasure:
    """Stationary Markov chain realizing the Gibbs measure of a 2-block potential."""

    potential: np.ndarray
    pressure: float = field(init=False)
    left: np.ndarray = field(init=False)
    right: np.ndarray = field(init=False)
    initial: np.ndarray = field(init=False)
    transition: np.ndarray = field(init=False)

    def __post_init__(self):
        f = np.asarray(self.potential, dtype=float)
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise ValueError("potential must be a square matrix")
        if not np.all(np.isfinite(f)):
            raise ValueError("potential entries must be finite")
        self.potential = f
        transfer = np.exp(f)
        _check_primitive(transfer)
        lam, right = _perron(transfer)
        _, left = _perron(transfer.T)
        left = left / (left @ right)
        self.pressure = math.log(lam)
        self.right = right
        self.left = left
        self.initial = left * right
        self.transition = transfer * right[None, :] / (lam * right[:, None])

    @property
    def n_symbols(self) -> int:
        return self.potential.shape[0]

    def mass(self, word: Sequence[int]) -> float:
        if not word:
            return 1.0
        out = float(self.initial[word[0] - 1])
        for a, b in itertools.pairwise(word):
            out *= self.transition[a - 1, b - 1]
        return out

    def mass_array(self, words: np.ndarray) -> np.ndarray:
        n, k = words.shape
        if k == 0:
            return np.ones(n)
        out = self.initial[words[:, 0] - 1].copy()
        for j in range(k - 1):
            out *= self.transition[words[:, j] - 1, words[:, j + 1] - 1]
        return out

    def birkhoff_sum(self, words: np.ndarray) -> np.ndarray:
        """Potential Birkhoff sums on the periodic extension of each word."""
        n, k = words.shape
        out = np.zeros(n)
        for j in range(k):
            out += self.potential[words[:, j] - 1, words[:, (j + 1) % k] - 1]
        return out

    def certificate(self, depth: int, budget: int = 2**24) -> float:
        """Empirical sandwich constant a over all cylinders to the given depth."""
        if self.n_symbols**depth > budget:
            raise ValueError("certificate depth exceeds enumeration budget")
        a = 1.0
        for k in range(1, depth + 1):
            words = np.array(
                list(itertools.product(range(1, self.n_symbols + 1), repeat=k)),
                dtype=np.int16,
            )
            ratio = self.mass_array(words) / np.exp(
                -k * self.pressure + self.birkhoff_sum(words)
            )
            a = min(a, float(ratio.min()), float(1.0 / ratio.max()))
        return a


SymbolicMeasure = ProductMeasure | GibbsMeasure


def cylinder_mass(measure: SymbolicMeasure, word: Sequence[int]) -> float:
    return measure.mass(word)
