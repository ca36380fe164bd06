"""Finite words over level-varying alphabets and cut sets.

Words are plain tuples of 1-based symbols; the Word wrapper adds the
per-level alphabet validation.  Cut sets collect the words whose
composition derivative norm first drops to or below delta.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .system import BudgetExceededError, CutGroups, LevelSchedule, System

EMPTY_WORD: tuple[int, ...] = ()


@dataclass(frozen=True)
class Word:
    symbols: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.symbols)

    @property
    def parent(self) -> "Word":
        if not self.symbols:
            raise ValueError("the empty word has no parent")
        return Word(self.symbols[:-1])

    def validate(self, schedule: LevelSchedule) -> "Word":
        for j, s in enumerate(self.symbols, start=1):
            if not 1 <= s <= schedule.alphabet_size(j):
                raise ValueError(f"symbol {s} at level {j} outside alphabet")
        return self


def enumerate_level(
    schedule: LevelSchedule, k: int, budget: int = 2**24
) -> Iterator[tuple[int, ...]]:
    """All depth-k words in lexicographic order; errors out past the budget."""
    if k < 0:
        raise ValueError("k must be >= 0")
    count = 1
    for j in range(1, k + 1):
        count *= schedule.alphabet_size(j)
        if count > budget:
            raise BudgetExceededError(
                f"level {k} holds more than {budget} words; use the product fast path"
            )
    import itertools

    return itertools.product(
        *(range(1, schedule.alphabet_size(j) + 1) for j in range(1, k + 1))
    )


@dataclass
class CutSet:
    members: list[tuple[int, ...]]
    delta: float
    k_min: int

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def mass_total(self, measure) -> float:
        return float(sum(measure.mass(w) for w in self.members))


def _materialize(groups: CutGroups) -> list[tuple[int, ...]]:
    members: list[tuple[int, ...]] = []
    for g in groups.groups:
        members.extend(tuple(int(s) for s in row) for row in g.words)
    members.sort()
    return members


def cut_set(system: System, delta: float) -> CutSet:
    """Prefix-free complete family at scale delta, members in lexicographic order."""
    groups = system.cut_groups(delta)
    return CutSet(members=_materialize(groups), delta=delta, k_min=groups.k_min)


def is_prefix(u: Sequence[int], v: Sequence[int]) -> bool:
    return len(u) <= len(v) and tuple(v[: len(u)]) == tuple(u)


def brute_force_cut_set(system: System, delta: float, max_depth: int) -> list[tuple[int, ...]]:
    """Independent oracle: scan every word to max_depth for the cut condition."""
    members = []
    for k in range(1, max_depth + 1):
        for w in enumerate_level(system.schedule, k):
            norm = system.deriv_norm(w)
            parent_norm = system.deriv_norm(w[:-1])
            if norm <= delta < parent_norm:
                members.append(w)
    return sorted(members)
