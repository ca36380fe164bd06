"""Closed-form similarity-dimension oracle for level schedules."""

import math

import pytest

from qdim import LevelSchedule, Mobius, Similarity, System, moran_limits, moran_sk
from qdim.moran import NotSimilarityError

LN6_OVER_LN20 = math.log(6.0) / math.log(20.0)


def block_doubling_schedule(k_max: int) -> LevelSchedule:
    """Family A (two 1/4-maps) on levels with even floor(log2 k), else B
    (three 1/5-maps); the block lengths double so the per-prefix roots never
    settle."""
    a = (Similarity(0.25, 0.0), Similarity(0.25, 0.75))
    b = (Similarity(0.2, 0.0), Similarity(0.2, 0.4), Similarity(0.2, 0.8))
    fams = tuple(
        a if int(math.floor(math.log2(k))) % 2 == 0 else b for k in range(1, k_max + 1)
    )
    return LevelSchedule((0.0, 1.0), (fams[-1],), prefix=fams)


def test_autonomous_root_is_similarity_dimension(cantor):
    for k in (1, 3, 10):
        assert moran_sk(cantor.schedule, k) == pytest.approx(
            math.log(2) / math.log(3), abs=1e-12
        )


def test_alternating_even_prefixes_hit_closed_form(alternating):
    # after a whole period the equation is (2 * 4^-s)(3 * 5^-s) = 1,
    # i.e. s = ln 6 / ln 20
    for k in (2, 4, 8, 16, 20):
        assert abs(moran_sk(alternating.schedule, k) - LN6_OVER_LN20) <= 1e-10


def test_alternating_odd_prefixes_oscillate(alternating):
    s1 = moran_sk(alternating.schedule, 1)
    assert s1 == pytest.approx(0.5, abs=1e-12)  # 2 * 4^-s = 1
    assert s1 != pytest.approx(LN6_OVER_LN20, abs=1e-3)


def test_alternating_limits_window(alternating):
    report = moran_limits(alternating.schedule, 20)
    assert report.s_star <= LN6_OVER_LN20 <= report.s_upper + 1e-12
    assert report.gap < 0.01


def test_block_doubling_reports_oscillation():
    report = moran_limits(block_doubling_schedule(64), 64)
    assert report.verdict == "oscillating"
    assert report.gap >= 0.01


def test_non_similarity_rejected(mobius):
    with pytest.raises(NotSimilarityError):
        moran_sk(mobius.schedule, 3)


def test_k_max_floor():
    sched = LevelSchedule((0.0, 1.0), ((Similarity(0.5, 0.0), Similarity(0.5, 0.5)),))
    with pytest.raises(ValueError):
        moran_limits(sched, 3)
