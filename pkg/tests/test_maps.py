"""Map primitives: homography algebra, derivative norms, composition."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdim.maps import (
    Mobius,
    NotConformalError,
    Similarity,
    Smooth,
    batch_intervals,
    batch_log_dets,
    batch_norm_bounds,
    batch_norms,
    normalize_mats,
)

INTERVAL = (0.0, 1.0)


def test_similarity_apply_deriv():
    m = Similarity(0.4, 0.1)
    assert m.apply(0.0) == pytest.approx(0.1)
    assert m.apply(1.0) == pytest.approx(0.5)
    assert np.allclose(m.deriv(np.linspace(0, 1, 5)), 0.4)
    assert m.contraction_bound(INTERVAL) == 0.4


def test_similarity_orientation():
    m = Similarity(0.5, 1.0, orientation=-1)
    assert m.apply(0.0) == pytest.approx(1.0)
    assert m.apply(1.0) == pytest.approx(0.5)
    assert np.all(m.deriv(np.array([0.2])) == -0.5)


@pytest.mark.parametrize("ratio", [0.0, 1.0, -0.2, 1.5])
def test_similarity_rejects_bad_ratio(ratio):
    with pytest.raises(ValueError):
        Similarity(ratio)


def test_mobius_matches_formula():
    m = Mobius(2.0, offset=0.25)
    x = np.linspace(0, 1, 7)
    assert np.allclose(m.apply(x), 1.0 / (x + 2.0) + 0.25)
    assert np.allclose(m.deriv(x), -1.0 / (x + 2.0) ** 2)


def test_mobius_rejects_weak_shift():
    with pytest.raises(ValueError):
        Mobius(1.5)


def test_mobius_matrix_agrees_with_apply():
    m = Mobius(3.0, offset=0.1)
    a, b = m.matrix[0]
    c, d = m.matrix[1]
    x = np.linspace(0, 1, 9)
    assert np.allclose((a * x + b) / (c * x + d), m.apply(x))


def test_matrix_product_is_composition():
    f, g = Mobius(2.0), Mobius(3.0)
    prod = f.matrix @ g.matrix
    a, b = prod[0]
    c, d = prod[1]
    x = np.linspace(0, 1, 9)
    assert np.allclose((a * x + b) / (c * x + d), f.apply(g.apply(x)))


def test_batch_norms_endpoint_supremum():
    mats = np.stack([Mobius(2.0).matrix, Mobius(3.0).matrix, Similarity(0.3, 0.2).matrix])
    grid = np.linspace(0, 1, 20001)
    for mat, norm in zip(mats, batch_norms(mats, INTERVAL)):
        a, b = mat[0]
        c, d = mat[1]
        det = a * d - b * c
        dense = np.abs(det / (c * grid + d) ** 2)
        assert norm == pytest.approx(dense.max(), rel=1e-9)


def test_batch_norm_bounds_order():
    mats = np.stack([Mobius(2.0).matrix, (Mobius(2.0).matrix @ Mobius(3.0).matrix)])
    lo, hi = batch_norm_bounds(mats, INTERVAL)
    assert np.all(lo <= hi)
    assert np.allclose(hi, batch_norms(mats, INTERVAL))


def test_batch_norms_detects_pole():
    # pole at x = 1/2 sits inside [0, 1]
    mats = np.array([[[0.0, 1.0], [2.0, -1.0]]])
    with pytest.raises(NotConformalError):
        batch_norms(mats, INTERVAL)


def test_batch_intervals_monotone_images():
    mats = np.stack([Mobius(2.0).matrix, Similarity(0.5, 0.5).matrix])
    lo, hi = batch_intervals(mats, INTERVAL)
    assert lo[0] == pytest.approx(1 / 3)
    assert hi[0] == pytest.approx(1 / 2)
    assert lo[1] == pytest.approx(0.5)
    assert hi[1] == pytest.approx(1.0)


def test_normalize_preserves_derivative():
    raw = Mobius(2.0).matrix @ Mobius(3.0).matrix @ Mobius(2.0).matrix
    scaled, log_scale = normalize_mats(raw[None])
    assert np.max(np.abs(scaled)) == pytest.approx(1.0)
    # derivative value at a point is invariant under rescaling
    x = 0.37
    vals = []
    for mat in (raw, scaled[0]):
        a, b = mat[0]
        c, d = mat[1]
        vals.append((a * d - b * c) / (c * x + d) ** 2)
    assert vals[0] == pytest.approx(vals[1], rel=1e-12)
    assert log_scale[0] == pytest.approx(math.log(np.max(np.abs(raw))))


def test_log_det_propagation_beats_entry_cancellation():
    """Deep Moebius products: recomputing det from entries loses all digits,
    the additively propagated log-det stays exact."""
    f = Mobius(2.0)
    single_ld = batch_log_dets(f.matrix[None])[0]
    mat = np.eye(2)[None]
    log_det = 0.0
    depth = 40
    for _ in range(depth):
        mat, log_scale = normalize_mats(mat @ f.matrix[None])
        log_det += single_ld - 2.0 * float(log_scale[0])
    # chain rule reference: |D(f^depth)| at x via pointwise products
    x = np.array([0.0])
    d = 1.0
    for _ in range(depth):
        d *= abs(float(f.deriv(x)[0]))
        x = f.apply(x)
    norm = batch_norms(mat, INTERVAL, np.array([log_det]))[0]
    assert d <= norm * (1 + 1e-9)
    assert norm == pytest.approx(d, rel=1e-6)  # sup is attained at x = 0


def test_smooth_map_wraps_callables():
    m = Smooth(fn=lambda x: 0.25 * x**2 + 0.1, dfn=lambda x: 0.5 * x, offset=0.0)
    x = np.linspace(0, 1, 5)
    assert np.allclose(m.apply(x), 0.25 * x**2 + 0.1)
    assert np.allclose(m.deriv(x), 0.5 * x)
    assert m.matrix is None
    assert m.contraction_bound(INTERVAL) == pytest.approx(0.5)


@settings(max_examples=60, deadline=None)
@given(
    shift1=st.floats(2.0, 8.0),
    shift2=st.floats(2.0, 8.0),
    x=st.floats(0.0, 1.0),
)
def test_homography_composition_chain_rule(shift1, shift2, x):
    f, g = Mobius(shift1), Mobius(shift2)
    prod = f.matrix @ g.matrix
    a, b = prod[0]
    c, d = prod[1]
    det = a * d - b * c
    composed = det / (c * x + d) ** 2
    chained = f.deriv(g.apply(x)) * g.deriv(x)
    assert composed == pytest.approx(chained, rel=1e-12, abs=1e-15)
