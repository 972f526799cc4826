import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bilinear_rdf.fourier import sharp_projection
from bilinear_rdf.grid import FreqRectangle, GridConfig, Interval, generate_collection
from bilinear_rdf.maximal import norm_lp
from bilinear_rdf.operators import (
    ExponentConfig,
    bilinear_projections,
    dilate_rectangle,
    doubled_collection,
    doubled_square_function,
    dual_optimal_h,
    holder_bound,
    linear_rdf,
    smooth_square_function,
    smooth_trilinear_form,
    smooth_trilinear_form_frequency,
    spectral_dilation,
    square_function,
    trilinear_form,
    trilinear_form_frequency,
)

from .conftest import cplx


def test_exponent_config_validation():
    with pytest.raises(ValueError):
        ExponentConfig(r=2.0)
    with pytest.raises(ValueError):
        ExponentConfig(r=4.0, r0=4.5)
    with pytest.raises(ValueError):
        ExponentConfig(p=3, q=3, s=2)
    with pytest.raises(ValueError):
        ExponentConfig(theta1=1.5)
    assert ExponentConfig().in_range()
    assert not ExponentConfig(p=1.2, q=3).in_range()
    assert ExponentConfig().to_dict()["gamma"] == pytest.approx(2 ** 2.25)


def test_square_function_single_rectangle(small_instance):
    c, f, g, _, _ = small_instance
    R = c.rects[0]
    P = sharp_projection(f, R.r1) * sharp_projection(g, R.r2)
    assert np.abs(square_function(f, g, [R], 3.0) - np.abs(P)).max() < 1e-12


def test_square_function_decreases_in_r(small_instance):
    c, f, g, _, _ = small_instance
    t2, t4, ti = (square_function(f, g, c, r) for r in (2.0, 4.0, math.inf))
    assert np.all(ti <= t4 + 1e-12) and np.all(t4 <= t2 + 1e-12)
    with pytest.raises(ValueError):
        square_function(f, g, c, 1.0)


def test_projection_cache_shares_sides(small_instance):
    c, f, g, _, _ = small_instance
    proj = bilinear_projections(f, g, c)
    assert set(proj) == set(c.rects)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_form_time_and_frequency_sides_agree(seed):
    rng = np.random.default_rng(seed)
    grid = GridConfig(log_size=6)
    c = generate_collection("recursive-bisection", seed % 1000, grid, {"depth": 3})
    f, g = cplx(rng, 64), cplx(rng, 64)
    h = {R: cplx(rng, 64) for R in c.rects}
    a, b = trilinear_form(f, g, h, c), trilinear_form_frequency(f, g, h, c)
    assert abs(a - b) <= 1e-10 * (1 + abs(a))


def test_smooth_form_sides_agree(small_instance):
    c, f, g, h, _ = small_instance
    a = smooth_trilinear_form(f, g, h, c)
    b = smooth_trilinear_form_frequency(f, g, h, c)
    assert abs(a - b) <= 1e-10 * (1 + abs(a))
    assert smooth_square_function(f, g, c, 4.0).shape == (64,)


def test_form_rejects_foreign_keys(small_instance):
    c, f, g, h, _ = small_instance
    alien = FreqRectangle.from_bounds(-8, -7, -8, -7)
    with pytest.raises(ValueError):
        trilinear_form(f, g, {alien: f}, c)


def test_dual_optimal_h_attains_l1_norm(small_instance):
    c, f, g, _, _ = small_instance
    r = 4.0
    h = dual_optimal_h(f, g, c, r)
    T = square_function(f, g, c, r)
    lam = trilinear_form(f, g, h, c)
    assert lam.real == pytest.approx(T.sum(), rel=1e-12)
    assert abs(lam.imag) < 1e-9 * T.sum()
    env = np.sum([np.abs(v) ** (r / (r - 1)) for v in h.values()], axis=0) ** ((r - 1) / r)
    assert np.all(env <= 1 + 1e-12)


def test_dual_h_respects_support(small_instance):
    c, f, g, _, size = small_instance
    mask = np.zeros(size)
    mask[::2] = 1
    h = dual_optimal_h(f, g, c, 4.0, support=mask)
    assert all(np.all(v[1::2] == 0) for v in h.values())
    with pytest.raises(ValueError):
        dual_optimal_h(f, g, c, math.inf)


def test_holder_bound(small_instance):
    c, f, g, h, _ = small_instance
    lam, bound = holder_bound(f, g, h, c, 4.0, 1.5)
    assert lam <= bound * (1 + 1e-12)


def test_linear_rdf_plancherel_and_overlap():
    prng = random.Random(1)
    rng = np.random.default_rng(1)
    f = cplx(rng, 64)
    cuts = sorted(prng.sample(range(-31, 32), 5))
    pts = [-32] + cuts + [32]
    ivs = [Interval(a, b) for a, b in zip(pts, pts[1:])]
    assert norm_lp(linear_rdf(f, ivs, 2.0), 2) == pytest.approx(norm_lp(f, 2), rel=1e-12)
    assert norm_lp(linear_rdf(f, ivs[::2], 2.0), 2) <= norm_lp(f, 2) * (1 + 1e-12)
    with pytest.raises(ValueError):
        linear_rdf(f, [Interval(0, 4), Interval(2, 6)], 2.0)


def test_doubled_collection_and_square():
    R = FreqRectangle.from_bounds(0, 4, 8, 16)
    (a, b), = doubled_collection([R])
    assert (a.lo, a.hi, b.lo, b.hi) == (-2, 6, 4, 20)
    rng = np.random.default_rng(2)
    f, g = cplx(rng, 64), cplx(rng, 64)
    D = doubled_square_function(f, g, [R], 2.0)
    P = sharp_projection(f, (-2, 6)) * sharp_projection(g, (4, 20))
    assert np.abs(D - np.abs(P)).max() < 1e-12


def test_spectral_dilation_scales_norms_and_rectangles(small_instance):
    c, f, g, _, _ = small_instance
    f2 = spectral_dilation(f)
    assert norm_lp(f2, 3) == pytest.approx(2 ** (1 / 3) * norm_lp(f, 3))
    R = c.rects[0]
    R2 = dilate_rectangle(R)
    assert R2.r1.lo == 2 * R.r1.lo and R2.r2.hi == 2 * R.r2.hi
    T = square_function(f, g, [R], 4.0)
    T2 = square_function(f2, spectral_dilation(g), [R2], 4.0)
    assert np.abs(T2 - np.concatenate([T, T])).max() < 1e-12
