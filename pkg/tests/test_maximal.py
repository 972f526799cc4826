import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bilinear_rdf.grid import FreqRectangle
from bilinear_rdf.maximal import (
    BreakpointSet,
    carleson,
    default_breakpoints,
    full_breakpoints,
    log_plus,
    mixed_norm,
    norm_lp,
    partial_sums,
    shifted_maximal,
    variational_carleson,
    variational_carleson_exhaustive,
    weak_type_constant,
)

from .conftest import cplx


def test_breakpoint_validation():
    with pytest.raises(ValueError):
        BreakpointSet((-4, 0), 8)
    with pytest.raises(ValueError):
        BreakpointSet((-4, 0, 0, 4), 8)
    assert BreakpointSet.build(8, [1, 2, 99]).points == (-4, 1, 2, 4)


def test_partial_sums_ends(rng):
    f = cplx(rng, 32)
    S = partial_sums(f, [-16, 16])
    assert np.abs(S[0]).max() == 0
    assert np.abs(S[1] - f).max() < 1e-12


def test_carleson_dominates_every_partial_sum(rng):
    f = cplx(rng, 64)
    cf = carleson(f)
    S = partial_sums(f, range(-32, 33))
    assert np.all(np.abs(S) <= cf[None, :] + 1e-12)
    assert np.all(np.abs(f) <= cf + 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.0]))
def test_variation_dp_matches_exhaustive(seed, r):
    g = cplx(np.random.default_rng(seed), 8)
    bp = full_breakpoints(8)
    assert np.array_equal(variational_carleson(g, r, bp), variational_carleson_exhaustive(g, r, bp))


def test_variation_decreases_in_r_and_dominates_carleson(rng):
    g = cplx(rng, 64)
    v2, v4 = variational_carleson(g, 2.0), variational_carleson(g, 4.0)
    assert np.all(v4 <= v2 + 1e-12)
    assert np.all(carleson(g) <= v4 + 1e-12)


def test_variation_chunking_is_invisible(rng):
    g = cplx(rng, 64)
    assert np.array_equal(variational_carleson(g, 3.0, chunk=7), variational_carleson(g, 3.0))


def test_variation_rejects_bad_input(rng):
    with pytest.raises(ValueError):
        variational_carleson(cplx(rng, 8), 0.5)
    with pytest.raises(ValueError):
        variational_carleson(cplx(rng, 8), 2.0, full_breakpoints(16))
    with pytest.raises(ValueError):
        variational_carleson_exhaustive(cplx(rng, 32), 2.0)


def test_default_breakpoints():
    assert len(default_breakpoints(64)) == 65
    R = FreqRectangle.from_bounds(3, 4, -7, -6)
    bp = default_breakpoints(2048, [R])
    assert len(bp) <= 513 + 4
    assert {3, 4, -7, -6} <= set(bp.points)


def test_shifted_maximal_shift_moves_mass(rng):
    f = np.zeros(16)
    f[8] = 1.0
    # the unit interval at 0 shifted by 8 lands on the impulse
    assert shifted_maximal(f, 8)[0] == 1.0
    assert np.all(shifted_maximal(f, 0) >= np.abs(f))


def test_weak_type_constant_is_bounded(rng):
    f = cplx(rng, 256)
    Mf = shifted_maximal(f, 5)
    levels = np.quantile(Mf, [0.1, 0.5, 0.9])
    assert 0 < weak_type_constant(f, 5, levels) < 10
    assert weak_type_constant(np.zeros(8), 1, [1.0]) == 0.0


def test_norms():
    assert norm_lp([3, 4], 2) == 5
    assert norm_lp([3, -4], math.inf) == 4
    with pytest.raises(ValueError):
        norm_lp([1], 0.5)
    h = [np.array([3.0, 0.0]), np.array([4.0, 1.0])]
    assert mixed_norm(h, 1, 2) == pytest.approx(6.0)
    assert mixed_norm(h, 2, math.inf) == pytest.approx(math.sqrt(17))
    with pytest.raises(ValueError):
        mixed_norm([], 2, 2)


def test_log_plus():
    assert log_plus(0) == 1.0
    assert log_plus(-2) == 2.0
