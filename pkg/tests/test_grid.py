import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bilinear_rdf.grid import (
    DyadicInterval,
    FreqRectangle,
    GridConfig,
    Interval,
    RectangleCollection,
    covering_dyadic_rectangle,
    dyadic_from_bounds,
    eccentricity,
    generate_collection,
    iter_time_dyadic,
    k_separation_check,
    random_rational_rect,
    shift_interval,
    split_by_eccentricity,
    validate_disjoint,
    whitney_decomposition,
    whitney_subcollection,
)

MODES = ["unit-grid", "recursive-bisection", "strip-like", "stacked"]

dyadic = st.builds(DyadicInterval, st.integers(0, 6), st.integers(-40, 40))


@given(dyadic, dyadic)
def test_dyadic_intervals_nest_or_are_disjoint(a, b):
    assert a.contains(b) or b.contains(a) or not a.intersects(b)


@given(st.sampled_from(["D1", "D2"]), st.integers(-4, 6), st.integers(-20, 20), st.integers(-20, 20))
def test_shifted_grids_are_nested_within_a_grid(grid, k, m1, m2):
    a = DyadicInterval(k, m1, grid)
    b = DyadicInterval(k + 1, m2, grid)
    assert b.contains(a) or not b.intersects(a)


def test_parent_children_roundtrip():
    d = DyadicInterval(3, -5)
    for ch in d.children():
        assert ch.parent() == d
        assert d.contains(ch)


def test_dyadic_from_bounds_rejects_non_dyadic():
    assert dyadic_from_bounds(8, 16) == DyadicInterval(3, 1)
    for lo, hi in ((1, 3), (0, 3), (4, 4)):
        with pytest.raises(ValueError):
            dyadic_from_bounds(lo, hi)


def test_grid_config_validation():
    with pytest.raises(ValueError):
        GridConfig(log_size=2)
    with pytest.raises(ValueError):
        GridConfig(log_size=6, freq_box_radius=9)
    with pytest.raises(ValueError):
        GridConfig(log_size=6, phi_decay=3)


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("seed", range(5))
def test_generated_collections_are_disjoint_and_boxed(mode, seed):
    cfg = GridConfig(log_size=7)
    c = generate_collection(mode, seed, cfg)
    assert len(c) > 0
    assert validate_disjoint(c)[0]
    for R in c:
        for side in (R.r1, R.r2):
            assert -cfg.radius <= side.lo and side.hi <= cfg.radius


def test_generation_is_deterministic():
    cfg = GridConfig(log_size=8)
    a = generate_collection("recursive-bisection", 11, cfg)
    b = generate_collection("recursive-bisection", 11, cfg)
    assert a.rects == b.rects


@pytest.mark.parametrize("seed", range(10))
def test_stacked_has_high_eccentricity_and_disjoint_second_sides(seed):
    c = generate_collection("stacked", seed, GridConfig(log_size=8))
    assert all(eccentricity(R) >= 1 for R in c)
    sides = sorted((R.r2 for R in c), key=lambda s: s.lo)
    assert all(a.hi <= b.lo for a, b in zip(sides, sides[1:]))


def test_single_mode_and_bad_inputs():
    cfg = GridConfig(log_size=6)
    c = generate_collection("single", 0, cfg, {"r1": (0, 2), "r2": (-4, 0)})
    assert c.rects == (FreqRectangle.from_bounds(0, 2, -4, 0),)
    with pytest.raises(ValueError):
        generate_collection("single", 0, cfg, {"r1": (0, 2)})
    with pytest.raises(ValueError):
        generate_collection("nope", 0, cfg)
    with pytest.raises(ValueError):
        generate_collection("single", 0, cfg, {"r1": (0, 16), "r2": (0, 1)})


def test_validate_disjoint_finds_witness():
    a = FreqRectangle.from_bounds(0, 4, 0, 4)
    b = FreqRectangle.from_bounds(2, 3, 3, 4)
    ok, w = validate_disjoint([a, b])
    assert not ok and set(w) == {a, b}


def test_k_separation():
    a = FreqRectangle.from_bounds(0, 1, 0, 1)
    b = FreqRectangle.from_bounds(2, 3, 0, 1)
    assert k_separation_check([a, b], 1)
    assert k_separation_check([a, b], 2)
    assert not k_separation_check([a, b], 3)


def test_unit_grid_is_not_3_separated():
    c = generate_collection("unit-grid", 0, GridConfig(log_size=6), {"lo": 0, "hi": 2})
    assert k_separation_check(c, 1) and not k_separation_check(c, 3)


def test_split_by_eccentricity():
    c = RectangleCollection((FreqRectangle.from_bounds(0, 1, 0, 4), FreqRectangle.from_bounds(0, 4, 4, 5)))
    high, low = split_by_eccentricity(c)
    assert eccentricity(high.rects[0]) == 4 and eccentricity(low.rects[0]) == Fraction(1, 4)


def test_shift_interval_periodic():
    assert shift_interval(DyadicInterval(2, 3), 1, 16) == DyadicInterval(2, 0)
    assert shift_interval(DyadicInterval(2, 0), -1, 16) == DyadicInterval(2, 3)
    assert shift_interval(Interval(12, 15), 1, 16) == Interval(15, 18)


def test_r3_core_holds_all_sums():
    R = FreqRectangle.from_bounds(-4, 0, 8, 16)
    core = R.r3_core()
    assert core.length == 4 + 8
    sums = {-(a + b) for a in range(-4, 0) for b in range(8, 16)}
    assert all(core.lo <= s < core.hi for s in sums)
    assert R.r3().length == 2 * core.length


def test_json_roundtrip():
    c = generate_collection("stacked", 4, GridConfig(log_size=7))
    assert RectangleCollection.from_json_obj(c.to_json_obj()).rects == c.rects


def test_covering_always_contains_rectangle():
    rng = random.Random(0)
    for _ in range(300):
        r = random_rational_rect(rng)
        cov = covering_dyadic_rectangle(r)
        assert cov.r1.lo <= r.r1.lo and r.r1.hi <= cov.r1.hi
        assert cov.r2.lo <= r.r2.lo and r.r2.hi <= cov.r2.hi
        assert cov.factor <= 6


@pytest.mark.xfail(strict=True, reason="a cover inside the triple dilate is not always available (see ledger)")
def test_covering_within_triple_for_every_rectangle():
    rng = random.Random(0)
    assert all(covering_dyadic_rectangle(random_rational_rect(rng)).within_triple for _ in range(300))


def test_whitney_geometry():
    fam = whitney_decomposition(depth=6)
    half = Fraction(1, 2)
    for j, lv in enumerate(fam.levels):
        assert len(lv) == 32
        for piece in lv:
            assert piece.length == Fraction(1, 2 ** (j + 6))
            big = piece.dilate(16)
            assert -half <= big.lo and big.hi <= half
    ivs = sorted(fam.intervals)
    assert all(a.hi <= b.lo for a, b in zip(ivs, ivs[1:]))
    uncovered = 1 - sum(i.length for i in ivs)
    assert uncovered == Fraction(1, 2 ** 6)
    for j, c in enumerate(fam.coefficients):
        assert c <= fam.gamma_constant * fam.gamma ** j * (1 + 1e-12)


def test_whitney_subcollection_one_per_rectangle():
    fam = whitney_decomposition(depth=3)
    rects = [FreqRectangle.from_bounds(0, 4, 0, 8), FreqRectangle.from_bounds(8, 16, -8, 0)]
    sub = whitney_subcollection(rects, fam, 1, 2)
    assert len(sub) == 2
    for R, W in zip(rects, sub):
        assert W.r1.length == R.r1.length * fam.levels[1][0].length * Fraction(4, 3)
        assert W.r2.length == R.r2.length * fam.levels[2][0].length * Fraction(4, 3)


def test_iter_time_dyadic_counts():
    assert sum(1 for _ in iter_time_dyadic(16)) == 16 + 8 + 4 + 2 + 1
    assert all(d.scale >= 2 for d in iter_time_dyadic(16, 2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_recursive_bisection_tiles_the_box(seed):
    cfg = GridConfig(log_size=6)
    c = generate_collection("recursive-bisection", seed, cfg, {"stop_prob": 0.0, "depth": 3})
    assert sum(R.area for R in c) == (2 * cfg.radius) ** 2
