import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bilinear_rdf.grid import DyadicInterval, FreqRectangle, GridConfig, generate_collection
from bilinear_rdf.operators import ExponentConfig
from bilinear_rdf.tiles import (
    Column,
    ColumnFamily,
    SuperTile,
    column_bound_check,
    energy,
    energy_bounds_check,
    enumerate_super_tiles,
    f_averages,
    family_svg,
    greedy_family,
    maximal_column,
    mirror_collection,
    mirror_data,
    order_lt,
    order_prec,
    shifted_form,
    shifted_form_by_tile,
    size_f,
    size_h,
    size_h_exhaustive,
    small_tiles_of,
)

from .conftest import cplx

CFG = ExponentConfig()


def _instance(seed, log_size=6):
    grid = GridConfig(log_size=log_size)
    c = generate_collection("stacked", seed, grid)
    rng = np.random.default_rng(seed)
    size = grid.size
    f = cplx(rng, size) * (rng.random(size) < 0.6)
    g = cplx(rng, size)
    h = {R: rng.normal(size=size) * rng.random() ** 2 for R in c.rects}
    return c, enumerate_super_tiles(c, size), f, g, h, size


def test_pool_counts_and_heisenberg_area():
    c, pool, *_ , size = _instance(1)
    assert len(pool) == sum(int(R.r1.length) for R in c)
    assert all(p.rect.r1.length * p.time.length == size for p in pool)
    window = enumerate_super_tiles(c, size, window=(0, size // 2))
    assert all(p.time.hi <= size // 2 for p in window)


def test_small_tiles_fill_the_shifted_interval():
    c, pool, *_ , size = _instance(2)
    for p in pool[:20]:
        for n in (-3, 0, 5):
            st_ = small_tiles_of(p, n)
            assert len(st_) == p.eccentricity_count
            iv = p.shifted(n)
            assert all(iv.contains(s.time) for s in st_)
            assert sum(s.time.length for s in st_) == iv.length


def test_super_tile_validation():
    R = FreqRectangle.from_bounds(0, 4, 0, 1)
    with pytest.raises(ValueError):
        SuperTile(R, DyadicInterval(2, 0)).eccentricity_count
    with pytest.raises(ValueError):
        SuperTile(R, DyadicInterval(2, 0, "D1"))


def test_orders():
    R = FreqRectangle.from_bounds(0, 4, 0, 8)
    Q = FreqRectangle.from_bounds(0, 2, 8, 16)
    p = SuperTile(R, DyadicInterval(4, 1))  # N = 64
    q = SuperTile(Q, DyadicInterval(5, 0))
    assert order_prec(p, q, 0)
    assert not order_prec(q, p, 0)
    assert order_lt(p, q)
    assert order_prec(p, p, 3) and not order_prec(p, p, 3, strict=True)


def test_column_rejects_non_member():
    R = FreqRectangle.from_bounds(0, 4, 0, 8)
    p = SuperTile(R, DyadicInterval(4, 1))
    q = SuperTile(R, DyadicInterval(4, 2))
    with pytest.raises(ValueError):
        Column(p, frozenset({q}), 0)


def test_maximal_column_contains_everything_below():
    c, pool, *_ = _instance(3)
    for top in pool[:10]:
        col = maximal_column(top, pool, 2)
        assert col.members == {p for p in pool if order_prec(p, top, 2)}
    with pytest.raises(ValueError):
        maximal_column(SuperTile(FreqRectangle.from_bounds(-8, -7, -8, -4), DyadicInterval(6, 0)), pool, 0)


def test_size_f_single_tile_is_local_average():
    c, pool, f, *_ = _instance(4)
    p = pool[0]
    from bilinear_rdf.fourier import sharp_projection

    a = np.abs(sharp_projection(f, p.rect.r1)[p.time.lo:p.time.hi]) ** CFG.r0
    assert size_f([p], f, CFG) == pytest.approx(a.mean() ** (1 / CFG.r0), rel=1e-12)
    assert f_averages(pool, f, CFG.r0).max() == size_f(pool, f, CFG)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(-4, 4))
def test_size_h_top_scan_equals_exhaustive(seed, n):
    _, pool, _, _, h, _ = _instance(seed)
    sub = random.Random(seed).sample(pool, min(10, len(pool)))
    assert size_h(sub, h, n, CFG) == size_h_exhaustive(sub, h, n, CFG)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(-3, 3))
def test_greedy_energy_never_beats_exhaustive(seed, n):
    _, pool, f, _, h, _ = _instance(seed)
    sub = random.Random(seed).sample(pool, min(10, len(pool)))
    for data in (f, h):
        assert energy(sub, data, n, CFG).value <= energy(sub, data, n, CFG, "exhaustive").value


def test_energy_modes_and_limits():
    _, pool, f, _, h, _ = _instance(5)
    with pytest.raises(ValueError):
        energy(pool, f, 0, CFG, "bogus")
    big = enumerate_super_tiles(generate_collection("stacked", 5, GridConfig(log_size=8)), 256)
    assert len(big) > 14
    with pytest.raises(ValueError):
        energy(big, np.ones(256), 0, CFG, "exhaustive")
    assert energy([], f, 0, CFG).value == 0.0
    res = energy(pool, h, 0, CFG)
    assert res.family.mutually_disjoint()
    assert json.loads(json.dumps(res.to_dict()))["kind"] == "h"


@pytest.mark.parametrize("seed", range(6))
def test_greedy_families_are_mutually_disjoint(seed):
    _, pool, f, _, h, _ = _instance(seed, 7)
    for data in (f, h):
        E = energy(pool, data, 1, CFG)
        if E.exponent is None:
            continue
        fam = greedy_family(pool, data, 1, CFG, E.exponent)
        assert fam.disjointness_violation() is None
        back = ColumnFamily.from_dict(json.loads(fam.to_json()))
        assert back.tiles() == fam.tiles()


@pytest.mark.parametrize("seed", range(5))
def test_column_estimate_chain(seed):
    c, pool, f, g, h, _ = _instance(seed, 7)
    top = random.Random(seed).choice(pool)
    rep = column_bound_check(maximal_column(top, pool, 1), f, g, h, CFG)
    assert rep.step_a_ok and rep.step_b_ok and rep.step_c_ok
    assert rep.holds
    assert rep.constant_c > 1


def test_shifted_form_sums_tiles():
    _, pool, f, g, h, _ = _instance(6)
    per = shifted_form_by_tile(pool, f, g, h, 2, CFG)
    assert sum(per.values()) == pytest.approx(shifted_form(pool, f, g, h, 2, CFG), rel=1e-12)
    assert all(v >= 0 for v in per.values())
    assert shifted_form([], f, g, h, 0, CFG) == 0.0


def test_energy_bounds_report():
    _, pool, f, _, h, _ = _instance(7)
    rep = energy_bounds_check(pool, f, h, 0, CFG)
    assert rep.ok and rep.ratio_f <= rep.constant and rep.ratio_h <= rep.constant


def test_mirror_roundtrip():
    c, _, f, g, h, _ = _instance(8)
    m = mirror_collection(c)
    assert mirror_collection(m).rects == c.rects
    new_f, new_g, h2 = mirror_data(f, g, h)
    assert new_f is g and new_g is f
    assert set(h2) == set(m.rects)


def test_family_svg_renders():
    _, pool, f, *_ = _instance(9)
    E = energy(pool, f, 0, CFG)
    svg = family_svg(greedy_family(pool, f, 0, CFG, E.exponent), 64, pool)
    assert svg.startswith("<svg") and svg.endswith("</svg>")
