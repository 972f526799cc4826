import json
import math

import numpy as np
import pytest

from bilinear_rdf.experiments import (
    RWTConfig,
    RunConfig,
    SetSpec,
    content_hash,
    dilation_homogeneity,
    distance_class,
    envelope_fit,
    exceptional_set,
    exponent_residuals,
    in_rwt_window,
    interpolation_exponents,
    interpolation_limit,
    load_config,
    norm_ratio,
    norm_ratio_sweep,
    random_restricted,
    restricted_weak_type_experiment,
    rows_to_csv,
    shifted_level_score,
    trial_seed,
    write_report,
)
from bilinear_rdf.grid import DyadicInterval, FreqRectangle, GridConfig, generate_collection
from bilinear_rdf.maximal import log_plus
from bilinear_rdf.operators import ExponentConfig
from bilinear_rdf.tiles import SuperTile

from .conftest import cplx

RWT_CFG = ExponentConfig(r=4.0, r0=3.0, p=3.5, q=4.0)


def test_set_spec_validation_and_roundtrip():
    with pytest.raises(ValueError):
        SetSpec(np.array([0, 2]), np.array([0, 1]), np.array([1, 1]))
    with pytest.raises(ValueError):
        SetSpec(np.ones(4), np.ones(4), np.ones(8))
    spec = SetSpec.random(64, np.random.default_rng(0))
    back = SetSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
    assert back.measures == spec.measures
    assert np.array_equal(back.H, spec.H)


def test_rwt_config_validation_and_roundtrip():
    with pytest.raises(ValueError):
        RWTConfig(c_f=0.0)
    with pytest.raises(ValueError):
        RWTConfig(max_doublings=-1)
    cfg = RWTConfig(n_shift=3, density=(0.2, 0.4, 0.6))
    assert RWTConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_exceptional_set_empty_for_zero_signals():
    spec = SetSpec.full(64)
    exc = exceptional_set(np.zeros(64), np.zeros(64), spec, 0, RWT_CFG)
    assert exc.measure == 0
    assert exc.H_prime.sum() == 64 and exc.doublings == 0


@pytest.mark.parametrize("seed", range(4))
def test_exceptional_set_leaves_major_subset(seed):
    rng = np.random.default_rng(seed)
    spec = SetSpec.random(128, rng)
    f, g = random_restricted(spec.F, rng), random_restricted(spec.G, rng)
    exc = exceptional_set(f, g, spec, seed, RWT_CFG)
    assert 2 * exc.measure < spec.measures[2]
    assert 2 * int(exc.H_prime.sum()) > spec.measures[2]
    assert not np.any(exc.H_prime & exc.E)


def test_level_score_is_monotone_in_the_signal():
    rng = np.random.default_rng(3)
    logu = np.log(rng.random(64))
    bump = logu + rng.random(64)
    w = lambda s: 1.0 + np.asarray(s, dtype=float) ** 2
    assert np.all(shifted_level_score(bump, w) >= shifted_level_score(logu, w))


def test_level_score_matches_brute_force():
    rng = np.random.default_rng(8)
    N = 16
    u = rng.random(N) ** 3
    w = lambda s: log_plus(s) * (1.0 + (np.asarray(s, dtype=float) + 2) ** 2)
    got = shifted_level_score(np.log(u), w)
    want = np.full(N, -np.inf)
    width = 1
    while width <= N:
        for lo in range(0, N, width):
            for s in range(-4 * N, 4 * N + 1):
                idx = (np.arange(lo, lo + width) + s * width) % N
                v = math.log(u[idx].mean() / float(w(s)))
                want[lo:lo + width] = np.maximum(want[lo:lo + width], v)
        width *= 2
    assert np.allclose(got, want, rtol=0, atol=1e-12)


def test_random_restricted_is_supported_on_set():
    mask = np.zeros(32)
    mask[::3] = 1
    v = random_restricted(mask, np.random.default_rng(1))
    assert np.all(v[mask == 0] == 0)
    assert np.allclose(np.abs(v[mask == 1]), 1.0)
    assert np.all(np.abs(random_restricted(mask, np.random.default_rng(1), moduli=True)) <= 1)


def test_rwt_window():
    assert in_rwt_window(RWT_CFG)
    assert not in_rwt_window(RWT_CFG, p=2.5)
    spec = SetSpec.full(64)
    c = generate_collection("stacked", 0, GridConfig(log_size=6))
    with pytest.raises(ValueError):
        restricted_weak_type_experiment(spec, c, ExponentConfig(r=4.0, r0=3.0, p=2.5, q=4.0))


def test_rwt_with_empty_f_has_zero_form():
    rng = np.random.default_rng(0)
    spec = SetSpec(np.zeros(64), (rng.random(64) < 0.5).astype(int), np.ones(64))
    c = generate_collection("stacked", 0, GridConfig(log_size=6))
    rep = restricted_weak_type_experiment(spec, c, RWT_CFG)
    assert rep.form == 0.0 and rep.ratio == 0.0


@pytest.mark.parametrize("seed", range(3))
def test_rwt_report_basic_invariants(seed):
    grid = GridConfig(log_size=7)
    spec = SetSpec.random(grid.size, np.random.default_rng(seed))
    c = generate_collection("stacked", seed, grid)
    rep = restricted_weak_type_experiment(spec, c, RWT_CFG, seed=seed)
    assert rep.major_subset and rep.h_envelope_ok
    assert math.isfinite(rep.ratio)
    assert rep.envelope["dominated"]
    row = rep.row()
    assert row["E"] == rep.measure_E and row["N"] == grid.size
    json.dumps(rep.to_dict())


def test_distance_class():
    p = SuperTile(FreqRectangle.from_bounds(0, 4, 0, 16), DyadicInterval(2, 0))  # time [0, 4)
    comp = np.array([10])
    # dist([0,4), 10) = 7, so 1 + 7/4 lies in [2, 4)
    assert distance_class(p, 0, comp, 64) == 1
    assert distance_class(p, 0, np.array([2]), 64) == 0
    assert distance_class(p, 0, np.array([], dtype=int), 64) == -1


def test_envelope_fit_recovers_decay():
    ds = [0, 1, 2, 3, 4]
    vals = [3.0 * max(d, 1) * 2.0 ** (-2 * d) for d in ds]
    fit = envelope_fit(ds, vals)
    assert fit["M_prime"] == pytest.approx(2.0, abs=0.3)
    assert fit["dominated"]
    assert envelope_fit([1], [0.0])["points"] == 0


def test_trial_seed_is_order_free():
    assert trial_seed(5, 0, 1, 8, 3) == trial_seed(5, 0, 1, 8, 3)
    assert trial_seed(5, 0, 1, 8, 3) != trial_seed(5, 0, 1, 8, 4)


def test_sweep_is_reproducible_and_worker_independent():
    cfg = ExponentConfig()
    a = norm_ratio_sweep([cfg], ["recursive-bisection", "stacked"], 3, 7, (6, 7))
    b = norm_ratio_sweep([cfg], ["recursive-bisection", "stacked"], 3, 7, (6, 7))
    c = norm_ratio_sweep([cfg], ["recursive-bisection", "stacked"], 3, 7, (6, 7), workers=2)
    assert a.rows == b.rows == c.rows
    assert len(a.rows) == 2 * 2 * 3
    assert {g["from_N"] for g in a.growth} == {64}
    assert a.max_ratio(64, r=4.0) == max(r["ratio"] for r in a.rows if r["N"] == 64)


def test_sweep_rejects_out_of_range():
    bad = ExponentConfig(p=1.2, q=3.0)
    with pytest.raises(ValueError):
        norm_ratio_sweep([bad], ["stacked"], 1, 0, (6,))
    rep = norm_ratio_sweep([bad], ["stacked"], 1, 0, (6,), allow_out_of_range=True)
    assert rep.rows[0]["in_range"] is False


def test_single_rectangle_tones_give_unit_ratio():
    N = 64
    x = np.arange(N)
    R = FreqRectangle.from_bounds(2, 4, -8, 0)
    f = np.exp(2j * np.pi * 3 * x / N)
    g = np.exp(2j * np.pi * -5 * x / N)
    nf, ng, nt, ratio = norm_ratio(f, g, [R], ExponentConfig())
    assert nf == pytest.approx(N ** (1 / 3))
    assert nt == pytest.approx(N ** (1 / 1.5))
    assert ratio == pytest.approx(1.0, rel=1e-12)


def test_dilation_homogeneity():
    rng = np.random.default_rng(4)
    c = generate_collection("recursive-bisection", 4, GridConfig(log_size=6))
    a, b = dilation_homogeneity(cplx(rng, 64), cplx(rng, 64), c, ExponentConfig())
    assert b == pytest.approx(a, rel=1e-12)


@pytest.mark.parametrize("r,p,q", [(4.0, 3.0, 3.0), (4.0, 2.0, 3.5), (6.0, 1.5, 5.0), (3.0, 2.0, 2.0)])
def test_interpolation_exponents_solve_strictly(r, p, q):
    sol = interpolation_exponents(r, p, q)
    assert sol.max_residual < 1e-12
    assert sol.strict
    assert max(abs(x) for x in exponent_residuals(r, p, q, sol.theta, sol.t1, sol.p0, sol.q0, sol.p1)) < 1e-12
    json.dumps(sol.to_dict())


def test_interpolation_limit_for_equal_exponents():
    lim = interpolation_limit(4.0, 3.0, 3.0)
    assert lim["theta"] == 0.5 and lim["p0"] == pytest.approx(6.0) and lim["q0"] == pytest.approx(6.0)


@pytest.mark.parametrize("r,p,q", [(2.0, 1.5, 1.5), (4.0, 1.2, 3.0), (4.0, 3.0, 4.0)])
def test_interpolation_rejects_out_of_range(r, p, q):
    with pytest.raises(ValueError):
        interpolation_exponents(r, p, q)


def test_run_config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"grid": {"log_size": 7}, "exponents": {"p": 2.5, "q": 3.5},
                                "rwt": {"density": [0.3, 0.3, 0.9]}}))
    rc = load_config(path)
    assert rc.grid.size == 128 and rc.exponents.p == 2.5 and rc.rwt.density == (0.3, 0.3, 0.9)
    assert RunConfig.from_dict(rc.to_dict()).to_dict() == rc.to_dict()
    with pytest.raises(ValueError):
        RunConfig.from_dict({"bogus": 1})


def test_content_hash_is_canonical():
    assert content_hash({"a": 1, "b": [1.0, 2]}) == content_hash({"b": [1.0, 2], "a": 1})
    assert content_hash({"a": np.float64(0.5)}) == content_hash({"a": 0.5})
    assert content_hash({"a": 1}) != content_hash({"a": 2})


def test_rows_to_csv():
    text = rows_to_csv([{"a": 1, "b": 2.5}, {"a": 3, "b": math.inf}], ["a", "b"])
    assert text.splitlines() == ["a,b", "1,2.5", "3,inf"]
    assert rows_to_csv([]) == "\r\n" or rows_to_csv([]).strip() == ""


def test_write_report_formats(tmp_path):
    rows = [{"x": 1}, {"x": 2}]
    out = tmp_path / "r.json"
    write_report({"rows": rows}, rows, out, "json", config={"k": 1}, inputs={"seed": 3})
    data = json.loads(out.read_text())
    assert data["rows"] == rows and data["meta"]["input_hash"] == content_hash({"seed": 3})
    out = tmp_path / "r.csv"
    write_report({"rows": rows}, rows, out, "csv", inputs={"seed": 3})
    assert out.read_text().splitlines() == ["x", "1", "2"]
    side = json.loads((tmp_path / "r.csv.json").read_text())
    assert side["input_hash"] == content_hash({"seed": 3})
    with pytest.raises(ValueError):
        write_report({}, rows, None, "xml")
