"""Runnable property checks, one per acceptance criterion.

Each check draws its own random instances from a seed and returns a
``CheckResult``. Sizes, trial counts and tolerances are arguments so the
same code serves the quick ``verify`` command and the full acceptance run.
"""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .decomp import (
    _smallest_level,
    check_global,
    decompose,
    generic_estimate,
    global_decompose,
    hypothesis_holds,
    level_series,
    closed_form,
    geometric_constant,
)
from .experiments import (
    SetSpec,
    RWTConfig,
    dilation_homogeneity,
    exponent_residuals,
    interpolation_exponents,
    interpolation_limit,
    norm_ratio_sweep,
    restricted_weak_type_experiment,
)
from .fourier import bilinear_projection, bilinear_projection_bruteforce, dft, idft, sharp_projection
from .grid import GridConfig, Interval, generate_collection
from .maximal import (
    carleson,
    full_breakpoints,
    variational_carleson,
    variational_carleson_exhaustive,
)
from .operators import (
    ExponentConfig,
    linear_rdf,
    square_function,
    trilinear_form,
    trilinear_form_frequency,
)
from .tiles import (
    column_bound_check,
    energy,
    enumerate_super_tiles,
    maximal_column,
    size_f,
    size_h,
    size_h_exhaustive,
)


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        keys = ", ".join(f"{k}={_fmt(v)}" for k, v in self.metrics.items())
        return f"{tag} criterion {self.criterion}: {self.name} [{keys}]"

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "name": self.name,
            "passed": self.passed,
            "metrics": self.metrics,
            "failures": self.failures[:20],
            "seconds": self.seconds,
        }


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _cplx(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.normal(size=size) + 1j * rng.normal(size=size)


def _log2(n: int) -> int:
    return int(n).bit_length() - 1


def _random_interval(rng: random.Random, size: int) -> tuple[int, int]:
    lo = rng.randrange(-size // 2, size // 2)
    hi = rng.randrange(lo + 1, size // 2 + 1)
    return lo, hi


def _random_partition(rng: random.Random, size: int, pieces: int) -> list[Interval]:
    cuts = sorted(rng.sample(range(-size // 2 + 1, size // 2), pieces - 1))
    pts = [-size // 2] + cuts + [size // 2]
    return [Interval(a, b) for a, b in zip(pts, pts[1:])]


def _random_h(rng: np.random.Generator, rects, size: int, sparse: bool = False) -> dict:
    out = {}
    for R in rects:
        v = _cplx(rng, size)
        if sparse:
            v = v * rng.random() ** 3
        out[R] = v
    return out


def _timed(fn: Callable[..., CheckResult]) -> Callable[..., CheckResult]:
    def wrapper(*a, **k):
        t0 = time.perf_counter()
        res = fn(*a, **k)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ---------------------------------------------------------------------------
# 1-3: identities, Plancherel, dominations


@_timed
def check_identities(sizes: Sequence[int] = (64, 256, 1024), trials: int = 100, seed: int = 0,
                     tol: float = 1e-12, form_tol: float = 1e-10, brute_size: int = 32) -> CheckResult:
    """Unitarity, idempotence, bilinear factorisation and the two sides of the form."""
    worst = {"unitarity": 0.0, "inversion": 0.0, "idempotence": 0.0, "factorization": 0.0, "form_sides": 0.0}
    fails = []
    for size in sizes:
        grid = GridConfig(log_size=_log2(size))
        for t in range(trials):
            rng = np.random.default_rng([seed, size, t])
            prng = random.Random(f"{seed}:{size}:{t}")
            f = _cplx(rng, size)
            nf = float(np.linalg.norm(f))
            e1 = abs(float(np.linalg.norm(dft(f).coeffs)) - nf) / nf
            e2 = float(np.abs(idft(dft(f)) - f).max()) / nf
            iv = _random_interval(prng, size)
            p1 = sharp_projection(f, iv)
            e3 = float(np.abs(sharp_projection(p1, iv) - p1).max()) / nf
            c = generate_collection("stacked", seed * 100003 + t, grid)
            g = _cplx(rng, size)
            h = _random_h(rng, c.rects, size)
            a = trilinear_form(f, g, h, c)
            b = trilinear_form_frequency(f, g, h, c)
            e4 = abs(a - b) / max(1.0, abs(b))
            for k, v in (("unitarity", e1), ("inversion", e2), ("idempotence", e3), ("form_sides", e4)):
                worst[k] = max(worst[k], v)
            if max(e1, e2, e3) > tol or e4 > form_tol:
                fails.append({"size": size, "trial": t, "errors": [e1, e2, e3, e4]})
    grid = GridConfig(log_size=_log2(brute_size))
    for t in range(trials):
        rng = np.random.default_rng([seed, brute_size, t, 1])
        c = generate_collection("recursive-bisection", seed * 7919 + t, grid)
        f, g = _cplx(rng, brute_size), _cplx(rng, brute_size)
        scale = float(np.linalg.norm(f) * np.linalg.norm(g))
        for R in c.rects:
            e = float(np.abs(bilinear_projection(f, g, R) - bilinear_projection_bruteforce(f, g, R)).max()) / scale
            worst["factorization"] = max(worst["factorization"], e)
            if e > tol:
                fails.append({"size": brute_size, "trial": t, "rect": R.key, "error": e})
    return CheckResult(1, "exact identities", not fails, worst, fails)


@_timed
def check_plancherel(sizes: Sequence[int] = (64, 256, 1024), trials: int = 100, seed: int = 0,
                     tol: float = 1e-12) -> CheckResult:
    """``||RdF^2 f||_2 <= ||f||_2`` with equality for a partition of all frequencies."""
    worst_excess, worst_gap = 0.0, 0.0
    fails = []
    for size in sizes:
        for t in range(trials):
            rng = np.random.default_rng([seed, size, t, 2])
            prng = random.Random(f"pl:{seed}:{size}:{t}")
            f = _cplx(rng, size)
            nf = float(np.linalg.norm(f))
            parts = _random_partition(prng, size, prng.randint(2, min(40, size)))
            full = float(np.linalg.norm(linear_rdf(f, parts, 2.0)))
            sub = [p for p in parts if prng.random() < 0.5] or parts[:1]
            part = float(np.linalg.norm(linear_rdf(f, sub, 2.0)))
            ex = (part - nf) / nf
            gap = abs(full - nf) / nf
            worst_excess = max(worst_excess, ex)
            worst_gap = max(worst_gap, gap)
            if ex > tol or gap > tol:
                fails.append({"size": size, "trial": t, "excess": ex, "gap": gap})
    return CheckResult(2, "endpoint Plancherel", not fails,
                       {"max_rel_excess": worst_excess, "max_partition_gap": worst_gap}, fails)


@_timed
def check_dominations(size: int = 256, trials: int = 100, seed: int = 0, r: float = 4.0,
                      slack: float = 1e-12) -> CheckResult:
    """Pointwise dominations by the Carleson and variational Carleson operators."""
    grid = GridConfig(log_size=_log2(size))
    bp = full_breakpoints(size)
    ratios = {"proj_vs_2C": 0.0, "Tinf_vs_CC": 0.0, "C_vs_V": 0.0, "disjoint_sum_vs_Vr": 0.0}
    fails = []
    for t in range(trials):
        rng = np.random.default_rng([seed, size, t, 3])
        prng = random.Random(f"dom:{seed}:{t}")
        f, g = _cplx(rng, size), _cplx(rng, size)
        cf, cg = carleson(f), carleson(g)
        vg = variational_carleson(g, r, bp)
        scale = float(np.abs(f).max() + np.abs(g).max()) * math.sqrt(size)
        p = np.abs(sharp_projection(f, _random_interval(prng, size)))
        c = generate_collection("stacked", seed * 31 + t, grid)
        T = square_function(f, g, c, math.inf)
        # stacked collections have pairwise disjoint second sides
        sides = sorted({R.r2 for R in c.rects}, key=lambda s: s.lo)
        ssum = np.sum([np.abs(sharp_projection(g, s)) ** r for s in sides], axis=0)
        checks = {
            "proj_vs_2C": (p, 2 * cf, slack * scale),
            "Tinf_vs_CC": (T, cf * cg, slack * scale ** 2),
            "C_vs_V": (cg, vg, slack * scale),
            "disjoint_sum_vs_Vr": (ssum, vg ** r, slack * scale ** r),
        }
        for k, (lhs, rhs, sl) in checks.items():
            with np.errstate(divide="ignore", invalid="ignore"):
                q = np.where(rhs > 0, lhs / rhs, 0.0)
            ratios[k] = max(ratios[k], float(q.max()))
            if np.any(lhs > rhs + sl):
                fails.append({"trial": t, "check": k, "excess": float((lhs - rhs).max())})
    return CheckResult(3, "pointwise dominations", not fails, ratios, fails)


def tinf_counterexample(size: int = 64) -> float:
    """Largest ``T^inf / (Cf Cg)`` for a two-tone signal built to make the bound sharp."""
    from .fourier import tone
    from .grid import DyadicInterval, FreqRectangle

    f = -tone(size, -5) + 2 * tone(size, 2)
    R = FreqRectangle(DyadicInterval(2, 0), DyadicInterval(2, 0))
    T = square_function(f, f, [R], math.inf)
    return float((T / carleson(f) ** 2).max())


# ---------------------------------------------------------------------------
# 4: oracles


@_timed
def check_oracles(trials: int = 50, seed: int = 0, size_pool: int = 12, energy_pool: int = 14,
                  vc_size: int = 8, vc_trials: int = 50) -> CheckResult:
    """Variational DP vs exhaustive; size top-scan vs exhaustive; greedy energy <= exhaustive."""
    cfg = ExponentConfig()
    fails = []
    vc_diff = 0.0
    for t in range(vc_trials):
        rng = np.random.default_rng([seed, t, 4])
        g = _cplx(rng, vc_size)
        for r in (1.0, 2.0, 3.0, 4.0):
            bp = full_breakpoints(vc_size)
            a = variational_carleson(g, r, bp)
            b = variational_carleson_exhaustive(g, r, bp)
            d = float(np.abs(a - b).max())
            vc_diff = max(vc_diff, d)
            if d != 0.0:
                fails.append({"check": "vc", "trial": t, "r": r, "diff": d})
    grid = GridConfig(log_size=6)
    size = grid.size
    worst_ratio = 1.0
    size_mismatch = 0
    energy_bad = 0
    for t in range(trials):
        rng = np.random.default_rng([seed, t, 5])
        prng = random.Random(f"or:{seed}:{t}")
        c = generate_collection("stacked", seed * 17 + t, grid)
        pool = enumerate_super_tiles(c, size)
        n = prng.randint(-4, 4)
        f = _cplx(rng, size)
        h = {R: rng.normal(size=size) * (rng.random() < 0.7) for R in c.rects}
        sub = prng.sample(pool, min(len(pool), size_pool))
        a, b = size_h(sub, h, n, cfg), size_h_exhaustive(sub, h, n, cfg)
        if a != b:
            size_mismatch += 1
            fails.append({"check": "size_h", "trial": t, "top_scan": a, "exhaustive": b})
        sub = prng.sample(pool, min(len(pool), energy_pool))
        for data in (f, h):
            gr = energy(sub, data, n, cfg).value
            ex = energy(sub, data, n, cfg, "exhaustive").value
            if gr > ex:
                energy_bad += 1
                fails.append({"check": "energy", "trial": t, "greedy": gr, "exhaustive": ex})
            elif ex > 0:
                worst_ratio = min(worst_ratio, gr / ex)
    return CheckResult(4, "oracle equivalences", not fails,
                       {"vc_max_diff": vc_diff, "size_mismatches": size_mismatch,
                        "energy_violations": energy_bad, "min_greedy_over_exhaustive": worst_ratio}, fails)


# ---------------------------------------------------------------------------
# 5-7: decompositions and estimates


def _decomp_instance(seed: int, t: int, grid: GridConfig):
    rng = np.random.default_rng([seed, t, 6])
    prng = random.Random(f"dc:{seed}:{t}")
    size = grid.size
    c = generate_collection("stacked", seed * 13 + t, grid)
    pool = enumerate_super_tiles(c, size)
    n = prng.randint(-5, 5)
    f = _cplx(rng, size) * (rng.random(size) < 0.5)
    g = _cplx(rng, size)
    h = _random_h(rng, c.rects, size, sparse=True)
    return c, pool, n, f, g, h


@_timed
def check_decomposition(trials: int = 50, seed: int = 0, log_size: int = 8, levels: int = 4,
                        raw_energy: bool = True) -> CheckResult:
    """Postconditions of one-step decompositions at every admissible level.

    With ``raw_energy`` the size bound is compared with the greedy energy
    itself (``1/2 2^-n E`` and ``gamma^(-n-1) E``); otherwise with the
    power-of-two snapped energy the thresholds are built from.
    """
    cfg = ExponentConfig()
    grid = GridConfig(log_size=log_size)
    counts = {"runs": 0, "partition": 0, "disjoint": 0, "size_snapped": 0, "size_raw": 0, "top_measure": 0}
    fails = []
    for t in range(trials):
        _, pool, n, f, _, h = _decomp_instance(seed, t, grid)
        for kind, data in (("f", f), ("h", h)):
            E = energy(pool, data, n, cfg).value
            sz = size_h(pool, data, n, cfg) if kind == "h" else None
            if E <= 0:
                continue
            sz = sz if sz is not None else size_f(pool, data, cfg)
            first = _smallest_level(kind, sz, E, cfg) if sz > 0 else 0
            for lvl in range(first, first + levels):
                if not hypothesis_holds(kind, sz, E, lvl, cfg):
                    continue
                res = decompose(pool, data, lvl, cfg, shift=n, check=False)
                counts["runs"] += 1
                raw = 0.5 * 2.0 ** (-lvl) * E if kind == "f" else cfg.gamma ** (-lvl - 1) * E
                ok = {
                    "partition": res.checks["partition"],
                    "disjoint": res.checks["mutually_disjoint"] and res.high.disjointness_violation() is None,
                    "size_snapped": res.size_low < res.threshold,
                    "size_raw": res.size_low <= raw,
                    "top_measure": res.top_measure <= 2.0 ** (cfg.r0 * (lvl + 1)),
                }
                for k, v in ok.items():
                    if not v:
                        counts[k] += 1
                bad = [k for k, v in ok.items() if not v and (raw_energy or k != "size_raw")]
                if bad:
                    fails.append({"trial": t, "kind": kind, "level": lvl, "failed": bad,
                                  "size_low": res.size_low, "raw_bound": raw, "threshold": res.threshold})
    metrics = {"runs": counts["runs"]} | {f"violations_{k}": v for k, v in counts.items() if k != "runs"}
    name = "decomposition postconditions" + (" (raw greedy energy)" if raw_energy else " (snapped energy)")
    return CheckResult(5, name, not fails and counts["runs"] > 0, metrics, fails)


@_timed
def check_column_chain(trials: int = 50, seed: int = 0, log_size: int = 8) -> CheckResult:
    cfg = ExponentConfig()
    grid = GridConfig(log_size=log_size)
    size = grid.size
    fails = []
    worst, cmax = 0.0, 0.0
    for t in range(trials):
        rng = np.random.default_rng([seed, t, 7])
        prng = random.Random(f"col:{seed}:{t}")
        c = generate_collection("stacked", seed * 19 + t, grid)
        n = prng.randint(-5, 5)
        pool = enumerate_super_tiles(c, size)
        top = prng.choice(pool)
        col = maximal_column(top, pool, n)
        f, g = _cplx(rng, size), _cplx(rng, size)
        h = _random_h(rng, c.rects, size)
        rep = column_bound_check(col, f, g, h, cfg)
        worst = max(worst, rep.lhs / rep.rhs if rep.rhs > 0 else 0.0)
        cmax = max(cmax, rep.constant_c)
        if not (rep.step_a_ok and rep.step_b_ok and rep.step_c_ok and rep.holds):
            fails.append({"trial": t, "a": rep.step_a_ok, "b": rep.step_b_ok, "c": rep.step_c_ok, "full": rep.holds})
    return CheckResult(6, "column estimate chain", not fails,
                       {"max_lhs_over_rhs": worst, "max_column_constant": cmax}, fails)


@_timed
def check_generic_estimate(trials: int = 20, seed: int = 0, log_size: int = 8,
                           thetas: Sequence[float] = (0.0, 0.5, 1.0), synthetic: int = 2000) -> CheckResult:
    cfg = ExponentConfig()
    grid = GridConfig(log_size=log_size)
    fails = []
    worst = 0.0
    for t in range(trials):
        _, pool, n, f, g, h = _decomp_instance(seed, 1000 + t, grid)
        rep = global_decompose(pool, f, h, n, cfg)
        for th in thetas:
            ge = generic_estimate(rep, f, g, h, cfg, th)
            if ge.rhs > 0:
                worst = max(worst, ge.lhs / (ge.constant * ge.rhs))
            if not ge.holds:
                fails.append({"trial": t, "theta1": th, "lhs": ge.lhs, "C_rhs": ge.constant * ge.rhs})
    # synthetic case analysis: level series vs closed form
    rng = np.random.default_rng([seed, 8])
    cg = geometric_constant(cfg)
    syn_worst = 0.0
    for _ in range(synthetic):
        ef, eh = 2.0 ** rng.uniform(-10, 10), 2.0 ** rng.uniform(-10, 10)
        sf, sh = ef * 2.0 ** -rng.uniform(0, 20), eh * 2.0 ** -rng.uniform(0, 20)
        lhs = level_series(sf, ef, sh, eh, cfg, range(-200, 200))
        for th in thetas:
            rhs = closed_form(sf, ef, sh, eh, cfg, th)
            syn_worst = max(syn_worst, lhs / rhs)
            if lhs > cg * rhs * (1 + 1e-12):
                fails.append({"synthetic": True, "theta1": th, "ratio": lhs / rhs})
    return CheckResult(7, "generic estimate", not fails,
                       {"max_lhs_over_C_rhs": worst, "synthetic_max_ratio": syn_worst,
                        "synthetic_constant": cg}, fails)


@_timed
def check_global_properties(trials: int = 50, seed: int = 0, log_size: int = 8,
                            order_exponent: Optional[float] = None) -> CheckResult:
    """Properties (i)-(iv) of the global decomposition (not an acceptance criterion)."""
    cfg = ExponentConfig()
    grid = GridConfig(log_size=log_size)
    counts = {"partition": 0, "size_f": 0, "size_h": 0, "disjoint": 0, "top_measure": 0, "termination": 0}
    fails = []
    for t in range(trials):
        _, pool, n, f, _, h = _decomp_instance(seed, t, grid)
        rep = global_decompose(pool, f, h, n, cfg, order_exponent=order_exponent)
        chk = check_global(rep, f, h, cfg)
        for k in counts:
            if not chk[k]:
                counts[k] += 1
        bad = [k for k in counts if not chk[k]]
        if bad:
            fails.append({"trial": t, "failed": bad})
    return CheckResult(0, "global decomposition properties", not fails, counts, fails)


# ---------------------------------------------------------------------------
# 8-10: experiments


@_timed
def check_restricted_weak_type(trials: int = 20, seed: int = 0, log_sizes: Sequence[int] = (8, 9),
                               p: float = 3.5, factor: float = 2.0) -> CheckResult:
    cfg = ExponentConfig(r=4.0, r0=3.0, p=p, q=4.0)
    fails = []
    maxima = {}
    for L in log_sizes:
        grid = GridConfig(log_size=L)
        best = 0.0
        for t in range(trials):
            rng = np.random.default_rng([seed, L, t, 9])
            spec = SetSpec.random(grid.size, rng)
            c = generate_collection("stacked", seed * 23 + t, grid)
            rep = restricted_weak_type_experiment(spec, c, cfg, RWTConfig(), seed=seed * 1000 + t,
                                                  tile_analysis=False)
            if not rep.major_subset or not rep.h_envelope_ok:
                fails.append({"N": grid.size, "trial": t, "major": rep.major_subset, "h_ok": rep.h_envelope_ok})
            if not math.isfinite(rep.ratio):
                fails.append({"N": grid.size, "trial": t, "ratio": rep.ratio})
            best = max(best, rep.ratio)
        maxima[grid.size] = best
    sizes = sorted(maxima)
    growth = maxima[sizes[-1]] / maxima[sizes[0]] if maxima[sizes[0]] > 0 else math.inf
    if not growth <= factor:
        fails.append({"growth": growth})
    metrics = {f"max_ratio_N{k}": v for k, v in maxima.items()} | {"growth": growth}
    return CheckResult(8, "restricted weak type", not fails, metrics, fails)


@_timed
def check_sweep(trials: int = 50, seed: int = 0, log_sizes: Sequence[int] = (8, 10), factor: float = 2.0,
                homogeneity_trials: int = 20, tol: float = 1e-9, mode: str = "recursive-bisection") -> CheckResult:
    cfg = ExponentConfig(r=4.0, p=3.0, q=3.0, s=1.5)
    rep = norm_ratio_sweep([cfg], [mode], trials, seed, log_sizes)
    g = rep.growth[0]["factor"] if rep.growth else math.nan
    fails = []
    if not g <= factor:
        fails.append({"growth": g})
    worst = 0.0
    grid = GridConfig(log_size=log_sizes[0])
    for t in range(homogeneity_trials):
        rng = np.random.default_rng([seed, t, 10])
        c = generate_collection(mode, seed * 29 + t, grid)
        a, b = dilation_homogeneity(_cplx(rng, grid.size), _cplx(rng, grid.size), c, cfg)
        d = abs(a - b) / a if a > 0 else abs(b)
        worst = max(worst, d)
        if d > tol:
            fails.append({"trial": t, "ratio": a, "dilated": b})
    metrics = {c_["N"]: c_["max"] for c_ in rep.cells}
    metrics = {f"max_ratio_N{k}": v for k, v in metrics.items()} | {"growth": g, "homogeneity_rel_err": worst}
    return CheckResult(9, "boundedness stability sweep", not fails, metrics, fails)


@_timed
def check_exponents(trials: int = 100, seed: int = 0, tol: float = 1e-12) -> CheckResult:
    prng = random.Random(f"exp:{seed}")
    fails = []
    worst = 0.0
    done = 0
    while done < trials:
        r = prng.uniform(2.05, 12.0)
        rp = r / (r - 1.0)
        p, q = prng.uniform(rp, r), prng.uniform(rp, r)
        if not (rp < p < r and rp < q < r):
            continue
        sol = interpolation_exponents(r, p, q)
        res = exponent_residuals(r, p, q, sol.theta, sol.t1, sol.p0, sol.q0, sol.p1)
        worst = max(worst, max(abs(x) for x in res))
        if max(abs(x) for x in res) >= tol or not sol.strict:
            fails.append({"r": r, "p": p, "q": q, "residuals": list(res), "margins": sol.margins})
        done += 1
    lim = interpolation_limit(4, 3, 3)
    exact = lim["theta"] == 0.5 and lim["p0"] == 6.0
    if not exact:
        fails.append({"limit": lim})
    return CheckResult(10, "exponent solver", not fails,
                       {"max_residual": worst, "limit_theta": lim["theta"], "limit_p0": lim["p0"]}, fails)


QUICK = {
    "identities": lambda s: check_identities((64, 256), 10, s),
    "plancherel": lambda s: check_plancherel((64, 256), 10, s),
    "dominations": lambda s: check_dominations(128, 10, s),
    "oracles": lambda s: check_oracles(8, s, vc_trials=8),
    "decomposition": lambda s: check_decomposition(8, s, raw_energy=False),
    "column-chain": lambda s: check_column_chain(8, s),
    "generic-estimate": lambda s: check_generic_estimate(3, s, synthetic=200),
    "restricted-weak-type": lambda s: check_restricted_weak_type(3, s, (7, 8)),
    "sweep": lambda s: check_sweep(10, s, (7, 9), homogeneity_trials=5),
    "exponents": lambda s: check_exponents(50, s),
}


def run_quick(names: Optional[Sequence[str]] = None, seed: int = 0) -> list[CheckResult]:
    names = list(names or QUICK)
    unknown = [n for n in names if n not in QUICK]
    if unknown:
        raise ValueError(f"unknown checks: {unknown}")
    return [QUICK[n](seed) for n in names]
