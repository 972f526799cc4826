"""Restricted weak type experiments, norm sweeps and the interpolation exponent solver.

Everything here lives on ``Z_N``, so every family of shifts is finite: a
dyadic interval of width ``w`` has exactly ``N/w`` distinct translates.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .fourier import BumpProfile, as_signal, periodic_distance
from .grid import GridConfig, RectangleCollection, generate_collection
from .maximal import carleson, default_breakpoints, log_plus, norm_lp, variational_carleson
from .operators import (
    ExponentConfig,
    dilate_rectangle,
    dual_optimal_h,
    spectral_dilation,
    square_function,
    trilinear_form,
)
from .tiles import (
    DEFAULT_DECAY,
    _as_pool,
    enumerate_super_tiles,
    shifted_form,
    size_f,
    size_h,
)

LOGGER = logging.getLogger(__name__)

F_POWER_FACTOR = 100


# ---------------------------------------------------------------------------
# sets and configuration


@dataclass
class SetSpec:
    """Indicator vectors of three finite sets on ``Z_N``."""

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray

    def __post_init__(self) -> None:
        arrs = []
        for name in ("F", "G", "H"):
            a = np.asarray(getattr(self, name))
            if a.ndim != 1 or not np.isin(a, (0, 1)).all():
                raise ValueError(f"{name} must be a 0/1 vector")
            arrs.append(a.astype(np.int8))
        if len({a.shape[0] for a in arrs}) != 1:
            raise ValueError("sets must live on the same Z_N")
        self.F, self.G, self.H = arrs

    @property
    def size(self) -> int:
        return int(self.F.shape[0])

    @property
    def measures(self) -> tuple[int, int, int]:
        return int(self.F.sum()), int(self.G.sum()), int(self.H.sum())

    @classmethod
    def full(cls, size: int) -> "SetSpec":
        one = np.ones(size, dtype=np.int8)
        return cls(one, one.copy(), one.copy())

    @classmethod
    def random(cls, size: int, rng: np.random.Generator, density: Sequence[float] = (0.5, 0.5, 0.5)) -> "SetSpec":
        sets = []
        for d in density:
            a = (rng.random(size) < d).astype(np.int8)
            if not a.any():
                a[rng.integers(size)] = 1
            sets.append(a)
        return cls(*sets)

    def to_dict(self) -> dict:
        return {k: np.nonzero(getattr(self, k))[0].tolist() for k in ("F", "G", "H")} | {"size": self.size}

    @classmethod
    def from_dict(cls, d: dict) -> "SetSpec":
        size = int(d["size"])
        out = []
        for k in ("F", "G", "H"):
            a = np.zeros(size, dtype=np.int8)
            a[np.asarray(d[k], dtype=np.int64)] = 1
            out.append(a)
        return cls(*out)


@dataclass(frozen=True)
class RWTConfig:
    c_f: float = 1.0
    c_g: float = 1.0
    decay: int = DEFAULT_DECAY
    max_doublings: int = 2000
    n_shift: int = 0
    random_moduli: bool = False
    density: tuple = (0.5, 0.5, 0.5)

    def __post_init__(self) -> None:
        if not (self.c_f > 0 and self.c_g > 0):
            raise ValueError("constants must be positive")
        if self.max_doublings < 0:
            raise ValueError("max_doublings must be >= 0")

    def to_dict(self) -> dict:
        return {
            "c_f": self.c_f,
            "c_g": self.c_g,
            "decay": self.decay,
            "max_doublings": self.max_doublings,
            "n_shift": self.n_shift,
            "random_moduli": self.random_moduli,
            "density": list(self.density),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RWTConfig":
        d = dict(d)
        if "density" in d:
            d["density"] = tuple(d["density"])
        return cls(**d)


# ---------------------------------------------------------------------------
# exceptional set


def _bracket_sq(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    return 1.0 + m * m


def _min_weight_per_residue(count: int, weight, span: int) -> np.ndarray:
    """For each residue ``j`` mod ``count``, the least weight over shifts ``s = j (mod count)``.

    ``weight`` grows at least quadratically, so shifts beyond ``span`` never win.
    """
    s = np.arange(-span - count, span + count + 1)
    w = weight(s)
    out = np.full(count, np.inf)
    np.minimum.at(out, s % count, w)
    return out


def _log_block_means(logu: np.ndarray, width: int) -> np.ndarray:
    blocks = logu.reshape(-1, width)
    with np.errstate(divide="ignore"):
        return np.logaddexp.reduce(blocks, axis=1) - math.log(width)


def shifted_level_score(logu: np.ndarray, weight) -> np.ndarray:
    """Per point, ``max over dyadic I containing x and shifts s of log(mean_{I^s} u / weight(s))``.

    ``u`` is given by its logarithm so that large powers do not overflow.
    Every dyadic scale and every distinct periodic shift is visited. The
    point lies in ``{M^s u > lambda weight(s) for some s}`` exactly when its
    score exceeds ``log lambda``.
    """
    size = logu.shape[0]
    out = np.full(size, -np.inf)
    width = 1
    while width <= size:
        count = size // width
        lb = _log_block_means(logu, width)
        with np.errstate(divide="ignore"):
            lw = np.log(_min_weight_per_residue(count, weight, size))
        best = np.full(count, -np.inf)
        for s in range(count):
            # block i sees block i+s
            np.maximum(best, np.roll(lb, -s) - lw[s], out=best)
        np.maximum(out, np.repeat(best, width), out=out)
        width *= 2
    return out


def shifted_level_union(logu: np.ndarray, weight, log_scale: float) -> np.ndarray:
    """``{x : M^s u(x) > exp(log_scale) * weight(s) for some shift s}``."""
    return shifted_level_score(logu, weight) > log_scale


def _safe_log(a: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(a))


@dataclass
class ExceptionalSet:
    E: np.ndarray
    H_prime: np.ndarray
    E_f: np.ndarray
    E_g: np.ndarray
    c_f: float
    c_g: float
    doublings: int

    @property
    def measure(self) -> int:
        return int(self.E.sum())

    def to_dict(self) -> dict:
        return {
            "E": np.nonzero(self.E)[0].tolist(),
            "H_prime": np.nonzero(self.H_prime)[0].tolist(),
            "measure_E": self.measure,
            "measure_E_f": int(self.E_f.sum()),
            "measure_E_g": int(self.E_g.sum()),
            "measure_H_prime": int(self.H_prime.sum()),
            "c_f": self.c_f,
            "c_g": self.c_g,
            "doublings": self.doublings,
        }


def exceptional_set(f, g, spec: SetSpec, n_shift: int, cfg: ExponentConfig,
                    rwt: Optional[RWTConfig] = None, carleson_f: Optional[np.ndarray] = None,
                    variation_g: Optional[np.ndarray] = None) -> ExceptionalSet:
    """Union of the two shifted-maximal level-set families, with constants doubled as needed.

    The f family uses ``(Cf)^(100 r0)`` with shift ``s`` weighted by
    ``log+(s) <s + n>^2 |F|/|H|``; the g family uses ``(V^r g)^r`` with
    weight ``log+(s) <s>^2 |G|/|H|``. Both constants are doubled until
    ``|E| < |H|/2``, which makes ``H' = H \\ E`` a major subset.
    """
    rwt = rwt or RWTConfig()
    f = as_signal(f, spec.size)
    g = as_signal(g, spec.size)
    nF, nG, nH = spec.measures
    if nH == 0:
        raise ValueError("H must be nonempty")
    size = spec.size
    cf = carleson(f) if carleson_f is None else carleson_f
    vg = variational_carleson(g, cfg.r, default_breakpoints(size)) if variation_g is None else variation_g
    logu_f = F_POWER_FACTOR * cfg.r0 * _safe_log(cf)
    logu_g = cfg.r * _safe_log(vg)
    n = int(n_shift)

    def weight_f(s):
        return log_plus(s) * _bracket_sq(s + n)

    def weight_g(s):
        return log_plus(s) * _bracket_sq(s)

    score_f = shifted_level_score(logu_f, weight_f)
    score_g = shifted_level_score(logu_g, weight_g)
    c_f, c_g = float(rwt.c_f), float(rwt.c_g)
    for k in range(rwt.max_doublings + 1):
        lf = math.log(c_f) + (math.log(nF) if nF else -math.inf) - math.log(nH)
        lg = math.log(c_g) + (math.log(nG) if nG else -math.inf) - math.log(nH)
        Ef = score_f > lf
        Eg = score_g > lg
        E = Ef | Eg
        if 2 * int(E.sum()) < nH:
            Hp = (spec.H.astype(bool) & ~E)
            LOGGER.debug("exceptional set |E|=%d |H|=%d after %d doublings", E.sum(), nH, k)
            return ExceptionalSet(E, Hp, Ef, Eg, c_f, c_g, k)
        c_f *= 2.0
        c_g *= 2.0
    raise RuntimeError("exceptional set did not shrink within the doubling budget")


# ---------------------------------------------------------------------------
# restricted weak type


def rwt_window(cfg: ExponentConfig) -> tuple[float, float]:
    """Admissible range of ``1/p``: ``[(1/100)/r0 + (99/100)/r, 1/r0]``."""
    lo = (1.0 / F_POWER_FACTOR) / cfg.r0 + (1.0 - 1.0 / F_POWER_FACTOR) / cfg.r
    return lo, 1.0 / cfg.r0


def in_rwt_window(cfg: ExponentConfig, p: Optional[float] = None) -> bool:
    lo, hi = rwt_window(cfg)
    ip = 1.0 / (cfg.p if p is None else p)
    return lo <= ip <= hi


def random_restricted(mask: np.ndarray, rng: np.random.Generator, moduli: bool = False) -> np.ndarray:
    """``1_A`` times uniform phases (and uniform moduli when asked)."""
    mask = np.asarray(mask, dtype=np.float64)
    ph = np.exp(2j * np.pi * rng.random(mask.shape[0]))
    if moduli:
        ph = ph * rng.random(mask.shape[0])
    return mask * ph


def _distance_to_set(size: int, lo: int, hi: int, points: np.ndarray) -> float:
    if points.size == 0:
        return math.inf
    d = periodic_distance(size, (lo, hi))
    return float(d[points].min())


def distance_class(p, n: int, complement: np.ndarray, size: int) -> int:
    """``d`` with ``2^d <= 1 + dist(I_P^n, E^c)/|I_P| < 2^(d+1)``."""
    iv = p.shifted(n)
    dist = _distance_to_set(size, int(iv.lo), int(iv.hi), complement)
    if math.isinf(dist):
        return -1
    return int(math.floor(math.log2(1.0 + dist / p.length)))


def envelope_fit(ds: Sequence[int], values: Sequence[float]) -> dict:
    """Fit ``C max(d,1) 2^(-d M')`` by least squares in log scale, then lift ``C`` to dominate."""
    pts = [(int(d), float(v)) for d, v in zip(ds, values) if v > 0]
    if not pts:
        return {"C": 0.0, "M_prime": math.nan, "dominated": True, "points": 0}
    d = np.array([p[0] for p in pts], dtype=np.float64)
    y = np.log2(np.array([p[1] for p in pts]) / np.maximum(d, 1.0))
    if len(np.unique(d)) >= 2:
        slope, _ = np.polyfit(d, y, 1)
        mp = float(-slope)
    else:
        mp = 0.0
    env = np.maximum(d, 1.0) * 2.0 ** (-d * mp)
    C = float(max(v / e for (_, v), e in zip(pts, env)))
    dominated = all(v <= C * e * (1 + 1e-12) for (_, v), e in zip(pts, env))
    return {"C": C, "M_prime": mp, "dominated": dominated, "points": len(pts)}


@dataclass
class RWTReport:
    seed: int
    size: int
    p: float
    r: float
    r0: float
    s: float
    measures: tuple
    measure_E: int
    measure_H_prime: int
    major_subset: bool
    form: float
    denominator: float
    ratio: float
    h_envelope_max: float
    h_envelope_ok: bool
    small: dict
    distance_classes: dict
    envelope: dict
    exceptional: dict
    dropped_low_eccentricity: int

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["measures"] = list(self.measures)
        d["distance_classes"] = {str(k): v for k, v in self.distance_classes.items()}
        return d

    def row(self) -> dict:
        return {
            "seed": self.seed,
            "N": self.size,
            "p": self.p,
            "r": self.r,
            "r0": self.r0,
            "s": self.s,
            "F": self.measures[0],
            "G": self.measures[1],
            "H": self.measures[2],
            "E": self.measure_E,
            "H_prime": self.measure_H_prime,
            "form": self.form,
            "ratio": self.ratio,
        }


def restricted_weak_type_experiment(spec: SetSpec, c, cfg: ExponentConfig, rwt: Optional[RWTConfig] = None,
                                    seed: int = 0, profile: Optional[BumpProfile] = None,
                                    tile_analysis: bool = True) -> RWTReport:
    """One draw of the restricted weak type test on the high-eccentricity part of ``c``.

    ``q`` is tied to ``r`` here; ``1/s = 1/p + 1/r`` and the form is compared
    with ``|F|^(1/p) |G|^(1/r) |H|^(1/s')``.
    """
    rwt = rwt or RWTConfig()
    profile = profile or BumpProfile()
    lo, hi = rwt_window(cfg)
    if not lo <= 1.0 / cfg.p <= hi:
        raise ValueError(f"1/p={1.0 / cfg.p:.6g} outside the window [{lo:.6g}, {hi:.6g}]")
    size = spec.size
    rects = c.rects if isinstance(c, RectangleCollection) else tuple(c)
    high = sorted((R for R in rects if R.r2.length >= R.r1.length), key=lambda R: R.key)
    dropped = len(rects) - len(high)
    rng = np.random.default_rng(seed)
    f = random_restricted(spec.F, rng, rwt.random_moduli)
    g = random_restricted(spec.G, rng, rwt.random_moduli)
    nF, nG, nH = spec.measures
    r = cfg.r
    s = 1.0 / (1.0 / cfg.p + 1.0 / r)
    inv_s_dual = 1.0 - 1.0 / s
    vg = variational_carleson(g, r, default_breakpoints(size))
    exc = exceptional_set(f, g, spec, rwt.n_shift, cfg, rwt, variation_g=vg)
    major = 2 * int(exc.H_prime.sum()) > nH
    if high:
        h = dual_optimal_h(f, g, high, r, support=exc.H_prime)
        rp = cfg.r_prime
        env = np.sum([np.abs(v) ** rp for v in h.values()], axis=0) ** (1.0 / rp)
        env_max = float(np.max(env - exc.H_prime))
        lam = abs(trilinear_form(f, g, h, high))
    else:
        h, env_max, lam = {}, 0.0, 0.0
    denom = nF ** (1.0 / cfg.p) * nG ** (1.0 / r) * nH ** inv_s_dual
    ratio = lam / denom if denom > 0 else (0.0 if lam == 0 else math.inf)
    small: dict = {}
    classes: dict = {}
    envelope = {"C": 0.0, "M_prime": math.nan, "dominated": True, "points": 0}
    if tile_analysis and high and lam > 0:
        small, classes, envelope = _tile_analysis(f, g, h, high, spec, exc, vg, cfg, rwt, profile)
    return RWTReport(
        seed, size, cfg.p, r, cfg.r0, s, spec.measures, exc.measure, int(exc.H_prime.sum()), major,
        lam, denom, ratio, env_max, env_max <= 1e-12, small, classes, envelope, exc.to_dict(), dropped,
    )


def _tile_analysis(f, g, h, rects, spec: SetSpec, exc: ExceptionalSet, vg: np.ndarray, cfg: ExponentConfig,
                   rwt: RWTConfig, profile: BumpProfile) -> tuple[dict, dict, dict]:
    size = spec.size
    n = rwt.n_shift
    nF, nG, nH = spec.measures
    pool = _as_pool(enumerate_super_tiles(rects, size))
    E = exc.E
    comp = np.nonzero(~E)[0]
    small_pool, by_d = [], {}
    for p in pool:
        iv = p.shifted(n)
        if not E[int(iv.lo):int(iv.hi)].all():
            small_pool.append(p)
        else:
            by_d.setdefault(distance_class(p, n, comp, size), []).append(p)
    vr = vg ** cfg.r
    g_avg = max((float(vr[int(p.shifted(n).lo):int(p.shifted(n).hi)].sum()) / p.length for p in small_pool),
                default=0.0)
    sf = size_f(small_pool, f, cfg)
    sh = size_h(pool, h, n, cfg, rwt.decay)
    f_ref = float(log_plus(n)) * (nF / nH) ** (1.0 / (F_POWER_FACTOR * cfg.r0))
    small = {
        "tiles": len(small_pool),
        "size_f": sf,
        "size_f_reference": f_ref,
        "size_f_ratio": sf / f_ref if f_ref > 0 else math.inf,
        "g_average": g_avg,
        "g_reference": nG / nH,
        "g_ratio": g_avg / (nG / nH) if nG else 0.0,
        "size_h_all": sh,
        "form": shifted_form(small_pool, f, g, h, n, cfg, profile),
    }
    classes = {}
    for d in sorted(by_d):
        tiles = by_d[d]
        classes[d] = {
            "tiles": len(tiles),
            "size_h": size_h(tiles, h, n, cfg, rwt.decay),
            "form": shifted_form(tiles, f, g, h, n, cfg, profile),
        }
    ds = [d for d in classes if d >= 0]
    envelope = envelope_fit(ds, [classes[d]["form"] for d in ds])
    return small, classes, envelope


# ---------------------------------------------------------------------------
# norm-ratio sweep


SWEEP_COLUMNS = ("seed", "N", "collection", "r", "p", "q", "s", "norm_f", "norm_g", "norm_T", "ratio", "in_range")


def trial_seed(seed: int, *path: int) -> int:
    """Deterministic child seed for one trial, independent of execution order."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(x) for x in path))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def norm_ratio(f, g, c, cfg: ExponentConfig) -> tuple[float, float, float, float]:
    """``(||f||_p, ||g||_q, ||T^r(f,g)||_s, ratio)`` with counting measure."""
    nf = norm_lp(f, cfg.p)
    ng = norm_lp(g, cfg.q)
    T = square_function(f, g, c, cfg.r)
    nt = float(np.sum(T ** cfg.s) ** (1.0 / cfg.s))
    den = nf * ng
    return nf, ng, nt, (nt / den if den > 0 else 0.0)


def _random_signal(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.normal(size=size) + 1j * rng.normal(size=size)


def _sweep_trial(args) -> dict:
    cfg_d, mode, params, log_size, child = args
    cfg = ExponentConfig(**cfg_d)
    grid = GridConfig(log_size=log_size)
    c = generate_collection(mode, child, grid, params)
    rng = np.random.default_rng(child)
    f = _random_signal(rng, grid.size)
    g = _random_signal(rng, grid.size)
    nf, ng, nt, ratio = norm_ratio(f, g, c, cfg)
    return {
        "seed": child,
        "N": grid.size,
        "collection": c.label,
        "r": cfg.r,
        "p": cfg.p,
        "q": cfg.q,
        "s": cfg.s,
        "norm_f": nf,
        "norm_g": ng,
        "norm_T": nt,
        "ratio": ratio,
        "in_range": cfg.in_range(),
    }


@dataclass
class SweepReport:
    rows: list
    cells: list = field(default_factory=list)
    growth: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"rows": self.rows, "cells": self.cells, "growth": self.growth}

    def max_ratio(self, N: int, **match) -> float:
        vals = [r["ratio"] for r in self.rows if r["N"] == N and all(r.get(k) == v for k, v in match.items())]
        return max(vals) if vals else math.nan


def _cfg_kwargs(cfg: ExponentConfig) -> dict:
    return {"r": cfg.r, "r0": cfg.r0, "p": cfg.p, "q": cfg.q, "s": cfg.s, "theta1": cfg.theta1}


def norm_ratio_sweep(configs: Sequence[ExponentConfig], modes: Sequence, trials: int, seed: int,
                     log_sizes: Sequence[int], workers: int = 1, allow_out_of_range: bool = False) -> SweepReport:
    """Empirical ``||T^r(f,g)||_s / (||f||_p ||g||_q)`` over random collections and signals.

    ``modes`` holds mode names or ``(mode, params)`` pairs. Each trial's seed
    is derived from ``(seed, config index, mode index, log N, trial)``, so
    rows do not depend on ``workers``.
    """
    jobs = []
    for ci, cfg in enumerate(configs):
        if not cfg.in_range() and not allow_out_of_range:
            raise ValueError(f"exponents out of range: {cfg.to_dict()}")
        for mi, m in enumerate(modes):
            mode, params = (m, None) if isinstance(m, str) else (m[0], m[1])
            for L in log_sizes:
                for t in range(trials):
                    jobs.append((_cfg_kwargs(cfg), mode, params, int(L), trial_seed(seed, ci, mi, L, t)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [_sweep_trial(j) for j in jobs]
    return _aggregate(rows, configs, modes, log_sizes)


def _aggregate(rows: list, configs, modes, log_sizes) -> SweepReport:
    cells = []
    growth = []
    for cfg in configs:
        for m in modes:
            mode = m if isinstance(m, str) else m[0]
            prev = None
            for L in sorted(log_sizes):
                N = 1 << L
                vals = [r["ratio"] for r in rows
                        if r["N"] == N and r["collection"].startswith(mode + ":")
                        and (r["r"], r["p"], r["q"], r["s"]) == (cfg.r, cfg.p, cfg.q, cfg.s)]
                if not vals:
                    continue
                cell = {"mode": mode, "N": N, "r": cfg.r, "p": cfg.p, "q": cfg.q, "s": cfg.s,
                        "max": max(vals), "median": float(np.median(vals)), "trials": len(vals)}
                cells.append(cell)
                if prev is not None:
                    growth.append({"mode": mode, "r": cfg.r, "p": cfg.p, "q": cfg.q, "s": cfg.s,
                                   "from_N": prev["N"], "to_N": N,
                                   "factor": cell["max"] / prev["max"] if prev["max"] > 0 else math.nan})
                prev = cell
    return SweepReport(rows, cells, growth)


def dilation_homogeneity(f, g, c, cfg: ExponentConfig) -> tuple[float, float]:
    """Norm ratio before and after one spectral dilation of signals and rectangles."""
    rects = c.rects if isinstance(c, RectangleCollection) else tuple(c)
    a = norm_ratio(f, g, rects, cfg)[3]
    b = norm_ratio(spectral_dilation(f), spectral_dilation(g), [dilate_rectangle(R) for R in rects], cfg)[3]
    return a, b


# ---------------------------------------------------------------------------
# interpolation exponents


def constraint_bounds(t1: float) -> tuple[float, float]:
    """Admissible ``1/p1`` range for a given ``t1`` in ``(1, 2)``."""
    lo = (t1 - 1.0) / (50.0 * (3.0 * t1 - 2.0)) + 0.99 * (t1 - 1.0) / t1
    hi = (2.0 * t1 - 2.0) / (3.0 * t1 - 2.0)
    return lo, hi


@dataclass
class ExponentSolution:
    r: float
    p: float
    q: float
    theta: float
    t1: float
    p0: float
    q0: float
    p1: float
    residuals: tuple
    margins: dict

    @property
    def max_residual(self) -> float:
        return max(abs(x) for x in self.residuals)

    @property
    def strict(self) -> bool:
        return all(v > 0 for v in self.margins.values())

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["residuals"] = list(self.residuals)
        d["max_residual"] = self.max_residual
        d["strict"] = self.strict
        return d


def exponent_residuals(r: float, p: float, q: float, theta: float, t1: float, p0: float, q0: float,
                       p1: float) -> tuple[float, float, float]:
    rp = r / (r - 1.0)
    t1p = t1 / (t1 - 1.0)
    return (
        (1 - theta) / p0 + theta / p1 - 1.0 / p,
        (1 - theta) / q0 + theta / t1p - 1.0 / q,
        (1 - theta) + theta / t1 - 1.0 / rp,
    )


def _margins(theta, t1, p0, q0, p1) -> dict:
    lo, hi = constraint_bounds(t1)
    return {
        "t1_low": t1 - 1.0,
        "t1_high": 2.0 - t1,
        "p1_low": 1.0 / p1 - lo,
        "p1_high": hi - 1.0 / p1,
        "theta_low": theta,
        "theta_high": 1.0 - theta,
        "p0_low": 1.0 - 1.0 / p0,
        "p0_high": 1.0 / p0,
        "q0_low": 1.0 - 1.0 / q0,
        "q0_high": 1.0 / q0,
    }


def interpolation_limit(r, p, q) -> dict:
    """Values at ``t1 = p1 = 2``, computed in exact rational arithmetic."""
    R, P, Q = Fraction(r), Fraction(p), Fraction(q)
    theta = 2 / R
    ip0 = (1 / P - 1 / R) / (1 - theta)
    iq0 = (1 / Q - 1 / R) / (1 - theta)
    return {
        "theta": float(theta),
        "t1": 2.0,
        "p1": 2.0,
        "p0": float(1 / ip0) if ip0 else math.inf,
        "q0": float(1 / iq0) if iq0 else math.inf,
    }


def interpolation_exponents(r: float, p: float, q: float, max_halvings: int = 60) -> ExponentSolution:
    """Solve the three interpolation equations with every constraint strict.

    ``theta`` follows from ``t1``; ``q0`` then follows from the second
    equation and ``p0`` from the first once ``1/p1`` is placed mid-window.
    ``t1`` starts at 3/2 and moves toward 2 by halving its distance until
    every constraint holds strictly.
    """
    if not r > 2:
        raise ValueError("need r > 2")
    rp = r / (r - 1.0)
    if not (rp < p < r and rp < q < r):
        raise ValueError("need r' < p, q < r")
    eps = 0.5
    for _ in range(max_halvings):
        t1 = 2.0 - eps
        theta = (1.0 / r) * t1 / (t1 - 1.0)
        lo, hi = constraint_bounds(t1)
        ip1 = 0.5 * (lo + hi)
        if 0 < theta < 1 and lo < ip1 < hi:
            ip0 = (1.0 / p - theta * ip1) / (1.0 - theta)
            iq0 = (1.0 / q - theta * (1.0 - 1.0 / t1)) / (1.0 - theta)
            if 0 < ip0 < 1 and 0 < iq0 < 1:
                p0, q0, p1 = 1.0 / ip0, 1.0 / iq0, 1.0 / ip1
                res = exponent_residuals(r, p, q, theta, t1, p0, q0, p1)
                margins = _margins(theta, t1, p0, q0, p1)
                if all(v > 0 for v in margins.values()):
                    return ExponentSolution(r, p, q, theta, t1, p0, q0, p1, res, margins)
        eps /= 2.0
    raise ValueError("no feasible exponents found")


# ---------------------------------------------------------------------------
# configuration and reports


CONFIG_KEYS = ("grid", "exponents", "collection", "sweep", "rwt")


@dataclass
class RunConfig:
    grid: GridConfig = field(default_factory=lambda: GridConfig(log_size=8))
    exponents: ExponentConfig = field(default_factory=ExponentConfig)
    collection: dict = field(default_factory=lambda: {"mode": "stacked", "params": {}})
    sweep: dict = field(default_factory=dict)
    rwt: RWTConfig = field(default_factory=RWTConfig)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - set(CONFIG_KEYS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        out = cls()
        if "grid" in d:
            out.grid = GridConfig(**d["grid"])
        if "exponents" in d:
            e = {k: v for k, v in d["exponents"].items() if k in ("r", "r0", "p", "q", "s", "theta1")}
            out.exponents = ExponentConfig(**e)
        if "collection" in d:
            out.collection = {"mode": "stacked", "params": {}} | dict(d["collection"])
        if "sweep" in d:
            out.sweep = dict(d["sweep"])
        if "rwt" in d:
            out.rwt = RWTConfig.from_dict(d["rwt"])
        return out

    def to_dict(self) -> dict:
        return {
            "grid": {"log_size": self.grid.log_size, "freq_box_radius": self.grid.freq_box_radius,
                     "phi_decay": self.grid.phi_decay, "bump_profile": self.grid.bump_profile},
            "exponents": _cfg_kwargs(self.exponents),
            "collection": self.collection,
            "sweep": self.sweep,
            "rwt": self.rwt.to_dict(),
        }


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return RunConfig.from_dict(json.load(fh))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def content_hash(obj) -> str:
    """SHA-256 of the canonical JSON encoding."""
    blob = json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def rows_to_csv(rows: Sequence[dict], columns: Optional[Sequence[str]] = None) -> str:
    columns = list(columns or (rows[0].keys() if rows else ()))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _jsonable(r.get(k)) for k in columns})
    return buf.getvalue()


def write_report(payload: dict, rows: Sequence[dict], out, fmt: str = "json",
                 config: Optional[dict] = None, inputs: Optional[dict] = None,
                 columns: Optional[Sequence[str]] = None) -> dict:
    """Write a report; CSV output gets a ``.json`` sidecar with config and input hash."""
    meta = {"config": config or {}, "inputs": inputs or {}, "input_hash": content_hash(inputs or {})}
    if fmt == "json":
        text = json.dumps(_jsonable(payload | {"meta": meta}), indent=2, sort_keys=True)
        if out is not None:
            Path(out).write_text(text + "\n")
        return {"text": text, "meta": meta}
    if fmt != "csv":
        raise ValueError("format must be json or csv")
    text = rows_to_csv(rows, columns)
    if out is not None:
        Path(out).write_text(text)
        side = Path(str(out) + ".json")
        side.write_text(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
    return {"text": text, "meta": meta}
