"""Stopping-time decompositions, the generic estimate and the reduction to shifted forms.

Thresholds are always powers of two so that every extracted family is one
of the families the greedy energy maximises over. Concretely, at level
``n`` the f-threshold is ``2^-(n+1) * E_hat`` with ``E_hat`` the energy
rounded up to a power of two, and the h-threshold is the smallest power of
two at least ``gamma^-(n+1) * E``. Both postconditions are then exact
inequalities against the snapped energy, which is less than twice ``E``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .fourier import BumpProfile, as_signal, bump_kernel
from .grid import FreqRectangle, RectangleCollection
from .maximal import default_breakpoints, variational_carleson
from .operators import ExponentConfig, trilinear_form
from .tiles import (
    DEFAULT_DECAY,
    ColumnFamily,
    _as_pool,
    _ceil_log2,
    _is_h,
    column_constant,
    energy,
    enumerate_super_tiles,
    greedy_family,
    shifted_form,
    size_f,
    size_h,
)

LOGGER = logging.getLogger(__name__)

SIZE_CONSTANT = 4.0


class PostconditionError(AssertionError):
    pass


def _pow2(m: int) -> float:
    return math.ldexp(1.0, m)


def f_threshold_exponent(energy_value: float, n: int) -> int:
    """``m`` with ``2^m = 2^-(n+1) * 2^ceil(log2 E)``."""
    return _ceil_log2(energy_value) - n - 1


def h_threshold_exponent(energy_value: float, n: int, cfg: ExponentConfig) -> int:
    """Smallest ``m`` with ``2^m >= gamma^-(n+1) E``; ``log2 gamma = r0/r'``."""
    target = math.log2(energy_value) - (n + 1) * cfg.r0 / cfg.r_prime
    m = math.ceil(target)
    while _pow2(m) < energy_value * 2.0 ** (-(n + 1) * cfg.r0 / cfg.r_prime):
        m += 1
    while _pow2(m - 1) >= energy_value * 2.0 ** (-(n + 1) * cfg.r0 / cfg.r_prime):
        m -= 1
    return m


def threshold_exponent(kind: str, energy_value: float, n: int, cfg: ExponentConfig) -> int:
    if kind == "f":
        return f_threshold_exponent(energy_value, n)
    return h_threshold_exponent(energy_value, n, cfg)


@dataclass
class DecomposeResult:
    kind: str
    n: int
    high: ColumnFamily
    low: tuple
    energy: float
    snapped_energy: float
    threshold: float
    size_low: float
    top_measure: int
    top_bound: float
    checks: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "energy": self.energy,
            "snapped_energy": self.snapped_energy,
            "threshold": self.threshold,
            "size_low": self.size_low,
            "top_measure": self.top_measure,
            "top_bound": self.top_bound,
            "low": [p.to_dict() for p in self.low],
            "high": self.high.to_dict(),
            "checks": self.checks,
        }


def _size(kind: str, pool, data, n: int, cfg: ExponentConfig, decay: int) -> float:
    return size_f(pool, data, cfg) if kind == "f" else size_h(pool, data, n, cfg, decay)


def hypothesis_holds(kind: str, size_value: float, energy_value: float, n: int, cfg: ExponentConfig) -> bool:
    """Entry condition in snapped form: the size is at most the level-``(n-1)`` threshold."""
    if size_value == 0:
        return True
    if energy_value <= 0:
        return False
    return size_value <= _pow2(threshold_exponent(kind, energy_value, n - 1, cfg))


def decompose(pool, data, n: int, cfg: ExponentConfig, shift: int = 0,
              energy_value: Optional[float] = None, decay: int = DEFAULT_DECAY,
              check: bool = True) -> DecomposeResult:
    """Split ``pool`` into mutually disjoint columns above the level-``n`` threshold and the rest.

    ``data`` is a signal (f case) or a mapping keyed by rectangle (h case);
    ``shift`` is the order parameter of the columns. The energy defaults to
    the greedy energy of ``pool``. With ``check`` the entry hypothesis and
    all postconditions are enforced.
    """
    pool = _as_pool(pool)
    kind = "h" if _is_h(data) else "f"
    if not pool:
        empty = ColumnFamily((), shift)
        return DecomposeResult(kind, n, empty, (), 0.0, 0.0, math.inf, 0.0, 0, 2.0 ** (cfg.r0 * (n + 1)), {})
    return _decompose(pool, data, kind, n, shift, cfg, energy_value, decay, check)


def _decompose(pool: tuple, data, kind: str, n: int, shift: int, cfg: ExponentConfig,
               energy_value: Optional[float], decay: int, check: bool) -> DecomposeResult:
    own = energy(pool, data, shift, cfg, decay=decay).value
    E = own if energy_value is None else float(energy_value)
    sz = _size(kind, pool, data, shift, cfg, decay)
    if E <= 0:
        if sz > 0:
            raise ValueError("positive size with zero energy")
        empty = ColumnFamily((), shift)
        return DecomposeResult(kind, n, empty, pool, 0.0, 0.0, math.inf, 0.0, 0, _pow2(0), {})
    if check and not hypothesis_holds(kind, sz, E, n, cfg):
        raise ValueError(f"size {sz} exceeds the level-{n} hypothesis for energy {E}")
    m = threshold_exponent(kind, E, n, cfg)
    t = _pow2(m)
    snapped = t * 2.0 ** (n + 1) if kind == "f" else t * 2.0 ** ((n + 1) * cfg.r0 / cfg.r_prime)
    fam = greedy_family(pool, data, shift, cfg, m, decay)
    high = fam.tiles()
    low = tuple(p for p in pool if p not in high)
    size_low = _size(kind, low, data, shift, cfg, decay)
    meas = fam.top_measure()
    bound = 2.0 ** (cfg.r0 * (n + 1))
    checks = {
        "partition": high.isdisjoint(low) and len(high) + len(low) == len(pool),
        "mutually_disjoint": fam.mutually_disjoint(),
        "size_low": size_low < t,
        "top_measure": meas <= bound,
        "energy_dominates": own <= snapped,
    }
    LOGGER.debug("decompose %s n=%d E=%g t=%g high=%d low=%d", kind, n, E, t, len(high), len(low))
    res = DecomposeResult(kind, n, fam, low, E, snapped, t, size_low, meas, bound, checks)
    if check and not res.ok:
        bad = [k for k, v in checks.items() if not v]
        raise PostconditionError(f"decomposition postconditions failed: {bad}")
    return res


# ---------------------------------------------------------------------------
# global decomposition


@dataclass
class Level:
    kind: str
    n: int
    family: ColumnFamily
    stock_before: int
    stock_after: int
    size_f_stock: float
    size_h_stock: float
    threshold: float

    @property
    def tiles(self) -> set:
        return self.family.tiles()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "stock_before": self.stock_before,
            "stock_after": self.stock_after,
            "size_f_stock": self.size_f_stock,
            "size_h_stock": self.size_h_stock,
            "threshold": self.threshold,
            "top_measure": self.family.top_measure(),
            "family": self.family.to_dict(),
        }


@dataclass
class DecompositionReport:
    shift: int
    pool: tuple
    levels: list
    residual: tuple
    energy_f: float
    energy_h: float
    size_f: float
    size_h: float
    order_exponent: float
    restarts: int
    constants: dict = field(default_factory=dict)
    snapshots: list = field(default_factory=list)

    def level_tiles(self) -> list:
        return [lv.tiles for lv in self.levels]

    def to_dict(self) -> dict:
        return {
            "shift": self.shift,
            "energy_f": self.energy_f,
            "energy_h": self.energy_h,
            "size_f": self.size_f,
            "size_h": self.size_h,
            "order_exponent": self.order_exponent,
            "restarts": self.restarts,
            "constants": self.constants,
            "levels": [lv.to_dict() for lv in self.levels],
            "residual": [p.to_dict() for p in self.residual],
            "snapshots": self.snapshots,
        }

    def table(self) -> list[dict]:
        return [
            {
                "step": k,
                "kind": lv.kind,
                "n": lv.n,
                "columns": len(lv.family),
                "tiles": len(lv.tiles),
                "top_measure": lv.family.top_measure(),
                "threshold": lv.threshold,
                "stock_after": lv.stock_after,
            }
            for k, lv in enumerate(self.levels)
        ]


def _ratio(a: float, b: float) -> float:
    if a == 0:
        return 0.0
    return a / b if b > 0 else math.inf


def _smallest_level(kind: str, size_value: float, energy_value: float, cfg: ExponentConfig) -> int:
    """Smallest ``n`` whose threshold does not exceed ``size_value``."""
    if kind == "f":
        n = _ceil_log2(energy_value) - 1 - math.floor(math.log2(size_value)) - 2
    else:
        n = math.floor((math.log2(energy_value) - math.log2(size_value)) * cfg.r_prime / cfg.r0) - 3
    while _pow2(threshold_exponent(kind, energy_value, n, cfg)) > size_value:
        n += 1
    while _pow2(threshold_exponent(kind, energy_value, n - 1, cfg)) <= size_value:
        n -= 1
    return n


class _Restart(Exception):
    def __init__(self, kind: str, value: float):
        self.kind, self.value = kind, value


def _run_global(pool: tuple, f, h, shift: int, cfg: ExponentConfig, ef: float, eh: float,
                order_exponent: float, decay: int) -> tuple[list, tuple, list]:
    stock = pool
    levels: list = []
    snapshots: list = []
    while stock:
        sf = size_f(stock, f, cfg)
        sh = size_h(stock, h, shift, cfg, decay)
        if sf == 0 and sh == 0:
            break
        a = _ratio(sf, ef)
        b = _ratio(sh, eh) ** order_exponent
        kind = "f" if a >= b else "h"
        data, sz, E = (f, sf, ef) if kind == "f" else (h, sh, eh)
        own = energy(stock, data, shift, cfg, decay=decay).value
        n = _smallest_level(kind, sz, E, cfg)
        m = threshold_exponent(kind, E, n, cfg)
        snapped = _pow2(m) * (2.0 ** (n + 1) if kind == "f" else 2.0 ** ((n + 1) * cfg.r0 / cfg.r_prime))
        if own > snapped:
            raise _Restart(kind, own)
        res = decompose(stock, data, n, cfg, shift=shift, energy_value=E, decay=decay, check=True)
        if not res.high.columns:
            raise RuntimeError("global decomposition made no progress")
        snapshots.append({"kind": kind, "n": n, "size_f": sf, "size_h": sh, "a": a, "b": b,
                          "stock_energy": own})
        levels.append(Level(kind, n, res.high, len(stock), len(res.low), sf, sh, res.threshold))
        stock = res.low
    return levels, stock, snapshots


def global_decompose(pool, f, h: Mapping, n_shift: int, cfg: ExponentConfig,
                     order_exponent: Optional[float] = None, decay: int = DEFAULT_DECAY,
                     max_restarts: int = 50) -> DecompositionReport:
    """Alternate the two decompositions until the stock is exhausted.

    The next step is the f-step when ``S_f(stock)/E_f`` is at least
    ``(S_h(stock)/E_h)^order_exponent`` (default ``r'/2``), else the h-step,
    each at the smallest level whose threshold does not exceed the current
    size. The reference energies start at the greedy energies of the full
    pool; if some stock turns out to have a larger greedy energy than its
    snapped reference, the reference is raised to it and the run restarts,
    so every step runs against one fixed pair of energies.
    """
    pool = _as_pool(pool)
    f = as_signal(f)
    order_exponent = cfg.r_prime / 2.0 if order_exponent is None else float(order_exponent)
    ef = energy(pool, f, n_shift, cfg, decay=decay).value
    eh = energy(pool, h, n_shift, cfg, decay=decay).value
    sf = size_f(pool, f, cfg)
    sh = size_h(pool, h, n_shift, cfg, decay)
    restarts = 0
    while True:
        try:
            levels, residual, snaps = _run_global(pool, f, h, n_shift, cfg, ef, eh, order_exponent, decay)
            break
        except _Restart as r:
            restarts += 1
            if restarts > max_restarts:
                raise RuntimeError("reference energies did not stabilise")
            if r.kind == "f":
                ef = r.value
            else:
                eh = r.value
    consts = {
        "size_f": SIZE_CONSTANT,
        "size_h": SIZE_CONSTANT,
        "top_measure": 2.0 ** cfg.r0,
    }
    LOGGER.info("global decomposition: %d levels, %d restarts", len(levels), restarts)
    return DecompositionReport(n_shift, pool, levels, residual, ef, eh, sf, sh, order_exponent,
                               restarts, consts, snaps)


def check_global(report: DecompositionReport, f, h: Mapping, cfg: ExponentConfig,
                 decay: int = DEFAULT_DECAY) -> dict:
    """Evaluate properties (i)-(iv) of every level plus partition and termination."""
    out = {"partition": True, "size_f": True, "size_h": True, "disjoint": True,
           "top_measure": True, "termination": True, "details": []}
    seen: set = set()
    for lv in report.levels:
        tiles = lv.tiles
        if seen & tiles:
            out["partition"] = False
        seen |= tiles
    seen |= set(report.residual)
    if seen != set(report.pool) or sum(len(lv.tiles) for lv in report.levels) + len(report.residual) != len(report.pool):
        out["partition"] = False
    gamma_log = cfg.r0 / cfg.r_prime
    prev = None
    for lv in report.levels:
        tiles = lv.tiles
        sf = size_f(tiles, f, cfg)
        sh = size_h(tiles, h, report.shift, cfg, decay)
        bf = SIZE_CONSTANT * min(2.0 ** (-lv.n) * report.energy_f, report.size_f)
        bh = SIZE_CONSTANT * min(2.0 ** (-gamma_log * lv.n) * report.energy_h, report.size_h)
        meas = lv.family.top_measure()
        bm = report.constants["top_measure"] * 2.0 ** (cfg.r0 * lv.n)
        row = {"kind": lv.kind, "n": lv.n, "size_f": sf, "bound_f": bf, "size_h": sh, "bound_h": bh,
               "top_measure": meas, "bound_measure": bm}
        out["details"].append(row)
        out["size_f"] &= sf <= bf
        out["size_h"] &= sh <= bh
        out["disjoint"] &= lv.family.mutually_disjoint()
        out["top_measure"] &= meas <= bm
        if prev is not None and not lv.stock_before < prev:
            out["termination"] = False
        prev = lv.stock_before
    return out


# ---------------------------------------------------------------------------
# generic estimate


def g_factor(pool, g, n: int, cfg: ExponentConfig) -> float:
    """``sup_P (mean over I_P^n of (V^r g)^r)^(1/r)``."""
    pool = _as_pool(pool)
    if not pool:
        return 0.0
    g = as_signal(g)
    size = g.shape[0]
    bp = default_breakpoints(size, [p.rect for p in pool])
    vr = variational_carleson(g, cfg.r, bp) ** cfg.r
    best = 0.0
    for p in pool:
        iv = p.shifted(n)
        best = max(best, float(vr[int(iv.lo):int(iv.hi)].mean()))
    return best ** (1.0 / cfg.r)


def closed_form(sf: float, ef: float, sh: float, eh: float, cfg: ExponentConfig, theta1: float) -> float:
    """``S_f^(s t1) E_f^(1 - s t1) S_h^(r' s t2/r0) E_h^(1 - r' s t2/r0)`` with ``s = (r - r0)/r``."""
    sig = cfg.sigma
    t2 = 1.0 - theta1
    a = sig * theta1
    b = cfg.r_prime * sig * t2 / cfg.r0
    if 0.0 in (sf, ef, sh, eh):
        return 0.0
    return sf ** a * ef ** (1 - a) * sh ** b * eh ** (1 - b)


def level_series(sf: float, ef: float, sh: float, eh: float, cfg: ExponentConfig, ns) -> float:
    """``sum_n min(2^-n E_f, S_f) min(2^(-r0 n/r') E_h, S_h) 2^(r0 n)`` over ``ns``."""
    ns = np.asarray(list(ns), dtype=np.float64)
    g = cfg.r0 / cfg.r_prime
    terms = np.minimum(2.0 ** -ns * ef, sf) * np.minimum(2.0 ** (-g * ns) * eh, sh) * 2.0 ** (cfg.r0 * ns)
    return math.fsum(terms.tolist())


def geometric_constant(cfg: ExponentConfig) -> float:
    return 1.0 / (1.0 - 2.0 ** (-cfg.sigma)) / (1.0 - 2.0 ** (-cfg.r0 / cfg.r))


@dataclass
class GenericEstimate:
    lhs: float
    rhs: float
    constant: float
    theta1: float
    g_term: float
    table: list
    holds: bool
    column_constant: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def generic_estimate(report: DecompositionReport, f, g, h: Mapping, cfg: ExponentConfig,
                     theta1: Optional[float] = None, decay: int = DEFAULT_DECAY,
                     profile: Optional[BumpProfile] = None) -> GenericEstimate:
    """Sum the shifted form over the levels and compare with the closed form.

    The constant is the product of the column constant ``C_c^(1/r')``, the
    two size constants, the top-measure constant ``2^r0``, a factor 2 for
    the two kinds of steps that may share a level, and the two geometric
    series constants.
    """
    theta1 = cfg.theta1 if theta1 is None else float(theta1)
    if not 0.0 <= theta1 <= 1.0:
        raise ValueError("theta1 must lie in [0, 1]")
    profile = profile or BumpProfile()
    n = report.shift
    table = []
    lhs_terms = []
    for lv in report.levels:
        tiles = _as_pool(lv.tiles)
        lam = shifted_form(tiles, f, g, h, n, cfg, profile)
        lhs_terms.append(lam)
        table.append({
            "kind": lv.kind,
            "n": lv.n,
            "form": lam,
            "size_f": size_f(tiles, f, cfg),
            "size_h": size_h(tiles, h, n, cfg, decay),
            "top_measure": lv.family.top_measure(),
            "series_term": level_series(report.size_f, report.energy_f, report.size_h, report.energy_h, cfg, [lv.n]),
        })
    if report.residual:
        lhs_terms.append(shifted_form(report.residual, f, g, h, n, cfg, profile))
    lhs = math.fsum(lhs_terms)
    gt = g_factor(report.pool, g, n, cfg)
    cc = max((column_constant(p, n, cfg.r_prime, decay, profile) for p in report.pool), default=0.0)
    const = (
        cc ** (1.0 / cfg.r_prime)
        * report.constants.get("size_f", SIZE_CONSTANT)
        * report.constants.get("size_h", SIZE_CONSTANT)
        * report.constants.get("top_measure", 2.0 ** cfg.r0)
        * 2.0
        * geometric_constant(cfg)
    )
    rhs = gt * closed_form(report.size_f, report.energy_f, report.size_h, report.energy_h, cfg, theta1)
    holds = lhs <= const * rhs * (1 + 1e-12) + 1e-300
    return GenericEstimate(lhs, rhs, const, theta1, gt, table, holds, cc)


# ---------------------------------------------------------------------------
# reduction to shifted forms


def _shift_window_max(kernel_abs: np.ndarray, n: int, length: int) -> float:
    size = kernel_abs.shape[0]
    u = (np.arange(n * length - length + 1, n * length + length)) % size
    return float(kernel_abs[u].max())


def reduction_constant(R: FreqRectangle, size: int, decay_power: float,
                       profile: Optional[BumpProfile] = None) -> tuple[float, dict]:
    """``max_n |I| K_n (1+|n|)^D`` over the distinct shifts of one rectangle.

    ``K_n`` is the largest modulus of the bump kernel adapted to ``R1`` over
    all separations between a point of ``I`` and a point of ``I^n``.
    """
    profile = profile or BumpProfile()
    k = np.abs(bump_kernel(size, R.r1, profile))
    r1 = int(R.r1.length)
    length = size // r1
    per = {}
    for n in range(-(r1 // 2), r1 - r1 // 2):
        per[n] = length * _shift_window_max(k, n, length) * (1.0 + abs(n)) ** decay_power
    return max(per.values()), per


@dataclass
class ReductionReport:
    lhs: float
    weighted_sum: float
    constant: float
    empirical: float
    holds: bool
    per_shift: dict
    shift_range: tuple

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["per_shift"] = {str(k): v for k, v in self.per_shift.items()}
        return d


def reduce_to_shifted_forms(f, g, h: Mapping, c, cfg: ExponentConfig, decay_power: float = 2.0,
                            profile: Optional[BumpProfile] = None) -> ReductionReport:
    """Compare ``|Lambda_R(f, g, h)|`` with ``sum_n (1+|n|)^-D Lambda^n`` over all tiles.

    ``n`` runs over ``[-K/2, K/2)`` with ``K`` the largest ``|R1|``; every
    distinct periodic shift of every rectangle appears there.
    """
    f = as_signal(f)
    g = as_signal(g, f.shape[0])
    size = f.shape[0]
    profile = profile or BumpProfile()
    rects = sorted(c.rects if isinstance(c, RectangleCollection) else tuple(c), key=lambda r: r.key)
    if any(r.r2.length < r.r1.length for r in rects):
        raise ValueError("reduction needs |R2| >= |R1| for every rectangle; mirror first")
    lhs = abs(trilinear_form(f, g, h, rects))
    pool = enumerate_super_tiles(rects, size)
    if not pool:
        return ReductionReport(lhs, 0.0, 0.0, 0.0, lhs == 0.0, {}, (0, 0))
    kmax = max(int(r.r1.length) for r in rects)
    lo, hi = -(kmax // 2), kmax - kmax // 2
    per = {}
    for n in range(lo, hi):
        per[n] = shifted_form(pool, f, g, h, n, cfg, profile)
    weighted = math.fsum((1.0 + abs(n)) ** (-decay_power) * v for n, v in per.items())
    const = max(reduction_constant(R, size, decay_power, profile)[0] for R in rects)
    holds = lhs <= const * weighted * (1 + 1e-10) + 1e-300
    emp = _ratio(lhs, weighted)
    LOGGER.info("reduction: |Lambda|=%g weighted=%g C_red=%g", lhs, weighted, const)
    return ReductionReport(lhs, weighted, const, emp, holds, per, (lo, hi))
