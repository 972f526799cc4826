"""Super tiles, small tiles, columns, sizes, energies and the shifted form.

A super tile is a pair ``(R, I)`` with ``I`` a dyadic time interval of
length ``N/|R1|``. For a shift ``n`` the interval ``I^n`` is ``I`` moved by
``n`` of its own lengths, periodically. The small tiles of ``(R, I)`` are
the dyadic intervals of length ``N/|R2|`` inside ``I^n``.

Everything here assumes ``|R2| >= |R1|``. Low-eccentricity collections go
through :func:`mirror_collection` and :func:`mirror_data`, which swap the
two frequency axes together with ``f`` and ``g``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .fourier import (
    BumpProfile,
    as_signal,
    bump_kernel,
    convolve_with_bump,
    sharp_projection,
    weight_phi,
)
from .grid import DyadicInterval, FreqRectangle, Interval, RectangleCollection
from .maximal import default_breakpoints, log_plus, mixed_norm, norm_lp, variational_carleson
from .operators import ExponentConfig

DEFAULT_DECAY = 10
EXHAUSTIVE_LIMIT = 14


# ---------------------------------------------------------------------------
# tiles


@dataclass(frozen=True, order=True)
class SmallTile:
    rect: FreqRectangle
    time: DyadicInterval

    @property
    def omega2(self) -> DyadicInterval:
        return self.rect.r2

    @property
    def omega3(self) -> Interval:
        return self.rect.r3()

    def to_dict(self) -> dict:
        return {"rect": self.rect.to_dict(), "time": self.time.to_dict()}


@dataclass(frozen=True, order=True)
class SuperTile:
    """``(R, I)`` with ``|R1| |I| = N``; ``N`` is recovered from the pair."""

    rect: FreqRectangle
    time: DyadicInterval

    def __post_init__(self) -> None:
        if self.time.grid != "D0" or self.time.scale < 0:
            raise ValueError("super tile time interval must be a D0 interval of integer length")

    @property
    def size(self) -> int:
        return int(self.rect.r1.length * self.time.length)

    @property
    def key(self) -> tuple:
        return self.rect.key + (self.time.scale, self.time.index)

    @property
    def length(self) -> int:
        return int(self.time.length)

    def shifted(self, n: int) -> DyadicInterval:
        count = self.size >> self.time.scale
        return DyadicInterval(self.time.scale, (self.time.index + n) % count)

    @property
    def eccentricity_count(self) -> int:
        """``e(R) = |R2|/|R1|``, the number of small tiles."""
        r1, r2 = int(self.rect.r1.length), int(self.rect.r2.length)
        if r2 < r1:
            raise ValueError("small tiles need |R2| >= |R1|; mirror the collection first")
        return r2 // r1

    def to_dict(self) -> dict:
        return {"rect": self.rect.to_dict(), "time": self.time.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "SuperTile":
        return cls(FreqRectangle.from_dict(d["rect"]), DyadicInterval.from_dict(d["time"]))


def _window_bounds(window, size: int) -> tuple[int, int]:
    if window is None:
        return 0, size
    if isinstance(window, tuple):
        return int(window[0]), int(window[1])
    return int(window.lo), int(window.hi)


def enumerate_super_tiles(c, size: int, window=None) -> list[SuperTile]:
    """All ``(R, I)`` with ``|R1||I| = N`` and ``I`` inside the time window."""
    rects = c.rects if isinstance(c, RectangleCollection) else tuple(c)
    lo, hi = _window_bounds(window, size)
    out = []
    for R in sorted(rects, key=lambda r: r.key):
        r1 = int(R.r1.length)
        if size % r1:
            raise ValueError(f"|R1| = {r1} does not divide N = {size}")
        scale = (size // r1).bit_length() - 1
        length = 1 << scale
        for k in range(r1):
            if lo <= k * length and (k + 1) * length <= hi:
                out.append(SuperTile(R, DyadicInterval(scale, k)))
    return out


def small_tiles_of(p: SuperTile, n: int) -> list[SmallTile]:
    e = p.eccentricity_count
    shifted = p.shifted(n)
    scale = shifted.scale - (e.bit_length() - 1)
    first = shifted.index * e
    return [SmallTile(p.rect, DyadicInterval(scale, first + j)) for j in range(e)]


def order_prec(p: SuperTile, q: SuperTile, n: int, strict: bool = False) -> bool:
    """``p`` below ``q`` in the shifted order: ``R1(p) >= R1(q)`` and ``I_p^n <= I_q^n``."""
    if p == q and not strict:
        return True
    a, b = p.shifted(n), q.shifted(n)
    freq = p.rect.r1.contains(q.rect.r1)
    time = b.contains(a)
    if strict:
        return freq and time and p.rect.r1 != q.rect.r1 and a != b
    return freq and time


def order_lt(p: SuperTile, q: SuperTile) -> bool:
    """Strict unshifted order: ``R1(p)`` strictly contains ``R1(q)`` and ``I_p`` is strictly inside ``I_q``."""
    return (
        p.rect.r1.contains(q.rect.r1)
        and p.rect.r1 != q.rect.r1
        and q.time.contains(p.time)
        and q.time != p.time
    )


# ---------------------------------------------------------------------------
# columns


def _structure_violation(top: SuperTile, members: Iterable[SuperTile], n: int) -> Optional[str]:
    top_iv = top.shifted(n)
    rects = set()
    for p in members:
        if not order_prec(p, top, n):
            return f"{p.key} is not below the top {top.key}"
        for rho in small_tiles_of(p, n):
            if not top_iv.contains(rho.time):
                return f"small tile {rho.time} of {p.key} leaves the top interval"
        rects.add(p.rect)
    rl = sorted(rects, key=lambda r: r.key)
    for a, b in itertools.combinations(rl, 2):
        if a.r2.intersects(b.r2):
            return f"member rectangles {a.key} and {b.key} share frequencies in R2"
    return None


@dataclass(frozen=True)
class Column:
    """A top together with super tiles below it in the shifted order."""

    top: SuperTile
    members: frozenset
    shift: int

    def __post_init__(self) -> None:
        members = frozenset(self.members) | {self.top}
        object.__setattr__(self, "members", members)
        bad = _structure_violation(self.top, members, self.shift)
        if bad:
            raise ValueError(f"invalid column: {bad}")

    def __len__(self) -> int:
        return len(self.members)

    def sorted_members(self) -> list[SuperTile]:
        return sorted(self.members, key=lambda p: p.key)

    def to_dict(self) -> dict:
        return {
            "top": self.top.to_dict(),
            "members": [p.to_dict() for p in self.sorted_members()],
            "shift": self.shift,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Column":
        return cls(
            SuperTile.from_dict(d["top"]),
            frozenset(SuperTile.from_dict(m) for m in d["members"]),
            int(d["shift"]),
        )


def _tiles_overlap(a: SuperTile, b: SuperTile, n: int) -> bool:
    return a.rect.r1.intersects(b.rect.r1) and a.shifted(n).intersects(b.shifted(n))


@dataclass(frozen=True)
class ColumnFamily:
    columns: tuple
    shift: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        for c in self.columns:
            if c.shift != self.shift:
                raise ValueError("column shift differs from family shift")

    def __len__(self) -> int:
        return len(self.columns)

    def tiles(self) -> set:
        out: set = set()
        for c in self.columns:
            out |= c.members
        return out

    def top_measure(self) -> int:
        return sum(c.top.length for c in self.columns)

    def disjointness_violation(self) -> Optional[str]:
        """``None`` when both clauses hold, else a description of the first failure."""
        seen: set = set()
        for c in self.columns:
            if seen & c.members:
                return "columns share super tiles"
            seen |= c.members
        for a, b in itertools.combinations(self.columns, 2):
            if order_prec(a.top, b.top, self.shift) or order_prec(b.top, a.top, self.shift):
                return f"tops {a.top.key} and {b.top.key} are comparable"
            if _tiles_overlap(a.top, b.top, self.shift):
                return f"shifted tops {a.top.key} and {b.top.key} intersect"
        return None

    def mutually_disjoint(self) -> bool:
        return self.disjointness_violation() is None

    def to_dict(self) -> dict:
        return {"shift": self.shift, "columns": [c.to_dict() for c in self.columns]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ColumnFamily":
        return cls(tuple(Column.from_dict(c) for c in d["columns"]), int(d["shift"]))


def _as_pool(pool) -> tuple:
    return tuple(sorted(set(pool), key=lambda p: p.key))


def maximal_column(top: SuperTile, pool, n: int) -> Column:
    pool = _as_pool(pool)
    if top not in pool:
        raise ValueError("top must belong to the pool")
    return Column(top, frozenset(p for p in pool if order_prec(p, top, n)), n)


# ---------------------------------------------------------------------------
# vectorised pool data


class _PoolArrays:
    """Per-pool arrays for one shift: interval bounds and the order matrix."""

    def __init__(self, pool: tuple, n: int):
        self.pool = pool
        self.n = n
        self.index = {p: i for i, p in enumerate(pool)}
        k = len(pool)
        self.r1lo = np.array([p.rect.r1.lo for p in pool], dtype=np.int64)
        self.r1hi = np.array([p.rect.r1.hi for p in pool], dtype=np.int64)
        self.length = np.array([p.length for p in pool], dtype=np.int64)
        sh = [p.shifted(n) for p in pool]
        self.slo = np.array([s.lo for s in sh], dtype=np.int64)
        self.shi = np.array([s.hi for s in sh], dtype=np.int64)
        if k:
            freq = (self.r1lo[:, None] <= self.r1lo[None, :]) & (self.r1hi[None, :] <= self.r1hi[:, None])
            time = (self.slo[None, :] <= self.slo[:, None]) & (self.shi[:, None] <= self.shi[None, :])
            self.below = freq & time  # below[i, j]: pool[i] is below pool[j]
        else:
            self.below = np.zeros((0, 0), dtype=bool)
        self.strict = self.below & ~self.below.T

    def maximal(self, stock: np.ndarray) -> np.ndarray:
        if not stock.any():
            return np.zeros_like(stock)
        above = (self.strict & stock[None, :]).any(axis=1)
        return stock & ~above

    def tie_key(self, i: int) -> tuple:
        return (int(self.slo[i]), -int(self.r1hi[i]), self.pool[i].key)


def _floor_log2(x: float) -> int:
    m, e = math.frexp(x)
    return e - 1


def _ceil_log2(x: float) -> int:
    m, e = math.frexp(x)
    return e - 1 if m == 0.5 else e


def _rect_key_map(h: Mapping) -> dict:
    return {R: as_signal(v) for R, v in h.items()}


def f_averages(pool, f, r0: float) -> np.ndarray:
    """``(mean_{I_P} |pi_{R1} f|^r0)^(1/r0)`` for every tile, pool order."""
    pool = _as_pool(pool)
    f = as_signal(f)
    size = f.shape[0]
    cache: dict = {}
    out = np.zeros(len(pool))
    for i, p in enumerate(pool):
        if p.size != size:
            raise ValueError("tile built for another N")
        key = (p.rect.r1, p.length)
        if key not in cache:
            a = np.abs(sharp_projection(f, p.rect.r1)) ** r0
            cache[key] = a.reshape(-1, p.length).mean(axis=1) ** (1.0 / r0)
        out[i] = cache[key][p.time.index]
    return out


def _phi_template(size: int, length: int, decay: int) -> np.ndarray:
    return weight_phi((0, length), decay, size)


def h_weights(pool, h: Mapping, n: int, r_prime: float, decay: int = DEFAULT_DECAY) -> np.ndarray:
    """``sum_z |h_R(z)|^r' Phi_{I_P^n}(z)`` for every tile, pool order.

    One circular correlation per rectangle gives the value at every
    placement of the window.
    """
    pool = _as_pool(pool)
    hm = _rect_key_map(h)
    out = np.zeros(len(pool))
    cache: dict = {}
    for i, p in enumerate(pool):
        if p.rect not in hm:
            continue
        key = (p.rect, p.length)
        if key not in cache:
            a = np.abs(hm[p.rect]) ** r_prime
            size = a.shape[0]
            phi = _phi_template(size, p.length, decay)
            corr = np.fft.ifft(np.fft.fft(a) * np.conj(np.fft.fft(phi))).real
            cache[key] = np.maximum(corr, 0.0)
        lo = int(p.shifted(n).lo)
        out[i] = cache[key][lo]
    return out


def _column_value(weights: np.ndarray, top_len: int, r_prime: float) -> float:
    return (math.fsum(weights.tolist()) / top_len) ** (1.0 / r_prime)


# ---------------------------------------------------------------------------
# sizes


def size_f(pool, f, cfg: ExponentConfig) -> float:
    pool = _as_pool(pool)
    if not pool:
        return 0.0
    return float(f_averages(pool, f, cfg.r0).max())


def _column_values(arr: _PoolArrays, w: np.ndarray, stock: np.ndarray, rp: float, only=None) -> np.ndarray:
    vals = np.zeros(len(arr.pool))
    idx = np.nonzero(stock if only is None else only)[0]
    for j in idx:
        mem = stock & arr.below[:, j]
        vals[j] = _column_value(w[mem], int(arr.length[j]), rp)
    return vals


def size_h(pool, h: Mapping, n: int, cfg: ExponentConfig, decay: int = DEFAULT_DECAY) -> float:
    """Largest column value, scanning each tile as a candidate top."""
    pool = _as_pool(pool)
    if not pool:
        return 0.0
    arr = _PoolArrays(pool, n)
    w = h_weights(pool, h, n, cfg.r_prime, decay)
    stock = np.ones(len(pool), dtype=bool)
    return float(_column_values(arr, w, stock, cfg.r_prime).max())


def size_h_exhaustive(pool, h: Mapping, n: int, cfg: ExponentConfig, decay: int = DEFAULT_DECAY) -> float:
    """Supremum over every subset that forms a column; pools of at most 12 tiles."""
    pool = _as_pool(pool)
    if len(pool) > 12:
        raise ValueError("exhaustive column search limited to 12 tiles")
    if not pool:
        return 0.0
    arr = _PoolArrays(pool, n)
    w = h_weights(pool, h, n, cfg.r_prime, decay)
    best = 0.0
    k = len(pool)
    for mask in range(1, 1 << k):
        members = [i for i in range(k) if mask >> i & 1]
        sel = np.zeros(k, dtype=bool)
        sel[members] = True
        for t in members:
            if arr.below[members, t].all():
                best = max(best, _column_value(w[sel], int(arr.length[t]), cfg.r_prime))
    return best


# ---------------------------------------------------------------------------
# greedy extraction and energies


def _greedy(arr: _PoolArrays, stock: np.ndarray, w: Optional[np.ndarray], t: float, rp: float) -> list[tuple[int, np.ndarray]]:
    """Extract maximal columns until no admissible top remains.

    With ``w is None`` (f case) every maximal tile of the stock is a top.
    Otherwise (h case) the tops are the maximal elements among the tiles
    whose maximal column in the current stock has value at least ``t``.
    Column values only shrink as the stock shrinks, so no later top can
    sit above an earlier one.
    """
    stock = stock.copy()
    out = []
    while stock.any():
        if w is None:
            cand = arr.maximal(stock)
        else:
            vals = _column_values(arr, w, stock, rp, only=stock)
            cand = arr.maximal(stock & (vals >= t))
        idx = np.nonzero(cand)[0]
        if len(idx) == 0:
            break
        top = min(idx, key=arr.tie_key)
        members = stock & arr.below[:, top]
        out.append((int(top), members))
        stock &= ~members
    return out


def _family(arr: _PoolArrays, picks) -> ColumnFamily:
    cols = []
    for top, members in picks:
        cols.append(Column(arr.pool[top], frozenset(arr.pool[i] for i in np.nonzero(members)[0]), arr.n))
    return ColumnFamily(tuple(cols), arr.n)


@dataclass
class EnergyResult:
    value: float
    exponent: Optional[int]
    family: ColumnFamily
    kind: str
    mode: str
    per_threshold: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "exponent": self.exponent,
            "kind": self.kind,
            "mode": self.mode,
            "family": self.family.to_dict(),
            "per_threshold": {str(k): v for k, v in self.per_threshold.items()},
        }


def _is_h(data) -> bool:
    return isinstance(data, Mapping)


def greedy_family(pool, data, n: int, cfg: ExponentConfig, m: int, decay: int = DEFAULT_DECAY) -> ColumnFamily:
    """The family extracted at threshold ``2^m``."""
    pool = _as_pool(pool)
    arr = _PoolArrays(pool, n)
    t = math.ldexp(1.0, m)
    if _is_h(data):
        w = h_weights(pool, data, n, cfg.r_prime, decay)
        picks = _greedy(arr, np.ones(len(pool), dtype=bool), w, t, cfg.r_prime)
    else:
        a = f_averages(pool, data, cfg.r0)
        picks = _greedy(arr, a >= t, None, t, cfg.r_prime)
    return _family(arr, picks)


def _greedy_energy(pool: tuple, data, n: int, cfg: ExponentConfig, decay: int) -> EnergyResult:
    kind = "h" if _is_h(data) else "f"
    arr = _PoolArrays(pool, n)
    empty = ColumnFamily((), n)
    if not pool:
        return EnergyResult(0.0, None, empty, kind, "greedy")
    rp = cfg.r_prime
    if kind == "f":
        a = f_averages(pool, data, cfg.r0)
        w = None
        top_val = float(a.max())
        expo = cfg.r0
    else:
        a = None
        w = h_weights(pool, data, n, rp, decay)
        top_val = float(_column_values(arr, w, np.ones(len(pool), dtype=bool), rp).max())
        expo = rp
    if top_val <= 0:
        return EnergyResult(0.0, None, empty, kind, "greedy")
    m_hi = _floor_log2(top_val)
    total = float(arr.length.sum())
    # thresholds below this window cannot beat the value at m_hi
    depth = int(math.ceil(math.log2(total) / expo)) + 1
    best, best_m, best_picks = -1.0, None, []
    table = {}
    for m in range(m_hi, m_hi - depth - 1, -1):
        t = math.ldexp(1.0, m)
        stock = np.ones(len(pool), dtype=bool) if w is not None else a >= t
        picks = _greedy(arr, stock, w, t, rp)
        meas = sum(int(arr.length[top]) for top, _ in picks)
        val = t * meas ** (1.0 / expo)
        table[m] = val
        if val > best:
            best, best_m, best_picks = val, m, picks
    return EnergyResult(best, best_m, _family(arr, best_picks), kind, "greedy", table)


def _antichain_ok(arr: _PoolArrays, tops: Sequence[int]) -> bool:
    for i, j in itertools.combinations(tops, 2):
        if arr.below[i, j] or arr.below[j, i]:
            return False
        if arr.r1lo[i] < arr.r1hi[j] and arr.r1lo[j] < arr.r1hi[i] and arr.slo[i] < arr.shi[j] and arr.slo[j] < arr.shi[i]:
            return False
    return True


def _best_min_value(arr: _PoolArrays, w: np.ndarray, tops: list[int], rp: float) -> float:
    """Largest achievable minimum column value for a fixed set of tops."""
    k = len(arr.pool)
    rest = [i for i in range(k) if i not in tops]
    options = [[t for t in tops if arr.below[i, t]] for i in rest]
    sums = {t: [w[t]] for t in tops}
    free = [(i, opts) for i, opts in zip(rest, options) if opts]
    free.sort(key=lambda x: -w[x[0]])
    best = [0.0]

    def value(t):
        return _column_value(np.asarray(sums[t]), int(arr.length[t]), rp)

    remaining = [0.0] * (len(free) + 1)
    for pos in range(len(free) - 1, -1, -1):
        remaining[pos] = remaining[pos + 1] + float(w[free[pos][0]])

    def dfs(pos: int) -> None:
        if pos == len(free):
            best[0] = max(best[0], min(value(t) for t in tops))
            return
        # optimistic bound: each column could still receive all remaining weight
        cap = min(
            ((math.fsum(sums[t]) + remaining[pos]) / int(arr.length[t])) ** (1.0 / rp) for t in tops
        )
        if cap <= best[0]:
            return
        i, opts = free[pos]
        for t in opts:
            sums[t].append(w[i])
            dfs(pos + 1)
            sums[t].pop()

    dfs(0)
    return best[0]


def _exhaustive_energy(pool: tuple, data, n: int, cfg: ExponentConfig, decay: int) -> EnergyResult:
    kind = "h" if _is_h(data) else "f"
    if len(pool) > EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive energy limited to {EXHAUSTIVE_LIMIT} tiles")
    arr = _PoolArrays(pool, n)
    k = len(pool)
    best, best_m, best_tops = 0.0, None, ()
    if kind == "f":
        a = f_averages(pool, data, cfg.r0)
        w = None
    else:
        w = h_weights(pool, data, n, cfg.r_prime, decay)
    for size in range(1, k + 1):
        for tops in itertools.combinations(range(k), size):
            if not _antichain_ok(arr, tops):
                continue
            if kind == "f":
                low = float(min(a[list(tops)]))
                expo = cfg.r0
            else:
                low = _best_min_value(arr, w, list(tops), cfg.r_prime)
                expo = cfg.r_prime
            if low <= 0:
                continue
            m = _floor_log2(low)
            meas = sum(int(arr.length[t]) for t in tops)
            val = math.ldexp(1.0, m) * meas ** (1.0 / expo)
            if val > best:
                best, best_m, best_tops = val, m, tops
    cols = tuple(Column(pool[t], frozenset({pool[t]}), n) for t in best_tops)
    return EnergyResult(best, best_m, ColumnFamily(cols, n), kind, "exhaustive")


def energy(pool, data, n: int, cfg: ExponentConfig, mode: str = "greedy", decay: int = DEFAULT_DECAY) -> EnergyResult:
    """Energy of ``f`` (a signal) or ``h`` (a mapping keyed by rectangle).

    ``greedy`` maximises ``2^m (sum |I_top|)^(1/exponent)`` over the families
    extracted at every power-of-two threshold. ``exhaustive`` searches every
    mutually disjoint family; its columns report tops only.
    """
    pool = _as_pool(pool)
    if mode == "greedy":
        return _greedy_energy(pool, data, n, cfg, decay)
    if mode == "exhaustive":
        return _exhaustive_energy(pool, data, n, cfg, decay)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class EnergyBoundsReport:
    energy_f: float
    energy_h: float
    majorant_f: float
    majorant_h: float
    ratio_f: float
    ratio_h: float
    constant: float
    ok: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _ratio(a: float, b: float) -> float:
    if a == 0:
        return 0.0
    return a / b if b > 0 else math.inf


def energy_bounds_check(pool, f, h: Mapping, n: int, cfg: ExponentConfig, constant: float = 8.0,
                        decay: int = DEFAULT_DECAY) -> EnergyBoundsReport:
    """Compare both energies with ``||h||_{L^r'(l^r')}`` and ``log+(n) ||V^r0 f||_r0``."""
    pool = _as_pool(pool)
    f = as_signal(f)
    size = f.shape[0]
    ef = energy(pool, f, n, cfg, decay=decay).value
    eh = energy(pool, h, n, cfg, decay=decay).value
    rects = sorted({p.rect for p in pool}, key=lambda r: r.key)
    rows = [as_signal(h[R]) for R in rects if R in h]
    mh = mixed_norm(rows, cfg.r_prime, cfg.r_prime) if rows else 0.0
    bp = default_breakpoints(size, rects)
    mf = float(log_plus(n)) * norm_lp(variational_carleson(f, cfg.r0, bp), cfg.r0)
    rf, rh = _ratio(ef, mf), _ratio(eh, mh)
    ok = rf <= constant and rh <= constant
    return EnergyBoundsReport(ef, eh, mf, mh, rf, rh, constant, ok)


# ---------------------------------------------------------------------------
# shifted trilinear form


@dataclass
class _RectForm:
    """Small-tile values of one rectangle, summed in blocks of ``e(R)``."""

    small: np.ndarray  # value per small tile, indexed along [0, N)
    block: np.ndarray  # per super-tile position
    l2: np.ndarray
    hmax: np.ndarray


def _rect_form(R: FreqRectangle, g: np.ndarray, hR: Optional[np.ndarray], profile: BumpProfile) -> _RectForm:
    size = g.shape[0]
    r1, r2 = int(R.r1.length), int(R.r2.length)
    if r2 < r1:
        raise ValueError("shifted form needs |R2| >= |R1|; mirror the collection first")
    width = size // r2
    pg = np.abs(sharp_projection(g, R.r2)) ** 2
    l2 = np.sqrt(pg.reshape(r2, width).sum(axis=1))
    if hR is None:
        hmax = np.zeros(r2)
    else:
        hk = np.abs(convolve_with_bump(hR, R.r3_core(), profile))
        hmax = hk.reshape(r2, width).max(axis=1)
    small = math.sqrt(width) * l2 * hmax
    block = small.reshape(r1, r2 // r1).sum(axis=1)
    return _RectForm(small, block, l2, hmax)


def _rect_forms(rects, g, h: Mapping, profile: BumpProfile) -> dict:
    hm = _rect_key_map(h)
    return {R: _rect_form(R, g, hm.get(R), profile) for R in rects}


def shifted_form(pool, f, g, h: Mapping, n: int, cfg: ExponentConfig,
                 profile: Optional[BumpProfile] = None) -> float:
    """``sum_P avg_f(P) sum_{rho in S^n_P} |I_rho|^(1/2) ||pi g||_{L2(I_rho)} ||h * k||_{Linf(I_rho)}``."""
    pool = _as_pool(pool)
    if not pool:
        return 0.0
    f = as_signal(f)
    g = as_signal(g, f.shape[0])
    profile = profile or BumpProfile()
    avg = f_averages(pool, f, cfg.r0)
    forms = _rect_forms({p.rect for p in pool}, g, h, profile)
    terms = []
    for i, p in enumerate(pool):
        blk = forms[p.rect].block
        terms.append(avg[i] * blk[(p.time.index + n) % blk.shape[0]])
    return math.fsum(terms)


def shifted_form_by_tile(pool, f, g, h: Mapping, n: int, cfg: ExponentConfig,
                         profile: Optional[BumpProfile] = None) -> dict:
    pool = _as_pool(pool)
    if not pool:
        return {}
    profile = profile or BumpProfile()
    avg = f_averages(pool, f, cfg.r0)
    forms = _rect_forms({p.rect for p in pool}, as_signal(g), h, profile)
    out = {}
    for i, p in enumerate(pool):
        blk = forms[p.rect].block
        out[p] = float(avg[i] * blk[(p.time.index + n) % blk.shape[0]])
    return out


# ---------------------------------------------------------------------------
# column estimate


def kernel_envelope(size: int, core, width: int, decay: int, profile: BumpProfile) -> float:
    """Smallest ``A`` with ``|k(u)| <= A/w (1 + |u|/w)^-M`` for the bump kernel ``k``."""
    k = np.abs(bump_kernel(size, core, profile))
    u = np.arange(size)
    d = np.minimum(u, size - u).astype(np.float64)
    return float((k * width * (1.0 + d / width) ** decay).max())


def phi_mass(size: int, width: int, decay: int) -> float:
    return float(_phi_template(size, width, decay).sum() / width)


def _small_sum_constant(p: SuperTile, n: int, decay: int) -> float:
    size = p.size
    big = weight_phi((int(p.shifted(n).lo), int(p.shifted(n).hi)), decay, size)
    acc = np.zeros(size)
    for rho in small_tiles_of(p, n):
        acc += weight_phi((int(rho.time.lo), int(rho.time.hi)), decay, size)
    return float((acc / big).max())


def column_constant(p: SuperTile, n: int, r_prime: float, decay: int = DEFAULT_DECAY,
                    profile: Optional[BumpProfile] = None) -> float:
    """``C_c = A^r' C_Phi^(r'-1) C_sum`` for the bump-tail step of one tile.

    ``A`` is the kernel envelope at the small-tile scale, ``C_Phi`` the mass
    of the weight and ``C_sum`` the worst ratio of the summed small-tile
    weights to the weight of ``I_P^n``. All three are exact maxima.
    """
    profile = profile or BumpProfile()
    key = (p.rect, p.size, p.eccentricity_count, r_prime, decay, profile)
    if key not in _CONSTANT_CACHE:
        size = p.size
        width = size // int(p.rect.r2.length)
        A = kernel_envelope(size, p.rect.r3_core(), width, decay, profile)
        c_phi = phi_mass(size, width, decay)
        # translation invariant, so the unshifted tile stands in for every shift
        c_sum = _small_sum_constant(p, 0, decay)
        _CONSTANT_CACHE[key] = A ** r_prime * c_phi ** (r_prime - 1) * c_sum
    return _CONSTANT_CACHE[key]


_CONSTANT_CACHE: dict = {}


@dataclass
class ColumnBoundReport:
    lhs: float
    rhs: float
    step_a: list
    step_b_slack: float
    step_c: list
    constant_c: float
    holds: bool
    step_a_ok: bool
    step_b_ok: bool
    step_c_ok: bool
    g_term: float
    size_f: float
    size_h: float
    top_length: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def column_bound_check(col: Column, f, g, h: Mapping, cfg: ExponentConfig,
                       decay: int = DEFAULT_DECAY, profile: Optional[BumpProfile] = None,
                       rtol: float = 1e-12) -> ColumnBoundReport:
    """Evaluate the column estimate and each of its three inequalities.

    (a) per tile, ``sum_rho |I_rho|^(1-r/2) ||pi g||_2^r <= sum_{I_P^n} |pi g|^r``;
    (b) pointwise, ``sum_P |pi_{R2(P)} g|^r 1_{I_P^n} <= (V^r g)^r``;
    (c) per tile, ``sum_rho |I_rho| ||h * k||_inf^r' <= C_c sum_z |h|^r' Phi_{I_P^n}``
        with ``C_c = A^r' C_Phi^(r'-1) C_sum`` computed from the kernel.
    """
    f = as_signal(f)
    g = as_signal(g, f.shape[0])
    size = f.shape[0]
    profile = profile or BumpProfile()
    n = col.shift
    r, rp = cfg.r, cfg.r_prime
    members = col.sorted_members()
    forms = _rect_forms({p.rect for p in members}, g, h, profile)
    hm = _rect_key_map(h)
    lhs = shifted_form(members, f, g, h, n, cfg, profile)

    step_a = []
    a_ok = True
    acc = np.zeros(size)
    for p in members:
        iv = p.shifted(n)
        pg = np.abs(sharp_projection(g, p.rect.r2))
        width = size // int(p.rect.r2.length)
        l2 = forms[p.rect].l2
        first = int(iv.lo) // width
        e = p.eccentricity_count
        left = math.fsum(width ** (1 - r / 2) * float(l2[first + j]) ** r for j in range(e))
        seg = pg[int(iv.lo):int(iv.hi)] ** r
        right = math.fsum(seg.tolist())
        step_a.append((p.key, left, right))
        a_ok &= left <= right * (1 + rtol) + 1e-300
        acc[int(iv.lo):int(iv.hi)] += seg
    bp = default_breakpoints(size, [p.rect for p in members])
    vr = variational_carleson(g, r, bp) ** r
    slack = float((acc - vr).max()) if size else 0.0
    b_ok = bool(np.all(acc <= vr * (1 + rtol) + 1e-12 * max(1.0, float(vr.max()))))

    step_c = []
    c_ok = True
    cc = 0.0
    for p in members:
        width = size // int(p.rect.r2.length)
        cp = column_constant(p, n, rp, decay, profile)
        cc = max(cc, cp)
        iv = p.shifted(n)
        hmax = forms[p.rect].hmax
        first = int(iv.lo) // width
        left = math.fsum(width * float(hmax[first + j]) ** rp for j in range(p.eccentricity_count))
        if p.rect in hm:
            phi = weight_phi((int(iv.lo), int(iv.hi)), decay, size)
            right = float((np.abs(hm[p.rect]) ** rp * phi).sum())
        else:
            right = 0.0
        step_c.append((p.key, left, cp * right, cp))
        c_ok &= left <= cp * right * (1 + rtol) + 1e-300

    top_iv = col.top.shifted(n)
    g_term = float(vr[int(top_iv.lo):int(top_iv.hi)].mean()) ** (1.0 / r)
    sf = size_f(members, f, cfg)
    sh = size_h(members, h, n, cfg, decay)
    rhs = cc ** (1.0 / rp) * g_term * sf * sh * col.top.length
    holds = lhs <= rhs * (1 + 1e-10) + 1e-300
    return ColumnBoundReport(lhs, rhs, step_a, slack, step_c, cc, holds, a_ok, b_ok, c_ok,
                             g_term, sf, sh, col.top.length)


# ---------------------------------------------------------------------------
# mirror mode for low eccentricity


def mirror_rectangle(R: FreqRectangle) -> FreqRectangle:
    return FreqRectangle(R.r2, R.r1)


def mirror_collection(c) -> RectangleCollection:
    rects = c.rects if isinstance(c, RectangleCollection) else tuple(c)
    label = getattr(c, "label", "")
    return RectangleCollection(tuple(mirror_rectangle(R) for R in rects), label + "|mirrored",
                               getattr(c, "seed", None))


def mirror_data(f, g, h: Optional[Mapping] = None):
    """Swap ``f`` and ``g`` and re-key ``h`` to the mirrored rectangles."""
    hh = None if h is None else {mirror_rectangle(R): v for R, v in h.items()}
    return g, f, hh


# ---------------------------------------------------------------------------
# debug output


def family_svg(family: ColumnFamily, size: int, pool=None, scale: float = 4.0) -> str:
    """Time-frequency portrait: every pooled tile ``R1 x I`` outlined, tops filled."""
    half = size // 2
    w = h_ = size * scale
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h_:.0f}" viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white" stroke="black" stroke-width="0.2"/>',
    ]

    def box(p: SuperTile, fill: str, iv: DyadicInterval) -> str:
        y = half - int(p.rect.r1.hi)
        return (
            f'<rect x="{int(iv.lo)}" y="{y}" width="{int(iv.length)}" height="{int(p.rect.r1.length)}" '
            f'fill="{fill}" stroke="black" stroke-width="0.1" fill-opacity="0.4"/>'
        )

    for p in _as_pool(pool or family.tiles()):
        parts.append(box(p, "none", p.time))
    palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"]
    for k, col in enumerate(family.columns):
        colour = palette[k % len(palette)]
        for p in col.sorted_members():
            parts.append(box(p, colour, p.time))
        parts.append(box(col.top, colour, col.top.shifted(family.shift)))
    parts.append("</svg>")
    return "\n".join(parts)
