"""Discrete geometry on the cyclic lattice Z_N.

Time intervals are half-open integer ranges in [0, N). Frequency intervals
live in the centered range [-N/2, N/2). The rational shifted grids D1, D2
(endpoints in thirds) are only used by the separation and covering helpers,
which work on exact ``Fraction`` coordinates.
"""
from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

LOGGER = logging.getLogger(__name__)

Number = Union[int, Fraction]

GRIDS = ("D0", "D1", "D2")


@dataclass(frozen=True)
class GridConfig:
    """Ambient lattice parameters.

    Parameters
    ----------
    log_size : int
        ``L`` with ``N = 2**L``; must be at least 3.
    freq_box_radius : int, optional
        Rectangles live in ``[-radius, radius)**2``. Defaults to ``N // 8``.
    phi_decay : int
        Decay power ``M`` of the time weight; at least 4.
    bump_profile : str
        Identifier of the fixed smooth bump.
    """

    log_size: int = 10
    freq_box_radius: Optional[int] = None
    phi_decay: int = 10
    bump_profile: str = "exp-transition"

    def __post_init__(self) -> None:
        if self.log_size < 3:
            raise ValueError("log_size must be >= 3")
        if self.freq_box_radius is None:
            object.__setattr__(self, "freq_box_radius", self.size // 8)
        if not 1 <= self.freq_box_radius <= self.size // 8:
            raise ValueError("freq_box_radius must lie in [1, N/8]")
        if self.phi_decay < 4:
            raise ValueError("phi_decay must be >= 4")

    @property
    def size(self) -> int:
        return 1 << self.log_size

    @property
    def radius(self) -> int:
        return int(self.freq_box_radius)


@dataclass(frozen=True, order=True)
class Interval:
    """Half-open interval ``[lo, hi)`` with integer or rational endpoints."""

    lo: Number
    hi: Number

    def __post_init__(self) -> None:
        if self.hi < self.lo:
            raise ValueError(f"empty orientation: {self.lo} > {self.hi}")

    @property
    def length(self) -> Number:
        return self.hi - self.lo

    @property
    def center(self) -> Fraction:
        return Fraction(self.lo + self.hi, 2)

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo < other.hi and other.lo < self.hi

    def dilate(self, k: Number) -> "Interval":
        c = self.center
        half = Fraction(self.length) * Fraction(k) / 2
        return Interval(c - half, c + half)

    def as_interval(self) -> "Interval":
        return self


def _grid_shift(scale: int, grid: str) -> Fraction:
    if grid == "D0":
        return Fraction(0)
    sign = 1 if scale % 2 == 0 else -1
    if grid == "D2":
        sign = -sign
    return Fraction(2) ** scale * Fraction(sign, 3)


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """``[2^k m + shift, 2^k (m+1) + shift)`` in grid D0, D1 or D2.

    D0 has no shift. D1 is shifted by ``2^k (-1)^k / 3`` and D2 by the
    opposite amount.
    """

    scale: int
    index: int
    grid: str = "D0"

    def __post_init__(self) -> None:
        if self.grid not in GRIDS:
            raise ValueError(f"unknown grid {self.grid!r}")

    @property
    def length(self) -> Number:
        return 1 << self.scale if self.scale >= 0 else Fraction(1, 1 << -self.scale)

    @property
    def lo(self) -> Number:
        base = self.length * self.index
        if self.grid == "D0":
            return base
        return base + _grid_shift(self.scale, self.grid)

    @property
    def hi(self) -> Number:
        return self.lo + self.length

    def as_interval(self) -> Interval:
        return Interval(self.lo, self.hi)

    def contains(self, other) -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other) -> bool:
        return self.lo < other.hi and other.lo < self.hi

    def parent(self) -> "DyadicInterval":
        if self.grid != "D0":
            raise NotImplementedError("parent only defined on D0")
        return DyadicInterval(self.scale + 1, self.index >> 1)

    def children(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        if self.grid != "D0" or self.scale == 0:
            raise ValueError("cannot bisect")
        return (
            DyadicInterval(self.scale - 1, 2 * self.index),
            DyadicInterval(self.scale - 1, 2 * self.index + 1),
        )

    def to_dict(self) -> dict:
        d = {"scale": self.scale, "index": self.index}
        if self.grid != "D0":
            d["grid"] = self.grid
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DyadicInterval":
        return cls(int(d["scale"]), int(d["index"]), d.get("grid", "D0"))


def dyadic_from_bounds(lo: int, hi: int) -> DyadicInterval:
    """Return the D0 interval ``[lo, hi)``; raise if it is not dyadic."""
    length = hi - lo
    if length <= 0 or length & (length - 1) or lo % length:
        raise ValueError(f"[{lo}, {hi}) is not a dyadic interval")
    return DyadicInterval(length.bit_length() - 1, lo // length)


@dataclass(frozen=True, order=True)
class FreqRectangle:
    r1: DyadicInterval
    r2: DyadicInterval

    @property
    def key(self) -> tuple:
        return (self.r1.scale, self.r1.index, self.r2.scale, self.r2.index)

    @property
    def area(self) -> int:
        return self.r1.length * self.r2.length

    def r3_core(self) -> Interval:
        """Half-open integer range of length ``|R1|+|R2|`` holding ``-R1 - R2``.

        The integer sums ``-(xi + eta)`` fill ``[-b1-b2+2, -a1-a2+1)``; the
        core is padded by one cell on the left so its length is exact.
        """
        return Interval(-self.r1.hi - self.r2.hi + 1, -self.r1.lo - self.r2.lo + 1)

    def r3(self) -> Interval:
        """``R3 = 2(-R1 - R2)``, the concentric double of ``-R1 - R2``."""
        return self.r3_core().dilate(2)

    def to_dict(self) -> dict:
        return {"r1": self.r1.to_dict(), "r2": self.r2.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "FreqRectangle":
        return cls(DyadicInterval.from_dict(d["r1"]), DyadicInterval.from_dict(d["r2"]))

    @classmethod
    def from_bounds(cls, a1: int, b1: int, a2: int, b2: int) -> "FreqRectangle":
        return cls(dyadic_from_bounds(a1, b1), dyadic_from_bounds(a2, b2))


@dataclass(frozen=True)
class RationalRect:
    """Axis-parallel rectangle with arbitrary (rational) endpoints."""

    r1: Interval
    r2: Interval

    def dilate(self, k: Number) -> "RationalRect":
        return RationalRect(self.r1.dilate(k), self.r2.dilate(k))

    def contains(self, other) -> bool:
        return _side_contains(self.r1, other.r1) and _side_contains(self.r2, other.r2)


@dataclass(frozen=True)
class RectangleCollection:
    rects: tuple[FreqRectangle, ...]
    label: str = ""
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "rects", tuple(self.rects))

    def __len__(self) -> int:
        return len(self.rects)

    def __iter__(self):
        return iter(self.rects)

    def sorted(self) -> tuple[FreqRectangle, ...]:
        return tuple(sorted(self.rects, key=lambda r: r.key))

    def to_json_obj(self) -> dict:
        return {
            "label": self.label,
            "seed": self.seed,
            "rects": [r.to_dict() for r in self.rects],
        }

    @classmethod
    def from_json_obj(cls, obj) -> "RectangleCollection":
        if isinstance(obj, list):
            return cls(tuple(FreqRectangle.from_dict(d) for d in obj))
        return cls(
            tuple(FreqRectangle.from_dict(d) for d in obj["rects"]),
            obj.get("label", ""),
            obj.get("seed"),
        )


def _side_contains(a, b) -> bool:
    return a.lo <= b.lo and b.hi <= a.hi


def _rects_intersect(a, b) -> bool:
    return a.r1.intersects(b.r1) and a.r2.intersects(b.r2)


# ---------------------------------------------------------------------------
# basic operations


def shift_interval(i, n: int, size: int):
    """Translate ``i`` by ``n`` times its length, periodically mod ``size``.

    Accepts a D0 ``DyadicInterval`` (returned as such) or an integer
    ``Interval`` lying in ``[0, size)``. A shifted plain interval may wrap
    around; it is returned with ``lo`` in ``[0, size)`` and ``hi`` possibly
    exceeding ``size``.
    """
    if isinstance(i, DyadicInterval):
        if i.grid != "D0":
            raise ValueError("only D0 intervals can be shifted on Z_N")
        count = size >> i.scale
        return DyadicInterval(i.scale, (i.index + n) % count)
    length = i.hi - i.lo
    lo = (i.lo + n * length) % size
    return Interval(lo, lo + length)


def eccentricity(r: FreqRectangle) -> Fraction:
    return Fraction(r.r2.length, r.r1.length)


def split_by_eccentricity(
    c: RectangleCollection,
) -> tuple[RectangleCollection, RectangleCollection]:
    high = tuple(r for r in c.rects if eccentricity(r) > 1)
    low = tuple(r for r in c.rects if eccentricity(r) <= 1)
    return (
        RectangleCollection(high, c.label + "|high", c.seed),
        RectangleCollection(low, c.label + "|low", c.seed),
    )


def validate_disjoint(c) -> tuple[bool, Optional[tuple]]:
    """Check pairwise disjointness; return ``(ok, witness_pair_or_None)``.

    Sweeps over the first side so the typical cost is far below quadratic.
    """
    rects = list(c.rects if isinstance(c, RectangleCollection) else c)
    order = sorted(range(len(rects)), key=lambda k: rects[k].r1.lo)
    active: list[int] = []
    for k in order:
        r = rects[k]
        active = [a for a in active if rects[a].r1.hi > r.r1.lo]
        for a in active:
            if _rects_intersect(rects[a], r):
                return False, (rects[a], r)
        active.append(k)
    return True, None


def k_separation_check(c, k: Number) -> bool:
    """True iff the concentric ``k``-dilates are pairwise disjoint."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rects = list(c.rects if isinstance(c, RectangleCollection) else c)
    dil = [
        RationalRect(Interval(r.r1.lo, r.r1.hi).dilate(k), Interval(r.r2.lo, r.r2.hi).dilate(k))
        for r in rects
    ]
    ok, _ = validate_disjoint(dil)
    return ok


# ---------------------------------------------------------------------------
# generators


def _check_box(r: FreqRectangle, radius: int) -> None:
    for side in (r.r1, r.r2):
        if side.lo < -radius or side.hi > radius:
            raise ValueError(f"rectangle {r} leaves the box [-{radius},{radius})^2")


def _parse_side(v) -> DyadicInterval:
    if isinstance(v, DyadicInterval):
        return v
    if isinstance(v, dict):
        return DyadicInterval.from_dict(v)
    lo, hi = v
    return dyadic_from_bounds(int(lo), int(hi))


def generate_collection(
    mode: str,
    seed: int,
    cfg: GridConfig,
    params: Optional[dict] = None,
) -> RectangleCollection:
    """Build a disjoint dyadic collection inside the frequency box.

    Modes
    -----
    single : ``params["r1"]``, ``params["r2"]`` as ``(lo, hi)`` or dicts.
    unit-grid : unit squares filling ``params["lo"], params["hi"]`` (default whole box).
    recursive-bisection : random dyadic splits of the box, ``params["depth"]``
        (default 5) and ``params["stop_prob"]`` (default 0.3).
    strip-like : tiling by rectangles of shape ``2^w x 2^h`` with
        ``params["width_scale"]``, ``params["height_scale"]``, thinned with
        probability ``params.get("keep", 1.0)``.
    stacked : the second axis is cut into random dyadic blocks
        (``params["depth"]``, default 4, ``params["stop_prob"]``, default 0.4);
        each block gets one first side no longer than itself, so every
        rectangle has ``|R2| >= |R1|``.
    """
    params = dict(params or {})
    radius = cfg.radius
    rng = random.Random(seed)
    rects: list[FreqRectangle]
    if mode == "single":
        if "r1" not in params or "r2" not in params:
            raise ValueError("single mode needs r1 and r2")
        rects = [FreqRectangle(_parse_side(params["r1"]), _parse_side(params["r2"]))]
    elif mode == "unit-grid":
        lo = int(params.get("lo", -radius))
        hi = int(params.get("hi", radius))
        if lo >= hi:
            raise ValueError("unit-grid needs lo < hi")
        rects = [
            FreqRectangle(DyadicInterval(0, a), DyadicInterval(0, b))
            for a in range(lo, hi)
            for b in range(lo, hi)
        ]
    elif mode == "recursive-bisection":
        depth = int(params.get("depth", 5))
        stop = float(params.get("stop_prob", 0.3))
        if depth < 0 or not 0.0 <= stop <= 1.0:
            raise ValueError("bad recursive-bisection params")
        if radius & (radius - 1):
            raise ValueError("recursive-bisection needs a power-of-two radius")
        k = radius.bit_length() - 1
        roots = [
            FreqRectangle(DyadicInterval(k, a), DyadicInterval(k, b))
            for a in (-1, 0)
            for b in (-1, 0)
        ]
        rects = []
        stack = [(r, 0) for r in roots]
        while stack:
            r, d = stack.pop()
            can1, can2 = r.r1.scale > 0, r.r2.scale > 0
            if d >= depth or not (can1 or can2) or rng.random() < stop:
                rects.append(r)
                continue
            if can1 and (not can2 or rng.random() < 0.5):
                stack.extend((FreqRectangle(ch, r.r2), d + 1) for ch in r.r1.children())
            else:
                stack.extend((FreqRectangle(r.r1, ch), d + 1) for ch in r.r2.children())
    elif mode == "strip-like":
        w = int(params.get("width_scale", 0))
        h = int(params.get("height_scale", 3))
        keep = float(params.get("keep", 1.0))
        if w < 0 or h < 0 or (1 << max(w, h)) > radius:
            raise ValueError("bad strip-like scales")
        rects = [
            FreqRectangle(DyadicInterval(w, a), DyadicInterval(h, b))
            for a in range(-radius >> w, radius >> w)
            for b in range(-radius >> h, radius >> h)
            if keep >= 1.0 or rng.random() < keep
        ]
    elif mode == "stacked":
        depth = int(params.get("depth", 4))
        stop = float(params.get("stop_prob", 0.4))
        if radius & (radius - 1):
            raise ValueError("stacked mode needs a power-of-two radius")
        k = radius.bit_length() - 1
        blocks = []
        stack = [(DyadicInterval(k, -1), 0), (DyadicInterval(k, 0), 0)]
        while stack:
            b, d = stack.pop()
            if d >= depth or b.scale == 0 or (d > 0 and rng.random() < stop):
                blocks.append(b)
            else:
                stack.extend((ch, d + 1) for ch in b.children())
        rects = []
        for b in blocks:
            s1 = rng.randint(0, b.scale)
            count = (2 * radius) >> s1
            idx = rng.randrange(count) - count // 2
            rects.append(FreqRectangle(DyadicInterval(s1, idx), b))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    for r in rects:
        _check_box(r, radius)
    rects.sort(key=lambda r: r.key)
    out = RectangleCollection(tuple(rects), f"{mode}:seed={seed}", seed)
    ok, witness = validate_disjoint(out)
    if not ok:
        raise ValueError(f"generated collection overlaps: {witness}")
    return out


# ---------------------------------------------------------------------------
# shifted grids and Whitney pieces


def _cover_candidates(side: Interval, max_ratio: int):
    length = Fraction(side.length)
    if length <= 0:
        raise ValueError("degenerate side")
    k = math.floor(math.log2(length)) - 1
    while Fraction(2) ** k < length:
        k += 1
    while Fraction(2) ** k <= max_ratio * length:
        step = Fraction(2) ** k
        for grid in GRIDS:
            m = math.floor((Fraction(side.lo) - _grid_shift(k, grid)) / step)
            cand = DyadicInterval(k, m, grid)
            if _side_contains(cand, side):
                yield cand
        k += 1


def _dilation_factor(side: Interval, cover: DyadicInterval) -> Fraction:
    """Smallest ``K`` with ``cover`` inside the concentric ``K``-dilate of ``side``."""
    c = side.center
    reach = max(c - Fraction(cover.lo), Fraction(cover.hi) - c)
    return 2 * reach / Fraction(side.length)


def _best_covering_side(side: Interval) -> tuple[DyadicInterval, Fraction]:
    best = None
    for cand in _cover_candidates(side, 6):
        fac = _dilation_factor(side, cand)
        if best is None or fac < best[1]:
            best = (cand, fac)
        if fac <= 3:
            return cand, fac
    # some grid always holds a cover of length at most 6|I|
    assert best is not None, f"no shifted-dyadic cover for {side}"
    return best


@dataclass(frozen=True)
class Covering:
    """Shifted-dyadic cover of a rectangle.

    ``factor`` is the smallest ``K`` with ``cover`` inside ``K R``;
    ``within_triple`` reports whether ``K <= 3``.
    """

    r1: DyadicInterval
    r2: DyadicInterval
    grids: tuple[str, str]
    factor: Fraction

    @property
    def within_triple(self) -> bool:
        return self.factor <= 3


def covering_dyadic_rectangle(r) -> Covering:
    """Find ``R~`` in one of the nine product grids with ``R <= R~``, preferring ``R~ <= 3R``.

    The triple dilate is reached whenever some grid allows it; otherwise the
    cover with the smallest dilation factor is returned.
    """
    s1, k1 = _best_covering_side(Interval(Fraction(r.r1.lo), Fraction(r.r1.hi)))
    s2, k2 = _best_covering_side(Interval(Fraction(r.r2.lo), Fraction(r.r2.hi)))
    return Covering(s1, s2, (s1.grid, s2.grid), max(k1, k2))


@dataclass(frozen=True)
class WhitneyFamily:
    """Whitney pieces of ``[-1/2, 1/2]`` grouped by level.

    ``levels[j]`` holds the intervals of level ``j``; every piece at level ``j``
    has length ``2^-(j+6)``. ``delta`` and ``delta_constant`` satisfy
    ``|I| <= delta_constant * delta**j``. ``coefficients[j]`` is the sup of the
    cutoff ``chi(2x)`` over the 4/3-enlarged pieces of level ``j``, and
    ``coefficients[j] <= gamma_constant * gamma**j``.
    """

    levels: tuple[tuple[Interval, ...], ...]
    delta: float
    delta_constant: float
    coefficients: tuple[float, ...] = field(default=())
    gamma: float = float("nan")
    gamma_constant: float = float("nan")

    @property
    def intervals(self) -> tuple[Interval, ...]:
        return tuple(itertools.chain.from_iterable(self.levels))

    def product(self) -> dict[tuple[int, int], list[RationalRect]]:
        return {
            (j, k): [RationalRect(a, b) for a in self.levels[j] for b in self.levels[k]]
            for j in range(len(self.levels))
            for k in range(len(self.levels))
        }


WHITNEY_PIECES = 16


def whitney_decomposition(depth: int = 8, sharpness: float = 1.0) -> WhitneyFamily:
    """Bisect toward the endpoints of ``[-1/2, 1/2]``.

    Level ``j`` covers the two annuli ``1/2 - 2^-(j+1) <= |x| < 1/2 - 2^-(j+2)``,
    each cut into 16 equal pieces so that ``16 I`` stays inside the interval.
    Truncating at ``depth`` leaves ``2^-depth`` of uncovered length.
    """
    from .fourier import BumpProfile

    if depth < 1:
        raise ValueError("depth must be >= 1")
    half = Fraction(1, 2)
    levels = []
    for j in range(depth):
        a = half - Fraction(1, 2 ** (j + 1))
        b = half - Fraction(1, 2 ** (j + 2))
        step = (b - a) / WHITNEY_PIECES
        pieces = []
        for t in range(WHITNEY_PIECES):
            lo, hi = a + t * step, a + (t + 1) * step
            pieces.append(Interval(-hi, -lo))
            pieces.append(Interval(lo, hi))
        pieces.sort()
        levels.append(tuple(pieces))
    lengths = [float(lv[0].length) for lv in levels]
    # lengths halve per level exactly
    delta = 0.5
    const = max(l / delta**j for j, l in enumerate(lengths))

    bump = BumpProfile(sharpness)
    coeffs = []
    for lv in levels:
        worst = 0.0
        for piece in lv:
            e = piece.dilate(Fraction(4, 3))
            # cutoff chi(2x) is even and decreasing in |x|; the sup sits at the point nearest 0
            near = 0.0 if e.lo <= 0 <= e.hi else float(min(abs(e.lo), abs(e.hi)))
            worst = max(worst, float(bump.evaluate(2.0 * near)))
        coeffs.append(worst)
    # the first levels sit where the cutoff is flat, so the rate is read off
    # from level 2 on and the early levels go into the constant
    ratios = [c ** (1.0 / j) for j, c in enumerate(coeffs) if j >= 2]
    gamma = max(ratios) if ratios else 1.0
    gamma_const = max(c / gamma**j for j, c in enumerate(coeffs)) if gamma > 0 else float("inf")
    LOGGER.debug("whitney depth=%d delta=%.3f gamma=%.4f", depth, delta, gamma)
    return WhitneyFamily(tuple(levels), delta, const, tuple(coeffs), gamma, gamma_const)


def whitney_subcollection(
    rects: Sequence, family: WhitneyFamily, j: int, k: int, a: int = 0, b: int = 0
) -> list[RationalRect]:
    """For each rectangle, the affine image of the 4/3-enlarged Whitney piece.

    ``a`` and ``b`` pick which piece of levels ``j`` and ``k`` is used, so the
    result has one rectangle per input rectangle.
    """
    p1 = family.levels[j][a].dilate(Fraction(4, 3))
    p2 = family.levels[k][b].dilate(Fraction(4, 3))
    out = []
    for r in rects:
        out.append(RationalRect(_affine_side(r.r1, p1), _affine_side(r.r2, p2)))
    return out


def _affine_side(side, piece: Interval) -> Interval:
    c = Fraction(side.lo + side.hi, 2)
    L = Fraction(side.hi - side.lo)
    return Interval(c + L * piece.lo, c + L * piece.hi)


def random_rational_rect(rng: random.Random, denom: int = 60) -> RationalRect:
    sides = []
    for _ in range(2):
        lo = Fraction(rng.randint(-10 * denom, 10 * denom), denom)
        length = Fraction(rng.randint(1, 4 * denom), denom)
        sides.append(Interval(lo, lo + length))
    return RationalRect(*sides)


def iter_time_dyadic(size: int, min_scale: int = 0) -> Iterable[DyadicInterval]:
    """All D0 intervals inside ``[0, size)`` with scale at least ``min_scale``."""
    top = size.bit_length() - 1
    for k in range(min_scale, top + 1):
        for m in range(size >> k):
            yield DyadicInterval(k, m)
