"""Maximal and variational operators, plus Lebesgue and mixed norms."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .fourier import as_signal, frequencies

LOGGER = logging.getLogger(__name__)

FULL_BREAKPOINT_LIMIT = 512


@dataclass(frozen=True)
class BreakpointSet:
    """Strictly increasing truncation points inside ``[-N/2, N/2]``.

    Both extremes are always present so the leftmost partial sum is 0 and
    the rightmost is the full signal.
    """

    points: tuple[int, ...]
    size: int

    def __post_init__(self) -> None:
        pts = tuple(int(p) for p in self.points)
        half = self.size // 2
        if not pts or pts[0] != -half or pts[-1] != half:
            raise ValueError("breakpoints must contain both extremes")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def build(cls, size: int, points: Iterable[int]) -> "BreakpointSet":
        half = size // 2
        pts = {int(p) for p in points if -half <= int(p) <= half}
        pts.update((-half, half))
        return cls(tuple(sorted(pts)), size)


def full_breakpoints(size: int) -> BreakpointSet:
    return BreakpointSet(tuple(range(-size // 2, size // 2 + 1)), size)


def default_breakpoints(size: int, rects: Optional[Iterable] = None) -> BreakpointSet:
    """All points for small ``N``; otherwise a coarse dyadic lattice plus rectangle ends.

    For ``N > 512`` the dyadic endpoints are taken at the finest scale that
    keeps at most 512 of them, and every endpoint of every rectangle side
    is added.
    """
    if size <= FULL_BREAKPOINT_LIMIT:
        return full_breakpoints(size)
    step = size // FULL_BREAKPOINT_LIMIT
    pts = set(range(-size // 2, size // 2 + 1, step))
    for r in rects or ():
        for side in (r.r1, r.r2):
            pts.update((int(side.lo), int(side.hi)))
    return BreakpointSet.build(size, pts)


def partial_sums(f, points: Sequence[int]) -> np.ndarray:
    """``S_b(x) = sum_{xi < b} F(xi) e^{2 pi i xi x/N} / sqrt(N)``, one row per ``b``."""
    f = as_signal(f)
    size = f.shape[0]
    spec = np.fft.fft(f)
    xi = frequencies(size)
    pts = np.asarray(points, dtype=np.int64)
    masks = xi[None, :] < pts[:, None]
    return np.fft.ifft(spec[None, :] * masks, axis=1)


def carleson(f) -> np.ndarray:
    """Maximum over all ``N + 1`` half-line truncations of the Fourier sum."""
    f = as_signal(f)
    size = f.shape[0]
    out = np.zeros(size)
    # chunk the truncation points to bound memory at large N
    pts = np.arange(-size // 2, size // 2 + 1)
    for chunk in np.array_split(pts, max(1, len(pts) // 256)):
        out = np.maximum(out, np.abs(partial_sums(f, chunk)).max(axis=0))
    return out


def _variation_dp(S: np.ndarray, r: float) -> np.ndarray:
    """Best chain value ``max sum |S_{i_{k+1}} - S_{i_k}|^r`` for every column."""
    B = S.shape[0]
    V = np.zeros(S.shape, dtype=np.float64)
    for j in range(1, B):
        V[j] = (V[:j] + np.abs(S[j] - S[:j]) ** r).max(axis=0)
    return V.max(axis=0)


def variational_carleson(
    g, r: float, bp: Optional[BreakpointSet] = None, chunk: int = 256
) -> np.ndarray:
    """r-variation of the partial Fourier sums along the breakpoints.

    Exact dynamic program over increasing chains of breakpoints, columns
    processed in blocks of ``chunk`` points.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    g = as_signal(g)
    size = g.shape[0]
    bp = bp or default_breakpoints(size)
    if bp.size != size:
        raise ValueError("breakpoint set built for another N")
    S = partial_sums(g, bp.points)
    out = np.empty(size)
    for start in range(0, size, chunk):
        out[start : start + chunk] = _variation_dp(S[:, start : start + chunk], r)
    return out ** (1.0 / r)


def variational_carleson_exhaustive(g, r: float, bp: Optional[BreakpointSet] = None) -> np.ndarray:
    """Brute force over every subset of breakpoints; only for tiny ``N``."""
    g = as_signal(g)
    size = g.shape[0]
    bp = bp or full_breakpoints(size)
    if len(bp) > 16:
        raise ValueError("exhaustive variation limited to 16 breakpoints")
    S = partial_sums(g, bp.points)
    best = np.zeros(size)
    idx = range(len(bp))
    for k in range(2, len(bp) + 1):
        for chain in itertools.combinations(idx, k):
            tot = sum(np.abs(S[b] - S[a]) ** r for a, b in zip(chain, chain[1:]))
            best = np.maximum(best, tot)
    return best ** (1.0 / r)


def shifted_maximal(f, m: int) -> np.ndarray:
    """``M^m f(x) = max_{I dyadic, x in I} |I|^-1 sum_{y in I^m} |f(y)|``."""
    a = np.abs(as_signal(f))
    size = a.shape[0]
    out = np.zeros(size)
    k = 0
    while (1 << k) <= size:
        width = 1 << k
        blocks = a.reshape(-1, width).sum(axis=1) / width
        shifted = np.roll(blocks, -m)
        out = np.maximum(out, np.repeat(shifted, width))
        k += 1
    return out


def log_plus(x) -> np.ndarray | float:
    return np.log2(2.0 + np.abs(x))


def norm_lp(f, p: float) -> float:
    a = np.abs(np.asarray(f))
    if p == math.inf:
        return float(a.max(initial=0.0))
    if p < 1:
        raise ValueError("p must be >= 1")
    return float((a**p).sum() ** (1.0 / p))


def mixed_norm(h, outer: float, inner: float) -> float:
    """``(sum_x (sum_R |h_R(x)|^inner)^(outer/inner))^(1/outer)``.

    ``h`` is a mapping or a sequence of signals, or a 2-D array with one
    row per family member.
    """
    if isinstance(h, dict):
        h = list(h.values())
    arr = np.abs(np.asarray(h))
    if arr.size == 0 or arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("empty family")
    if inner < 1 or outer < 1:
        raise ValueError("exponents must be >= 1")
    if inner == math.inf:
        pointwise = arr.max(axis=0)
    else:
        pointwise = (arr**inner).sum(axis=0) ** (1.0 / inner)
    return norm_lp(pointwise, outer)


def weak_type_constant(f, m: int, levels: Sequence[float]) -> float:
    """Largest ``lambda |{M^m f > lambda}| / (log+(m) ||f||_1)`` over ``levels``."""
    Mf = shifted_maximal(f, m)
    l1 = norm_lp(f, 1)
    if l1 == 0:
        return 0.0
    worst = 0.0
    for lam in levels:
        worst = max(worst, lam * float((Mf > lam).sum()) / (float(log_plus(m)) * l1))
    return worst
