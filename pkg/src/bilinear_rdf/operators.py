"""Rectangular square functions, the trilinear forms and their dual data.

Every form has a time-side evaluator and a frequency-side evaluator; the
frequency side is the reference. Rectangles are always visited in key
order so floating-point accumulation is reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from .fourier import (
    BumpProfile,
    as_signal,
    dft,
    sharp_projection,
    smooth_multiplier,
    smooth_projection,
)
from .grid import FreqRectangle, Interval, RectangleCollection

VectorFunction = Mapping[FreqRectangle, np.ndarray]


@dataclass(frozen=True)
class ExponentConfig:
    """Exponents of the bilinear estimate.

    ``s`` is derived from ``1/p + 1/q = 1/s`` when omitted. ``r0`` defaults
    to the midpoint ``(r + 2)/2``.
    """

    r: float = 4.0
    r0: Optional[float] = None
    p: float = 3.0
    q: float = 3.0
    s: Optional[float] = None
    theta1: float = 0.5

    def __post_init__(self) -> None:
        if not self.r > 2:
            raise ValueError("r must exceed 2")
        if self.r0 is None:
            object.__setattr__(self, "r0", (self.r + 2.0) / 2.0)
        if not 2 < self.r0 < self.r:
            raise ValueError("r0 must lie in (2, r)")
        if self.s is None:
            object.__setattr__(self, "s", 1.0 / (1.0 / self.p + 1.0 / self.q))
        elif not math.isclose(1.0 / self.p + 1.0 / self.q, 1.0 / self.s, rel_tol=1e-12):
            raise ValueError("need 1/p + 1/q = 1/s")
        if not 0.0 <= self.theta1 <= 1.0:
            raise ValueError("theta1 must lie in [0, 1]")

    @property
    def theta2(self) -> float:
        return 1.0 - self.theta1

    @property
    def r_prime(self) -> float:
        return self.r / (self.r - 1.0)

    @property
    def sigma(self) -> float:
        return (self.r - self.r0) / self.r

    @property
    def gamma(self) -> float:
        return 2.0 ** (self.r0 / self.r_prime)

    def in_range(self) -> bool:
        rp = self.r_prime
        return (
            rp < self.p < self.r
            and rp < self.q < self.r
            and rp / 2 < self.s < self.r / 2
        )

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "r0": self.r0,
            "p": self.p,
            "q": self.q,
            "s": self.s,
            "theta1": self.theta1,
            "r_prime": self.r_prime,
            "sigma": self.sigma,
            "gamma": self.gamma,
        }


def _rects(c) -> list[FreqRectangle]:
    rects = c.rects if isinstance(c, RectangleCollection) else tuple(c)
    return sorted(rects, key=lambda r: r.key)


def _lr_aggregate(rows: Iterable[np.ndarray], r: float, size: int) -> np.ndarray:
    acc = np.zeros(size)
    if r == math.inf:
        for row in rows:
            np.maximum(acc, np.abs(row), out=acc)
        return acc
    for row in rows:
        acc += np.abs(row) ** r
    return acc ** (1.0 / r)


def _projection_cache(f, sides) -> dict:
    return {s: sharp_projection(f, s) for s in set(sides)}


def bilinear_projections(f, g, c) -> dict[FreqRectangle, np.ndarray]:
    """``pi_R(f, g)`` for every rectangle, sharing the one-sided projections."""
    rects = _rects(c)
    pf = _projection_cache(f, (R.r1 for R in rects))
    pg = _projection_cache(g, (R.r2 for R in rects))
    return {R: pf[R.r1] * pg[R.r2] for R in rects}


def square_function(f, g, c, r: float) -> np.ndarray:
    """``T^r(f, g) = (sum_R |pi_R(f, g)|^r)^(1/r)``; ``r = inf`` takes the sup."""
    f = as_signal(f)
    g = as_signal(g, f.shape[0])
    if not r > 1:
        raise ValueError("r must exceed 1")
    proj = bilinear_projections(f, g, c)
    return _lr_aggregate(proj.values(), r, f.shape[0])


def smooth_square_function(f, g, c, r: float, profile: Optional[BumpProfile] = None) -> np.ndarray:
    f = as_signal(f)
    g = as_signal(g, f.shape[0])
    profile = profile or BumpProfile()
    rects = _rects(c)
    pf = {s: smooth_projection(f, s, profile) for s in {R.r1 for R in rects}}
    pg = {s: smooth_projection(g, s, profile) for s in {R.r2 for R in rects}}
    return _lr_aggregate((pf[R.r1] * pg[R.r2] for R in rects), r, f.shape[0])


def _check_disjoint_intervals(intervals) -> list:
    ivs = sorted(intervals, key=lambda i: (i.lo, i.hi))
    for a, b in zip(ivs, ivs[1:]):
        if b.lo < a.hi:
            raise ValueError(f"overlapping intervals {a} and {b}")
    return ivs


def linear_rdf(f, intervals, r: float) -> np.ndarray:
    """``(sum_n |pi_{I_n} f|^r)^(1/r)`` over disjoint frequency intervals."""
    f = as_signal(f)
    ivs = _check_disjoint_intervals(list(intervals))
    return _lr_aggregate((sharp_projection(f, i) for i in ivs), r, f.shape[0])


def _check_aligned(h, rects) -> None:
    extra = set(h) - set(rects)
    if extra:
        raise ValueError(f"h has keys outside the collection: {sorted(extra, key=lambda r: r.key)[:3]}")


def trilinear_form(f, g, h: VectorFunction, c) -> complex:
    """Time side: ``sum_R sum_x pi_{R1} f(x) pi_{R2} g(x) h_R(x)``."""
    rects = _rects(c)
    _check_aligned(h, rects)
    proj = bilinear_projections(f, g, rects)
    total = 0j
    for R in rects:
        if R in h:
            total += complex(np.dot(proj[R], as_signal(h[R])))
    return total


def _freq_side(F: np.ndarray, G: np.ndarray, H: np.ndarray, w1: np.ndarray, w2: np.ndarray,
               xs: np.ndarray, es: np.ndarray, size: int) -> complex:
    # sum_{xi, eta} w1 F(xi) w2 G(eta) H(-xi-eta) / sqrt(N), centered arrays
    half = size // 2
    a = w1 * F[xs + half]
    b = w2 * G[es + half]
    zeta = (-(xs[:, None] + es[None, :]) + half) % size
    return complex(np.sum(a[:, None] * b[None, :] * H[zeta]) / math.sqrt(size))


def trilinear_form_frequency(f, g, h: VectorFunction, c) -> complex:
    """Frequency side: ``sum_R sum_{(xi,eta) in R} F(xi) G(eta) H_R(-xi-eta) / sqrt(N)``."""
    rects = _rects(c)
    _check_aligned(h, rects)
    F, G = dft(f).coeffs, dft(g).coeffs
    size = F.shape[0]
    total = 0j
    for R in rects:
        if R not in h:
            continue
        xs = np.arange(R.r1.lo, R.r1.hi)
        es = np.arange(R.r2.lo, R.r2.hi)
        H = dft(h[R]).coeffs
        total += _freq_side(F, G, H, np.ones(len(xs)), np.ones(len(es)), xs, es, size)
    return total


def dual_optimal_h(f, g, c, r: float, support=None) -> dict[FreqRectangle, np.ndarray]:
    """Extremal ``h`` for the pairing of ``T^r(f, g)`` with ``L^inf(l^{r'})``.

    Points where ``T^r`` vanishes get ``h = 0``.
    """
    f = as_signal(f)
    size = f.shape[0]
    proj = bilinear_projections(f, g, c)
    mask = np.ones(size) if support is None else np.asarray(support, dtype=np.float64)
    if r == math.inf:
        raise ValueError("dual data needs finite r")
    T = _lr_aggregate(proj.values(), r, size)
    denom = T ** (r - 1.0)
    safe = np.where(denom > 0, denom, 1.0)
    keep = (denom > 0) * mask
    out = {}
    for R, P in proj.items():
        mag = np.abs(P)
        with np.errstate(divide="ignore", invalid="ignore"):
            pw = np.where(mag > 0, mag ** (r - 2.0), 0.0)
        out[R] = keep * np.conj(P) * pw / safe
    return out


def smooth_bilinear_projection(f, g, R: FreqRectangle, profile: Optional[BumpProfile] = None) -> np.ndarray:
    profile = profile or BumpProfile()
    return smooth_projection(f, R.r1, profile) * smooth_projection(g, R.r2, profile)


def smooth_trilinear_form(f, g, h: VectorFunction, c, profile: Optional[BumpProfile] = None) -> complex:
    """Time side of the form with tensor bumps adapted to each rectangle."""
    profile = profile or BumpProfile()
    rects = _rects(c)
    _check_aligned(h, rects)
    total = 0j
    for R in rects:
        if R in h:
            total += complex(np.dot(smooth_bilinear_projection(f, g, R, profile), as_signal(h[R])))
    return total


def smooth_trilinear_form_frequency(f, g, h: VectorFunction, c, profile: Optional[BumpProfile] = None) -> complex:
    profile = profile or BumpProfile()
    rects = _rects(c)
    _check_aligned(h, rects)
    F, G = dft(f).coeffs, dft(g).coeffs
    size = F.shape[0]
    xi_c = np.arange(-size // 2, size // 2)
    total = 0j
    for R in rects:
        if R not in h:
            continue
        m1 = np.fft.fftshift(smooth_multiplier(size, R.r1, profile))
        m2 = np.fft.fftshift(smooth_multiplier(size, R.r2, profile))
        s1, s2 = m1 > 0, m2 > 0
        H = dft(h[R]).coeffs
        total += _freq_side(F, G, H, m1[s1], m2[s2], xi_c[s1], xi_c[s2], size)
    return total


def doubled_collection(c) -> list[tuple[Interval, Interval]]:
    """Concentric doubles of the rectangles, as plain frequency intervals."""
    out = []
    for R in _rects(c):
        a, b = R.r1.as_interval().dilate(2), R.r2.as_interval().dilate(2)
        out.append((a, b))
    return out


def doubled_square_function(f, g, c, r: float) -> np.ndarray:
    """``T^r`` over the sharp doubled rectangles (they may overlap)."""
    f = as_signal(f)
    g = as_signal(g, f.shape[0])
    rows = []
    for a, b in doubled_collection(c):
        ia = (int(a.lo), int(a.hi))
        ib = (int(b.lo), int(b.hi))
        rows.append(sharp_projection(f, ia) * sharp_projection(g, ib))
    return _lr_aggregate(rows, r, f.shape[0])


def spectral_dilation(f) -> np.ndarray:
    """Lift ``f`` on ``Z_N`` to ``Z_2N`` with spectrum moved to ``2 xi``.

    This is the periodic extension, so ``||f_2||_p = 2^(1/p) ||f||_p`` and
    ``pi_{2I} f_2`` is the extension of ``pi_I f``.
    """
    f = as_signal(f)
    return np.concatenate([f, f])


def dilate_rectangle(R: FreqRectangle) -> FreqRectangle:
    from .grid import DyadicInterval

    return FreqRectangle(
        DyadicInterval(R.r1.scale + 1, R.r1.index), DyadicInterval(R.r2.scale + 1, R.r2.index)
    )


def holder_bound(f, g, h: VectorFunction, c, r: float, s: float) -> tuple[float, float]:
    """``(|Lambda|, ||T^r||_s ||h||_{L^{s'}(l^{r'})})`` for ``s >= 1``."""
    from .maximal import mixed_norm, norm_lp

    if s < 1:
        raise ValueError("Holder pairing needs s >= 1")
    lam = abs(trilinear_form(f, g, h, c))
    rp = r / (r - 1.0) if r != math.inf else 1.0
    sp = math.inf if s == 1 else s / (s - 1.0)
    rects = _rects(c)
    rows = [h[R] for R in rects if R in h]
    hn = mixed_norm(rows, sp, rp) if rows else 0.0
    return lam, norm_lp(square_function(f, g, c, r), s) * hn
