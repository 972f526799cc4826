"""Unitary DFT on Z_N, frequency projections and the time weight.

Convention: ``F(xi) = N^-1/2 sum_x f(x) exp(-2 pi i xi x / N)`` with ``xi``
read in the centered range ``[-N/2, N/2)``. Internally arrays are kept in
numpy's FFT order; ``Spectrum`` exposes the centered view.

A half-open integer frequency interval ``[lo, hi)`` is the set of cells
``lo, ..., hi-1``. Smooth multipliers sample the rescaled bump at cell
midpoints ``xi + 1/2``, so the core is exactly ``{lo, ..., hi-1}`` and the
support sits inside the doubled interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import DyadicInterval, FreqRectangle, GridConfig, Interval


def as_signal(f, size: int | None = None) -> np.ndarray:
    arr = np.asarray(f, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    if size is not None and arr.shape[0] != size:
        raise ValueError(f"length mismatch: got {arr.shape[0]}, expected {size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal has non-finite entries")
    return arr


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients in centered order: ``coeffs[k]`` is ``xi = k - N/2``."""

    coeffs: np.ndarray

    @property
    def size(self) -> int:
        return self.coeffs.shape[0]

    def at(self, xi: int) -> complex:
        return complex(self.coeffs[xi + self.size // 2])

    def fft_order(self) -> np.ndarray:
        return np.fft.ifftshift(self.coeffs)


def dft(f) -> Spectrum:
    return Spectrum(np.fft.fftshift(np.fft.fft(as_signal(f), norm="ortho")))


def idft(spec) -> np.ndarray:
    coeffs = spec.coeffs if isinstance(spec, Spectrum) else np.asarray(spec, dtype=np.complex128)
    return np.fft.ifft(np.fft.ifftshift(coeffs), norm="ortho")


@lru_cache(maxsize=64)
def _freqs(size: int) -> np.ndarray:
    out = np.fft.fftfreq(size, d=1.0 / size).astype(np.int64)
    out.setflags(write=False)
    return out


def frequencies(size: int) -> np.ndarray:
    """Centered integer frequency of each FFT-order slot."""
    return _freqs(size)


def _bounds(i) -> tuple:
    if i is None:
        return (0, 0)
    if isinstance(i, tuple):
        return i
    return (i.lo, i.hi)


def sharp_multiplier(size: int, i) -> np.ndarray:
    lo, hi = _bounds(i)
    if lo < -size // 2 or hi > size // 2:
        raise ValueError(f"interval [{lo}, {hi}) escapes the frequency range")
    xi = _freqs(size)
    return ((xi >= lo) & (xi < hi)).astype(np.float64)


def apply_multiplier(f, m: np.ndarray) -> np.ndarray:
    return np.fft.ifft(np.fft.fft(f) * m)


def sharp_projection(f, i) -> np.ndarray:
    """``pi_I f``: keep the Fourier coefficients with frequency in ``i``."""
    f = as_signal(f)
    return apply_multiplier(f, sharp_multiplier(f.shape[0], i))


@dataclass(frozen=True)
class BumpProfile:
    """Even bump equal to 1 on ``[-1/2, 1/2]`` and 0 outside ``[-1, 1]``.

    The drop uses ``s(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})`` on the
    window ``1/2 <= |x| <= 1/2 + 1/(2 sharpness)``. ``sharpness = 1`` gives the
    full transition; large values approach the indicator of the core.
    """

    sharpness: float = 1.0

    def __post_init__(self) -> None:
        if not self.sharpness >= 1.0:
            raise ValueError("sharpness must be >= 1")

    def evaluate(self, x) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=np.float64))
        t = (x - 0.5) * 2.0 * self.sharpness
        out = np.zeros_like(t)
        out[t <= 0] = 1.0
        mid = (t > 0) & (t < 1)
        tm = t[mid]
        # written with a shared exponent to avoid overflow near the ends
        a = -1.0 / tm
        b = -1.0 / (1.0 - tm)
        top = np.maximum(a, b)
        s = np.exp(a - top) / (np.exp(a - top) + np.exp(b - top))
        out[mid] = 1.0 - s
        return out


def smooth_multiplier(size: int, core, profile: BumpProfile) -> np.ndarray:
    lo, hi = _bounds(core)
    length = float(hi - lo)
    if length <= 0:
        return np.zeros(size)
    center = float(lo + hi) / 2.0
    if center - length < -size // 2 or center + length > size // 2:
        raise ValueError("doubled interval escapes the frequency range")
    xi = _freqs(size).astype(np.float64)
    return profile.evaluate((xi + 0.5 - center) / length)


def smooth_projection(f, core, profile: BumpProfile | None = None) -> np.ndarray:
    f = as_signal(f)
    return apply_multiplier(f, smooth_multiplier(f.shape[0], core, profile or BumpProfile()))


def bilinear_projection(f, g, r: FreqRectangle) -> np.ndarray:
    """``pi_R(f, g) = pi_{R1} f * pi_{R2} g``."""
    return sharp_projection(f, r.r1) * sharp_projection(g, r.r2)


def bilinear_projection_bruteforce(f, g, r: FreqRectangle) -> np.ndarray:
    """Direct double sum over ``(xi, eta) in R``; quadratic in the area."""
    f = as_signal(f)
    g = as_signal(g, f.shape[0])
    size = f.shape[0]
    F, G = dft(f), dft(g)
    x = np.arange(size)
    out = np.zeros(size, dtype=np.complex128)
    for xi in range(r.r1.lo, r.r1.hi):
        for eta in range(r.r2.lo, r.r2.hi):
            out += F.at(xi) * G.at(eta) * np.exp(2j * np.pi * (xi + eta) * x / size)
    return out / size


def convolve_with_bump(h, core, profile: BumpProfile | None = None) -> np.ndarray:
    """Filter ``h`` by the rescaled bump adapted to ``core``."""
    return smooth_projection(h, core, profile)


def bump_kernel(size: int, core, profile: BumpProfile | None = None) -> np.ndarray:
    delta = np.zeros(size, dtype=np.complex128)
    delta[0] = 1.0
    return convolve_with_bump(delta, core, profile)


def periodic_distance(size: int, i) -> np.ndarray:
    """Distance from each ``z`` in ``Z_N`` to the (possibly wrapped) interval."""
    lo, hi = _bounds(i)
    length = hi - lo
    z = np.arange(size)
    u = (z - lo) % size
    inside = u < length
    d = np.minimum(u - (length - 1), size - u)
    return np.where(inside, 0, d).astype(np.float64)


def weight_phi(i, cfg_or_decay, size: int | None = None) -> np.ndarray:
    """``Phi_I(z) = (1 + dist(z, I)/|I|)^-M`` with periodic distance."""
    if isinstance(cfg_or_decay, GridConfig):
        decay, size = cfg_or_decay.phi_decay, cfg_or_decay.size
    else:
        decay = int(cfg_or_decay)
        if size is None:
            raise ValueError("size required when passing a bare decay")
    lo, hi = _bounds(i)
    return (1.0 + periodic_distance(size, i) / float(hi - lo)) ** (-decay)


def phi_mass_constant(decay: int) -> float:
    """``C_M = sum_{j>=0} 2 (1+j)^-M``, a bound for ``sum_z Phi_I(z) / |I|``."""
    return 2.0 * sum((1.0 + j) ** (-decay) for j in range(100000))


def signal_to_json(f) -> list:
    f = as_signal(f)
    return [[float(v.real), float(v.imag)] for v in f]


def signal_from_json(obj) -> np.ndarray:
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def signal_to_bytes(f) -> bytes:
    """Little-endian float64, real and imaginary parts interleaved."""
    return as_signal(f).astype("<c16").tobytes()


def signal_from_bytes(buf: bytes) -> np.ndarray:
    return np.frombuffer(buf, dtype="<c16").astype(np.complex128)


def interval_of(i) -> Interval:
    if isinstance(i, DyadicInterval):
        return i.as_interval()
    lo, hi = _bounds(i)
    return Interval(lo, hi)


def tone(size: int, xi: int) -> np.ndarray:
    x = np.arange(size)
    return np.exp(2j * math.pi * xi * x / size)
