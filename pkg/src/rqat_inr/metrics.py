"""Rate-distortion metrics: PSNR, bits per pixel, Bjontegaard delta rate, MACs."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class RDPoint:
    bpp: float
    psnr: float
    label: str = ""

    def __post_init__(self):
        if self.bpp < 0:
            raise InvalidArgumentError("bpp must be nonnegative")


def _as_pixels(img):
    return np.asarray(getattr(img, "pixels", img), dtype=np.float64)


def psnr(a, b):
    """PSNR in dB for peak 1.0 after clamping both inputs to [0, 1].

    Identical inputs give ``inf``.
    """
    pa, pb = _as_pixels(a), _as_pixels(b)
    if pa.shape != pb.shape:
        raise InvalidArgumentError(f"dimension mismatch {pa.shape} vs {pb.shape}")
    diff = np.clip(pa, 0.0, 1.0) - np.clip(pb, 0.0, 1.0)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(1.0 / mse)


def bpp(n_bytes, width, height):
    """Bits per pixel for ``n_bytes`` octets (or a bytes object)."""
    if not isinstance(n_bytes, int):
        n_bytes = len(n_bytes)
    pixels = width * height
    if pixels <= 0:
        raise InvalidArgumentError("image has no pixels")
    return 8.0 * n_bytes / pixels


def payload_bpp(encoded):
    """Bits per pixel of the entropy-coded payload alone."""
    return encoded.payload_bits / (encoded.width * encoded.height)


def _curve(points):
    pts = sorted(points, key=lambda p: p.psnr)
    if len(pts) < 4:
        raise InvalidArgumentError("BD-rate needs at least 4 points per curve")
    q = np.array([p.psnr for p in pts], dtype=np.float64)
    r = np.array([p.bpp for p in pts], dtype=np.float64)
    if np.any(np.diff(q) <= 0):
        raise InvalidArgumentError("PSNR values must be strictly increasing")
    if np.any(r <= 0):
        raise InvalidArgumentError("rates must be positive")
    return q, np.log10(r)


def bd_rate(anchor, test):
    """Average rate difference of ``test`` vs ``anchor`` in percent.

    Classic Bjontegaard: fit log10(rate) as a cubic in PSNR for each curve and
    integrate both over the shared PSNR interval. Negative means ``test``
    needs fewer bits for the same quality.
    """
    qa, ra = _curve(anchor)
    qt, rt = _curve(test)
    lo, hi = max(qa[0], qt[0]), min(qa[-1], qt[-1])
    if not hi > lo:
        raise InvalidArgumentError("PSNR ranges do not overlap")
    pa = np.polyint(np.polyfit(qa, ra, 3))
    pt = np.polyint(np.polyfit(qt, rt, 3))
    int_a = np.polyval(pa, hi) - np.polyval(pa, lo)
    int_t = np.polyval(pt, hi) - np.polyval(pt, lo)
    avg = (int_t - int_a) / (hi - lo)
    return (10.0**avg - 1.0) * 100.0


def mac_per_pixel(layer_dims):
    """Thousands of multiply-accumulates per decoded pixel (dense layers only)."""
    dims = [int(d) for d in layer_dims]
    if len(dims) < 2 or min(dims) < 1:
        raise InvalidArgumentError(f"bad layer dims {dims}")
    return sum(a * b for a, b in zip(dims[:-1], dims[1:])) / 1000.0
