"""Border-aware probability model for quantized network symbols.

The extreme symbols ``-k`` and ``+k`` each get the fixed mass ``L / n_params``
(every layer has at least one parameter at its absolute maximum). The interior
``[-(k-1), k-1]`` shares the remaining mass following a Gaussian density
sampled at the integers and renormalized over the interior.
"""

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from . import binary16
from .errors import InvalidArgumentError, UnsupportedConfigurationError

# smallest binary16 value >= 0.1, so the floored sigma stays representable
SIGMA_FLOOR = binary16.round_up(0.1)
PRECISION_BITS = 16


@dataclass(frozen=True)
class BorderAwareModel:
    mu: float
    sigma: float
    L: int
    n_params: int
    k: int

    def __post_init__(self):
        if self.L < 1 or self.k < 1:
            raise InvalidArgumentError("L and k must be positive")
        if 2 * self.L >= self.n_params:
            raise InvalidArgumentError("border mass 2L/n_params must be below 1")
        if not self.sigma >= SIGMA_FLOOR:
            raise InvalidArgumentError(f"sigma {self.sigma!r} below floor {SIGMA_FLOOR}")
        if not (binary16.is_f16_exact(self.mu) and binary16.is_f16_exact(self.sigma)):
            raise InvalidArgumentError("mu and sigma must be binary16 values")

    @property
    def border_prob(self):
        return self.L / self.n_params

    def _interior_log_density(self):
        # Gaussian log-density at u = -(k-1) .. k-1
        u = np.arange(-(self.k - 1), self.k, dtype=np.float64)
        z = (u - self.mu) / self.sigma
        return -0.5 * z * z - math.log(self.sigma * math.sqrt(2.0 * math.pi))

    def interior_pmf(self):
        """pmf over ``-(k-1) .. k-1`` as one array."""
        dens = np.exp(self._interior_log_density())
        total = float(np.cumsum(dens)[-1])  # sequential left-to-right sum
        if total == 0.0:
            # density underflowed everywhere; normalize in the log domain
            logd = self._interior_log_density()
            rel = np.exp(logd - np.max(logd))
            return (1.0 - 2.0 * self.border_prob) * rel / float(np.cumsum(rel)[-1])
        return (1.0 - 2.0 * self.border_prob) * dens / total

    def _interior_log2(self):
        logd = self._interior_log_density()
        top = float(np.max(logd))
        lse = top + math.log(float(np.sum(np.exp(logd - top))))
        return math.log2(1.0 - 2.0 * self.border_prob) + (logd - lse) / math.log(2.0)

    def full_pmf(self):
        """pmf over ``-k .. k``; index ``i`` holds symbol ``i - k``."""
        p = np.empty(2 * self.k + 1)
        p[0] = p[-1] = self.border_prob
        p[1:-1] = self.interior_pmf()
        return p

    def log2_pmf(self):
        """log2 pmf over ``-k .. k``, finite even where the pmf underflows."""
        out = np.empty(2 * self.k + 1)
        out[0] = out[-1] = math.log2(self.border_prob)
        p = self.interior_pmf()
        with np.errstate(divide="ignore"):
            interior = np.log2(p)
        tiny = p == 0.0
        if np.any(tiny):
            interior[tiny] = self._interior_log2()[tiny]
        out[1:-1] = interior
        return out


def estimate(symbols, L, k):
    """Fit the model to a symbol stream; mu/sigma come back binary16-rounded."""
    symbols = np.asarray(symbols, dtype=np.int64).ravel()
    if symbols.size == 0:
        raise InvalidArgumentError("cannot estimate a model from zero symbols")
    if np.any(np.abs(symbols) > k):
        raise InvalidArgumentError(f"symbols must lie in [-{k}, {k}]")
    interior = symbols[np.abs(symbols) <= k - 1].astype(np.float64)
    if interior.size == 0:
        mu, sigma = 0.0, SIGMA_FLOOR
    else:
        mu = float(np.mean(interior))
        var = float(np.mean(interior * interior)) - mu * mu
        sigma = math.sqrt(max(var, 0.0))
        mu = binary16.round_nearest(mu)
        sigma = max(binary16.round_nearest(sigma), SIGMA_FLOOR)
    return BorderAwareModel(mu, sigma, int(L), int(symbols.size), int(k))


def pmf(model, x):
    x = int(x)
    if x == model.k or x == -model.k:
        return model.border_prob
    if abs(x) > model.k:
        return 0.0
    return float(model.interior_pmf()[x + model.k - 1])


def rate(model, symbols):
    """Ideal code length in bits, ``-sum(log2 p(s))``."""
    symbols = np.asarray(symbols, dtype=np.int64).ravel()
    if symbols.size == 0:
        return 0.0
    if np.any(np.abs(symbols) > model.k):
        raise InvalidArgumentError("symbol outside the model alphabet has zero probability")
    counts = np.bincount(symbols + model.k, minlength=2 * model.k + 1)
    logp = model.log2_pmf()
    used = counts > 0
    return float(-np.sum(counts[used] * logp[used]))


@dataclass(frozen=True)
class FrequencyTable:
    k: int
    freqs: np.ndarray  # index i holds symbol i - k
    precision_bits: int = PRECISION_BITS

    @property
    def cumulative(self):
        """Start offset of each symbol; length ``2k + 2`` ending at the total."""
        return np.concatenate(([0], np.cumsum(self.freqs))).astype(np.int64)

    def checksum(self):
        return hashlib.sha256(self.freqs.astype(">u4").tobytes()).hexdigest()

    def log2_probs(self):
        return np.log2(self.freqs.astype(np.float64)) - self.precision_bits

    def cross_entropy_bits(self, symbols):
        symbols = np.asarray(symbols, dtype=np.int64).ravel()
        if symbols.size == 0:
            return 0.0
        counts = np.bincount(symbols + self.k, minlength=self.freqs.size)
        return float(-np.sum(counts * self.log2_probs()))


def quantize_pmf(probs, precision_bits=PRECISION_BITS):
    """Integer frequencies >= 1 summing to ``2**precision_bits``.

    The deficit goes to the largest frequency (ties: smallest index); a
    negative deficit that would push it below 1 spills to the next largest.
    """
    total = 1 << precision_bits
    probs = np.asarray(probs, dtype=np.float64)
    if probs.size > total:
        raise UnsupportedConfigurationError(
            f"{probs.size} symbols cannot each get frequency >= 1 at {precision_bits} bits"
        )
    freqs = np.maximum(1, np.floor(probs * total)).astype(np.int64)
    deficit = total - int(freqs.sum())
    # stable sort on -freq keeps the smaller index first among ties
    order = np.argsort(-freqs, kind="stable")
    if deficit > 0:
        freqs[order[0]] += deficit
    else:
        for i in order:
            if deficit == 0:
                break
            take = min(-deficit, int(freqs[i]) - 1)
            freqs[i] -= take
            deficit += take
    return freqs


def build_frequency_table(model):
    return FrequencyTable(model.k, quantize_pmf(model.full_pmf()))
