"""Absolute-maximum normalized fixed-bit quantization of network parameters.

Each layer's weights and each layer's biases form an independent group. A
group is scaled by its absolute maximum, rounded up to binary16 so encoder,
trainer and decoder all divide by the same representable value, then mapped to
integers in ``[-k, k]`` with ``k = 2**(q-1) - 1``.
"""

from dataclasses import dataclass

import numpy as np

from . import binary16
from .errors import CorruptDataError, InvalidArgumentError
from .siren import DEFAULT_W0, SirenNetwork

Q_MIN, Q_MAX = 2, 15


def k_of(q):
    if not (isinstance(q, (int, np.integer)) and Q_MIN <= q <= Q_MAX):
        raise InvalidArgumentError(f"q must be an integer in [{Q_MIN}, {Q_MAX}], got {q!r}")
    return 2 ** (int(q) - 1) - 1


def round_half_away(x):
    """Nearest integer, ties away from zero (exact for all finite inputs)."""
    whole = np.trunc(x)
    frac = x - whole
    return whole + np.where(np.abs(frac) >= 0.5, np.sign(x), 0.0)


def quantize_group(values, q):
    """Return ``(symbols, absmax)`` for one parameter group."""
    k = k_of(q)
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("cannot quantize non-finite values")
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    if peak == 0.0:
        return np.zeros(values.shape, dtype=np.int64), 0.0
    absmax = binary16.round_up(peak)
    symbols = round_half_away(values / absmax * k)
    return np.clip(symbols, -k, k).astype(np.int64), absmax


def dequantize_group(symbols, absmax, q):
    k = k_of(q)
    symbols = np.asarray(symbols)
    if symbols.size and int(np.max(np.abs(symbols))) > k:
        raise CorruptDataError(f"symbol outside [-{k}, {k}]")
    if not (absmax >= 0.0 and np.isfinite(absmax)):
        raise CorruptDataError(f"invalid absmax {absmax!r}")
    return symbols.astype(np.float64) / k * absmax


def fake_quantize_group(values, q):
    """Quantize then dequantize; the forward half of the straight-through estimator."""
    symbols, absmax = quantize_group(values, q)
    return dequantize_group(symbols, absmax, q)


@dataclass(frozen=True)
class QuantizedNetwork:
    layer_dims: tuple
    q: int
    weight_symbols: tuple
    bias_symbols: tuple
    weight_absmax: tuple
    bias_absmax: tuple

    @property
    def k(self):
        return k_of(self.q)

    @property
    def n_layers(self):
        return len(self.layer_dims) - 1

    def symbols(self):
        """All symbols: weights of layers 1..L (row-major), then biases 1..L."""
        parts = [s.ravel() for s in self.weight_symbols] + [s.ravel() for s in self.bias_symbols]
        return np.concatenate(parts).astype(np.int64)

    def validate(self):
        """Raise :class:`CorruptDataError` if any invariant fails."""
        dims = self.layer_dims
        k = k_of(self.q)
        L = len(dims) - 1
        if not (len(self.weight_symbols) == len(self.bias_symbols) == L
                and len(self.weight_absmax) == len(self.bias_absmax) == L):
            raise CorruptDataError("group count does not match layer count")
        for l in range(L):
            groups = (
                (self.weight_symbols[l], self.weight_absmax[l], (dims[l + 1], dims[l])),
                (self.bias_symbols[l], self.bias_absmax[l], (dims[l + 1],)),
            )
            for sym, amax, shape in groups:
                if sym.shape != shape:
                    raise CorruptDataError(f"layer {l} symbol shape {sym.shape} != {shape}")
                if sym.size and int(np.max(np.abs(sym))) > k:
                    raise CorruptDataError(f"layer {l} symbol outside [-{k}, {k}]")
                if not binary16.is_f16_exact(amax) or amax < 0:
                    raise CorruptDataError(f"layer {l} absmax {amax!r} is not a binary16 value >= 0")
                if amax == 0 and np.any(sym):
                    raise CorruptDataError(f"layer {l} has nonzero symbols with zero absmax")


def quantize_network(net, q):
    ws, wa, bs, ba = [], [], [], []
    for w, b in zip(net.weights, net.biases):
        s, a = quantize_group(w, q)
        ws.append(s)
        wa.append(a)
        s, a = quantize_group(b, q)
        bs.append(s)
        ba.append(a)
    return QuantizedNetwork(net.layer_dims, int(q), tuple(ws), tuple(bs), tuple(wa), tuple(ba))


def dequantize_network(qnet, w0=DEFAULT_W0):
    qnet.validate()
    weights = [dequantize_group(s, a, qnet.q) for s, a in zip(qnet.weight_symbols, qnet.weight_absmax)]
    biases = [dequantize_group(s, a, qnet.q) for s, a in zip(qnet.bias_symbols, qnet.bias_absmax)]
    return SirenNetwork(qnet.layer_dims, weights, biases, w0)


def fake_quantize_network(net, q):
    """Network whose parameters are the dequantized q-bit lattice points of ``net``."""
    return dequantize_network(quantize_network(net, q), net.w0)
