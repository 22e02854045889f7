"""Static-table rANS entropy coder for integer symbols in ``[-k, k]``.

The inner loops live in a compiled extension when it is importable and in
:mod:`rqat_inr._rans_py` otherwise; both produce identical bytes. Set
``RQAT_INR_PURE_PYTHON=1`` to force the fallback.
"""

import os
from dataclasses import dataclass

import numpy as np

from . import _rans_py
from .errors import CorruptDataError, InvalidArgumentError

_ext = None
if not os.environ.get("RQAT_INR_PURE_PYTHON"):
    try:
        from . import _rans_ext as _ext
    except ImportError:  # extension not built
        _ext = None

BACKEND = "cython" if _ext is not None else "python"


def _kernels(backend=None):
    backend = backend or BACKEND
    if backend == "cython":
        if _ext is None:
            raise InvalidArgumentError("compiled rANS extension is not available")
        return _ext
    if backend == "python":
        return _rans_py
    raise InvalidArgumentError(f"unknown backend {backend!r}")


@dataclass(frozen=True)
class CodedPayload:
    data: bytes
    n_symbols: int

    @property
    def n_bits(self):
        return 8 * len(self.data)


def _tables(table):
    freqs = np.ascontiguousarray(table.freqs, dtype=np.int64)
    starts = np.ascontiguousarray(table.cumulative[:-1], dtype=np.int64)
    return freqs, starts


def encode(symbols, table, backend=None):
    symbols = np.asarray(symbols, dtype=np.int64).ravel()
    k = table.k
    if symbols.size and int(np.max(np.abs(symbols))) > k:
        raise InvalidArgumentError(f"symbol outside the table alphabet [-{k}, {k}]")
    freqs, starts = _tables(table)
    indices = np.ascontiguousarray(symbols + k)
    data = _kernels(backend).encode_indices(indices, freqs, starts)
    return CodedPayload(data, int(symbols.size))


def decode(payload, table, n_symbols, backend=None):
    """Recover ``n_symbols`` symbols.

    A mismatched table is not detectable in general; it yields wrong symbols or
    a :class:`CorruptDataError`.
    """
    if n_symbols == 0:
        return np.zeros(0, dtype=np.int64)
    if n_symbols < 0:
        raise InvalidArgumentError("n_symbols must be nonnegative")
    data = payload.data if isinstance(payload, CodedPayload) else bytes(payload)
    freqs, starts = _tables(table)
    slot_to_index = np.repeat(np.arange(freqs.size, dtype=np.int64), freqs)
    kern = _kernels(backend)
    buf = np.frombuffer(data, dtype=np.uint8) if kern is _ext else data
    try:
        indices = kern.decode_indices(buf, int(n_symbols), freqs, starts, slot_to_index)
    except ValueError as exc:
        raise CorruptDataError(f"entropy-coded payload is corrupt: {exc}") from exc
    return np.asarray(indices, dtype=np.int64) - table.k
