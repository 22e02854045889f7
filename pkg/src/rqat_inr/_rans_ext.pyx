# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled rANS kernels; byte-identical to ``_rans_py``."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint8_t, uint32_t, uint64_t, int64_t

cnp.import_array()

cdef uint32_t STATE_LOWER = 1 << 23
cdef int SCALE_BITS = 16
cdef uint32_t SCALE_MASK = (1 << 16) - 1


def encode_indices(const int64_t[::1] indices, const int64_t[::1] freqs, const int64_t[::1] starts):
    cdef Py_ssize_t n = indices.shape[0]
    # worst case: every symbol emits at most 2 bytes at 16-bit precision
    cdef cnp.ndarray[uint8_t, ndim=1] buf = np.empty(2 * n + 4, dtype=np.uint8)
    cdef uint8_t[::1] out = buf
    cdef Py_ssize_t pos = 0
    cdef Py_ssize_t i
    cdef uint64_t x = STATE_LOWER
    cdef uint64_t bound = (STATE_LOWER >> SCALE_BITS) << 8
    cdef uint64_t f, x_max
    cdef int64_t s
    for i in range(n - 1, -1, -1):
        s = indices[i]
        f = <uint64_t>freqs[s]
        x_max = bound * f
        while x >= x_max:
            out[pos] = <uint8_t>(x & 0xFF)
            pos += 1
            x >>= 8
        x = ((x // f) << SCALE_BITS) + (x % f) + <uint64_t>starts[s]
    out[pos] = <uint8_t>(x & 0xFF)
    out[pos + 1] = <uint8_t>((x >> 8) & 0xFF)
    out[pos + 2] = <uint8_t>((x >> 16) & 0xFF)
    out[pos + 3] = <uint8_t>(x >> 24)
    pos += 4
    return buf[:pos][::-1].tobytes()


def decode_indices(const uint8_t[::1] payload, Py_ssize_t n, const int64_t[::1] freqs,
                   const int64_t[::1] starts, const int64_t[::1] slot_to_index):
    cdef Py_ssize_t size = payload.shape[0]
    if size < 4:
        raise ValueError("payload shorter than the rANS state")
    cdef cnp.ndarray[int64_t, ndim=1] result = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] res = result
    cdef uint64_t x = ((<uint64_t>payload[0] << 24) | (<uint64_t>payload[1] << 16)
                       | (<uint64_t>payload[2] << 8) | <uint64_t>payload[3])
    cdef Py_ssize_t pos = 4
    cdef Py_ssize_t i
    cdef uint64_t slot
    cdef int64_t s
    for i in range(n):
        slot = x & SCALE_MASK
        s = slot_to_index[slot]
        res[i] = s
        x = <uint64_t>freqs[s] * (x >> SCALE_BITS) + slot - <uint64_t>starts[s]
        while x < STATE_LOWER:
            if pos >= size:
                raise ValueError("payload truncated")
            x = (x << 8) | payload[pos]
            pos += 1
    if x != STATE_LOWER:
        raise ValueError("final rANS state mismatch")
    if pos != size:
        raise ValueError("trailing bytes after payload")
    return result
