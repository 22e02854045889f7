"""Pure-Python rANS kernels; the fallback when the compiled extension is absent.

Byte-oriented rANS with a 32-bit state kept in ``[2**23, 2**31)`` and 16-bit
frequency precision. Symbols are pushed in reverse, so the emitted byte
sequence is reversed once at the end; the decoder then reads it forward,
starting with the 4-octet big-endian final state.
"""

import numpy as np

STATE_LOWER = 1 << 23
SCALE_BITS = 16
SCALE_MASK = (1 << SCALE_BITS) - 1


def encode_indices(indices, freqs, starts):
    freqs = freqs.tolist()
    starts = starts.tolist()
    out = bytearray()
    x = STATE_LOWER
    bound = (STATE_LOWER >> SCALE_BITS) << 8
    for s in reversed(indices.tolist()):
        f = freqs[s]
        x_max = bound * f
        while x >= x_max:
            out.append(x & 0xFF)
            x >>= 8
        x = ((x // f) << SCALE_BITS) + (x % f) + starts[s]
    out += bytes((x & 0xFF, (x >> 8) & 0xFF, (x >> 16) & 0xFF, x >> 24))
    out.reverse()
    return bytes(out)


def decode_indices(payload, n, freqs, starts, slot_to_index):
    """Decode ``n`` alphabet indices. Raises ValueError on malformed input."""
    if len(payload) < 4:
        raise ValueError("payload shorter than the rANS state")
    freqs = freqs.tolist()
    starts = starts.tolist()
    lookup = slot_to_index.tolist()
    data = payload
    size = len(data)
    x = int.from_bytes(data[:4], "big")
    pos = 4
    result = [0] * n
    for i in range(n):
        slot = x & SCALE_MASK
        s = lookup[slot]
        result[i] = s
        x = freqs[s] * (x >> SCALE_BITS) + slot - starts[s]
        while x < STATE_LOWER:
            if pos >= size:
                raise ValueError("payload truncated")
            x = (x << 8) | data[pos]
            pos += 1
    if x != STATE_LOWER:
        raise ValueError("final rANS state mismatch")
    if pos != size:
        raise ValueError("trailing bytes after payload")
    return np.asarray(result, dtype=np.int64)
