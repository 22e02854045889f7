"""IEEE 754 binary16 helpers used for all side information.

Values are packed big-endian. Encoding rounds to nearest-even and saturates
finite overflow to the largest finite half (65504) instead of producing inf.
"""

import math
import struct

import numpy as np

from .errors import InvalidArgumentError

F16_MAX = 65504.0


def _check(value):
    value = float(value)
    if math.isnan(value):
        raise InvalidArgumentError("cannot encode NaN as binary16")
    return value


def round_nearest(value):
    """Nearest binary16 value (ties to even), saturated to +/-65504."""
    value = _check(value)
    if abs(value) >= F16_MAX:
        return math.copysign(F16_MAX, value)
    return float(np.float16(value))


def round_up(value):
    """Smallest binary16 value >= ``value``.

    Raises if no finite half is large enough.
    """
    value = _check(value)
    if value > F16_MAX:
        raise InvalidArgumentError(f"{value!r} exceeds the binary16 range")
    h = np.float16(value)
    if float(h) < value:
        h = np.nextafter(h, np.float16(np.inf))
    return float(h)


def encode_f16(value):
    """Pack ``value`` into two big-endian octets."""
    return struct.pack(">e", round_nearest(value))


def decode_f16(octets):
    if len(octets) != 2:
        raise InvalidArgumentError("binary16 needs exactly two octets")
    return struct.unpack(">e", bytes(octets))[0]


def is_f16_exact(value):
    value = float(value)
    return math.isfinite(value) and float(np.float16(value)) == value
