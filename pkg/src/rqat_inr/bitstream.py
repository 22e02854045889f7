"""Bit-exact container for an encoded image, and the decode pipeline.

Layout (all integers big-endian, halves are IEEE binary16 big-endian)::

    magic "RQAT" | version u8 | q u8 | width u16 | height u16 | L u8
    | layer_dims (L+1) x u16 | weight absmax L x f16 | bias absmax L x f16
    | mu f16 | sigma f16 | payload length u32 | payload

The payload is the rANS coding of every weight symbol (layers 1..L, row-major)
followed by every bias symbol (layers 1..L). Note that the model's spread is
stored as the standard deviation, not the variance: a q=10 variance can exceed
the binary16 range.
"""

import struct
from dataclasses import dataclass

import numpy as np

from . import entropy, rangecoder
from .binary16 import decode_f16, encode_f16
from .errors import CorruptDataError, FormatError, InvalidArgumentError, UnsupportedConfigurationError
from .quantizer import QuantizedNetwork, dequantize_network, k_of
from .siren import DEFAULT_W0, ImageBuffer, forward, make_grid

MAGIC = b"RQAT"
VERSION = 1
_FIXED = struct.Struct(">4sBBHHB")


def header_size(n_layers):
    """Octets before the payload for an ``n_layers`` network."""
    return _FIXED.size + 2 * (n_layers + 1) + 4 * n_layers + 4 + 4


def side_info_bits(n_layers):
    """Bits spent on absmax scales and the entropy model parameters."""
    return 2 * n_layers * 16 + 2 * 16


@dataclass(frozen=True)
class EncodedImage:
    qnet: QuantizedNetwork
    width: int
    height: int
    model: entropy.BorderAwareModel
    table: entropy.FrequencyTable
    payload: bytes
    data: bytes

    @property
    def payload_bits(self):
        return 8 * len(self.payload)

    @property
    def total_bits(self):
        return 8 * len(self.data)

    @property
    def header_bits(self):
        """Structural bits: everything that is neither side info nor payload."""
        return self.total_bits - self.payload_bits - side_info_bits(self.qnet.n_layers)


def model_for(qnet):
    return entropy.estimate(qnet.symbols(), qnet.n_layers, qnet.k)


def encode_stream(qnet, width, height):
    """Build the full :class:`EncodedImage` for ``qnet``."""
    qnet.validate()
    L = qnet.n_layers
    if not (0 < width < 1 << 16 and 0 < height < 1 << 16):
        raise UnsupportedConfigurationError("width and height must fit in 16 bits")
    if L >= 1 << 8 or max(qnet.layer_dims) >= 1 << 16:
        raise UnsupportedConfigurationError("layer count or width exceeds header field size")
    symbols = qnet.symbols()
    model = entropy.estimate(symbols, L, qnet.k)
    table = entropy.build_frequency_table(model)
    payload = rangecoder.encode(symbols, table).data
    if len(payload) >= 1 << 32:
        raise UnsupportedConfigurationError("payload length overflows 32 bits")
    parts = [_FIXED.pack(MAGIC, VERSION, qnet.q, width, height, L)]
    parts.append(struct.pack(f">{L + 1}H", *qnet.layer_dims))
    parts += [encode_f16(a) for a in qnet.weight_absmax]
    parts += [encode_f16(a) for a in qnet.bias_absmax]
    parts += [encode_f16(model.mu), encode_f16(model.sigma)]
    parts.append(struct.pack(">I", len(payload)))
    parts.append(payload)
    return EncodedImage(qnet, width, height, model, table, payload, b"".join(parts))


def serialize(qnet, width, height):
    return encode_stream(qnet, width, height).data


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise CorruptDataError("stream truncated")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))


def parse_stream(data):
    """Decode ``data`` into an :class:`EncodedImage`."""
    data = bytes(data)
    r = _Reader(data)
    magic, version, q, width, height, L = r.unpack(">4sBBHHB")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    try:
        k = k_of(q)
    except InvalidArgumentError as exc:
        raise CorruptDataError(str(exc)) from exc
    if L < 1 or width < 1 or height < 1:
        raise CorruptDataError("zero layer count or image dimension")
    dims = r.unpack(f">{L + 1}H")
    if dims[0] != 2 or dims[-1] != 3 or min(dims) < 1:
        raise CorruptDataError(f"invalid layer dims {dims}")
    wabs = tuple(decode_f16(r.take(2)) for _ in range(L))
    babs = tuple(decode_f16(r.take(2)) for _ in range(L))
    mu, sigma = decode_f16(r.take(2)), decode_f16(r.take(2))
    (plen,) = r.unpack(">I")
    payload = r.take(plen)
    if r.pos != len(data):
        raise CorruptDataError("trailing bytes after payload")

    n_params = sum(dims[l] * dims[l + 1] + dims[l + 1] for l in range(L))
    try:
        model = entropy.BorderAwareModel(mu, sigma, L, n_params, k)
    except InvalidArgumentError as exc:
        raise CorruptDataError(f"invalid entropy model parameters: {exc}") from exc
    table = entropy.build_frequency_table(model)
    symbols = rangecoder.decode(payload, table, n_params)

    ws, bs, pos = [], [], 0
    for l in range(L):
        n = dims[l] * dims[l + 1]
        ws.append(symbols[pos:pos + n].reshape(dims[l + 1], dims[l]))
        pos += n
    for l in range(L):
        bs.append(symbols[pos:pos + dims[l + 1]])
        pos += dims[l + 1]
    qnet = QuantizedNetwork(tuple(dims), q, tuple(ws), tuple(bs), wabs, babs)
    qnet.validate()
    return EncodedImage(qnet, width, height, model, table, payload, data)


def deserialize(data):
    """Return ``(qnet, width, height)``."""
    enc = parse_stream(data)
    return enc.qnet, enc.width, enc.height


def reconstruct(qnet, width, height, w0=DEFAULT_W0):
    """Unclamped network output over the pixel grid, ``(width*height, 3)``."""
    return forward(dequantize_network(qnet, w0), make_grid(width, height))


def decode_image(data, w0=DEFAULT_W0):
    qnet, width, height = deserialize(data)
    pixels = np.clip(reconstruct(qnet, width, height, w0), 0.0, 1.0)
    return ImageBuffer(width, height, pixels)
