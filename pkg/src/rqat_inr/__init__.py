"""Implicit neural image codec with regularized quantization-aware training.

An image is compressed by overfitting a small sine-activated MLP to it,
quantizing the weights with per-layer absmax scaling, and entropy coding the
integer symbols under a border-aware Gaussian model.
"""

from .bitstream import decode_image, deserialize, serialize
from .codec import EncoderConfig, encode_image
from .errors import (
    CorruptDataError,
    FormatError,
    InvalidArgumentError,
    NumericError,
    RqatError,
    TrainingError,
    UnsupportedConfigurationError,
)
from .quantizer import QuantizedNetwork, dequantize_network, quantize_network
from .rangecoder import BACKEND as RANS_BACKEND
from .siren import ImageBuffer, SirenNetwork, fit_full_precision, forward, make_grid

__version__ = "0.1.0"
