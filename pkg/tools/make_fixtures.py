"""Regenerate the committed test fixtures under tests/data/.

The natural-image crop comes from scikit-image's bundled ``astronaut`` photo.
The golden stream is a q=8 quantization of a seeded random 16x16 network; its
reference reconstruction is stored as float64 so decoding can be compared
bit-exactly. Only rerun this on purpose: the golden files pin the format.
"""

import sys
from pathlib import Path

import numpy as np
from PIL import Image

from rqat_inr.bitstream import decode_image, serialize
from rqat_inr.quantizer import quantize_network
from rqat_inr.siren import init_network

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"


def main(which):
    DATA.mkdir(parents=True, exist_ok=True)
    if "crop" in which:
        from skimage import data

        crop = data.astronaut()[100:132, 200:232]
        Image.fromarray(crop).save(DATA / "astronaut_crop32.png")
    if "golden" in which:
        net = init_network((2, 16, 16, 3), seed=1234)
        stream = serialize(quantize_network(net, 8), 16, 16)
        (DATA / "golden_16x16.rqat").write_bytes(stream)
        np.save(DATA / "golden_16x16_pixels.npy", decode_image(stream).pixels)


if __name__ == "__main__":
    main(sys.argv[1:] or ["crop", "golden"])
