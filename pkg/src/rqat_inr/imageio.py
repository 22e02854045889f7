"""8-bit RGB image files (PNG, binary PPM) to and from :class:`ImageBuffer`."""

import numpy as np
from PIL import Image

from .siren import ImageBuffer


def load_image(path):
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    return ImageBuffer.from_array(arr)


def to_uint8(image):
    arr = np.clip(image.to_array(), 0.0, 1.0) * 255.0
    return np.floor(arr + 0.5).astype(np.uint8)


def save_image(path, image):
    """Write an 8-bit file; the format follows the file extension."""
    Image.fromarray(to_uint8(image), mode="RGB").save(path)
