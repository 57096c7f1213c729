"""Base64 image / bit-grid helpers for the HTTP wire format."""

import base64
import binascii
import io

import numpy as np
from PIL import Image


class WireError(ValueError):
    pass


def decode_image(data: str) -> np.ndarray:
    """base64 PNG -> (h, w, 3) uint8 array."""
    try:
        raw = base64.b64decode(data, validate=True)
        with Image.open(io.BytesIO(raw)) as im:
            return np.asarray(im.convert("RGB"))
    except (binascii.Error, OSError, ValueError) as e:
        raise WireError("undecodable image payload: %s" % e)


def encode_image(pixels: np.ndarray) -> str:
    buf = io.BytesIO()
    Image.fromarray(pixels.astype(np.uint8), mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def encode_grid(grid: np.ndarray) -> str:
    """Bit-pack rows (each padded to a byte boundary) and base64."""
    packed = np.packbits(grid.astype(np.uint8), axis=1)
    return base64.b64encode(packed.tobytes()).decode("ascii")
