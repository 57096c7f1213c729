"""Texture layer: an 8x8 RGB colormap of per-block channel means.

Payload layout: grid_w:u8 grid_h:u8 bit_depth:u8 then 192 raw RGB bytes
(195 bytes total for the 8x8, 8-bit configuration). No entropy coding:
the color bytes are near-random and framing would often inflate them.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, PayloadDecodeError
from .image import ImageBuffer

GRID_SIZE = 8
BIT_DEPTH = 8
PAYLOAD_SIZE = 3 + 3 * GRID_SIZE * GRID_SIZE  # 195


@dataclass(frozen=True)
class TextureMap:
    """cells has shape (GRID_SIZE, GRID_SIZE, 3), dtype uint8, row-major."""

    cells: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.cells, dtype=np.uint8)
        if c.shape != (GRID_SIZE, GRID_SIZE, 3):
            raise InvalidArgument(
                "texture cells must have shape (%d, %d, 3)" % (GRID_SIZE, GRID_SIZE)
            )
        object.__setattr__(self, "cells", c)

    def __eq__(self, other):
        return isinstance(other, TextureMap) and np.array_equal(
            self.cells, other.cells
        )


def _round_half_away(values: np.ndarray) -> np.ndarray:
    # np.round rounds half to even; channel means are nonnegative.
    return np.floor(values + 0.5)


def extract_texture(img: ImageBuffer) -> TextureMap:
    """Per-block channel means over an 8x8 partition of the image."""
    if img.width % GRID_SIZE or img.height % GRID_SIZE:
        raise InvalidArgument("image dimensions must be divisible by %d" % GRID_SIZE)
    bh, bw = img.height // GRID_SIZE, img.width // GRID_SIZE
    blocks = img.pixels.reshape(GRID_SIZE, bh, GRID_SIZE, bw, 3)
    means = blocks.mean(axis=(1, 3), dtype=np.float64)
    return TextureMap(_round_half_away(means).astype(np.uint8))


def encode_texture(t: TextureMap) -> bytes:
    return bytes([GRID_SIZE, GRID_SIZE, BIT_DEPTH]) + t.cells.tobytes()


def decode_texture(payload: bytes) -> TextureMap:
    if len(payload) < 3:
        raise PayloadDecodeError("texture payload shorter than parameter block")
    grid_w, grid_h, bit_depth = payload[0], payload[1], payload[2]
    if (grid_w, grid_h, bit_depth) != (GRID_SIZE, GRID_SIZE, BIT_DEPTH):
        raise PayloadDecodeError(
            "unsupported texture configuration %dx%d/%d-bit"
            % (grid_w, grid_h, bit_depth)
        )
    if len(payload) != PAYLOAD_SIZE:
        raise PayloadDecodeError(
            "texture payload must be %d bytes, got %d" % (PAYLOAD_SIZE, len(payload))
        )
    cells = np.frombuffer(payload[3:], dtype=np.uint8).reshape(
        GRID_SIZE, GRID_SIZE, 3
    )
    return TextureMap(cells.copy())
