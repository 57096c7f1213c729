"""RGB image buffer plus PNG/PPM file I/O."""

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import InvalidArgument


@dataclass(frozen=True)
class ImageBuffer:
    """Row-major 8-bit RGB image; `pixels` has shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 3 or px.shape[2] != 3:
            raise InvalidArgument("pixels must have shape (h, w, 3)")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        return (isinstance(other, ImageBuffer)
                and np.array_equal(self.pixels, other.pixels))

    @classmethod
    def constant(cls, width: int, height: int, rgb=(0, 0, 0)) -> "ImageBuffer":
        px = np.empty((height, width, 3), dtype=np.uint8)
        px[:] = rgb
        return cls(px)

    def luminance(self) -> np.ndarray:
        """Rec.601 luma as float64, shape (h, w)."""
        r, g, b = (self.pixels[..., i].astype(np.float64) for i in range(3))
        return 0.299 * r + 0.587 * g + 0.114 * b


def load_image(path) -> ImageBuffer:
    with Image.open(path) as im:
        return ImageBuffer(np.asarray(im.convert("RGB")))


def save_image(img: ImageBuffer, path):
    Image.fromarray(img.pixels, mode="RGB").save(path)
