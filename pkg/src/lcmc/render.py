"""Rasterizes decoded priors into full-resolution conditioning images.

The pose render follows the widely used 18-keypoint colored-limb
convention (the representation pose-conditioned adapters are trained on):
17 limb segments, each in a fixed distinct color, on a black background.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidArgument
from .image import ImageBuffer
from .structure import BODY_KEYPOINTS, EdgeMap, PoseMap
from .texture import GRID_SIZE, TextureMap


@dataclass(frozen=True)
class ConditionSet:
    prompt: str
    structure_image: Optional[ImageBuffer] = None
    structure_kind: Optional[str] = None  # "edge" | "pose"
    texture_image: Optional[ImageBuffer] = None


# 17 limb pairs over the 18 body keypoints (0-indexed), openpose order.
LIMB_PAIRS = (
    (1, 2), (1, 5), (2, 3), (3, 4), (5, 6), (6, 7), (1, 8), (8, 9),
    (9, 10), (1, 11), (11, 12), (12, 13), (1, 0), (0, 14), (14, 15),
    (0, 16), (0, 17),
)

LIMB_COLORS = (
    (255, 0, 0), (255, 85, 0), (255, 170, 0), (255, 255, 0), (170, 255, 0),
    (85, 255, 0), (0, 255, 0), (0, 255, 85), (0, 255, 170), (0, 255, 255),
    (0, 170, 255), (0, 85, 255), (0, 0, 255), (85, 0, 255), (170, 0, 255),
    (255, 0, 170), (255, 0, 85),
)

FACE_DOT_COLOR = (255, 255, 255)
BASE_STROKE_WIDTH = 4  # pixels at 512 resolution, scaled proportionally


def _to_pixel(coord: float, extent: int) -> int:
    return int(np.floor(coord * (extent - 1) + 0.5))


def _draw_segment(canvas: np.ndarray, x0, y0, x1, y1, radius: float, color):
    """Paint all pixels within `radius` of the segment (round caps)."""
    h, w = canvas.shape[:2]
    r = int(np.ceil(radius))
    lo_x = max(0, min(x0, x1) - r)
    hi_x = min(w - 1, max(x0, x1) + r)
    lo_y = max(0, min(y0, y1) - r)
    hi_y = min(h - 1, max(y0, y1) + r)
    if lo_x > hi_x or lo_y > hi_y:
        return
    ys, xs = np.mgrid[lo_y:hi_y + 1, lo_x:hi_x + 1]
    dx, dy = x1 - x0, y1 - y0
    if dx == 0 and dy == 0:
        dist2 = (xs - x0) ** 2 + (ys - y0) ** 2
    else:
        t = ((xs - x0) * dx + (ys - y0) * dy) / float(dx * dx + dy * dy)
        t = np.clip(t, 0.0, 1.0)
        dist2 = (xs - (x0 + t * dx)) ** 2 + (ys - (y0 + t * dy)) ** 2
    mask = dist2 <= radius * radius
    canvas[lo_y:hi_y + 1, lo_x:hi_x + 1][mask] = color


def render_pose(p: PoseMap, w: int, h: int) -> ImageBuffer:
    """Skeleton render: colored limbs plus white face dots on black."""
    canvas = np.zeros((h, w, 3), dtype=np.uint8)
    radius = max(1.0, BASE_STROKE_WIDTH * min(w, h) / 512.0) / 2.0
    for person in p.persons:
        kps = person.keypoints
        for pair, color in zip(LIMB_PAIRS, LIMB_COLORS):
            a, b = kps[pair[0]], kps[pair[1]]
            if not (a.present and b.present):
                continue
            _draw_segment(
                canvas,
                _to_pixel(a.x, w), _to_pixel(a.y, h),
                _to_pixel(b.x, w), _to_pixel(b.y, h),
                radius, color,
            )
        for k in kps[BODY_KEYPOINTS:]:
            if k.present:
                px, py = _to_pixel(k.x, w), _to_pixel(k.y, h)
                _draw_segment(canvas, px, py, px, py, 1.0, FACE_DOT_COLOR)
    return ImageBuffer(canvas)


def render_edges(e: EdgeMap, w: int, h: int) -> ImageBuffer:
    """Nearest-neighbor upsample; edge bits become white pixels."""
    if w != e.width * e.downscale or h != e.height * e.downscale:
        raise InvalidArgument(
            "target %dx%d does not match grid %dx%d at downscale %d"
            % (w, h, e.width, e.height, e.downscale)
        )
    up = np.repeat(np.repeat(e.grid, e.downscale, axis=0), e.downscale, axis=1)
    canvas = np.zeros((h, w, 3), dtype=np.uint8)
    canvas[up] = (255, 255, 255)
    return ImageBuffer(canvas)


def render_texture(t: TextureMap, w: int, h: int,
                   mode: str = "bilinear") -> ImageBuffer:
    """Upsample the 8x8 colormap; bilinear (cell centers as sample points,
    edge-clamped) by default, nearest kept for ablation."""
    if w % GRID_SIZE or h % GRID_SIZE:
        raise InvalidArgument("dimensions must be divisible by %d" % GRID_SIZE)
    if mode == "nearest":
        px = np.repeat(np.repeat(t.cells, h // GRID_SIZE, axis=0),
                       w // GRID_SIZE, axis=1)
        return ImageBuffer(px)
    if mode != "bilinear":
        raise InvalidArgument("unknown texture render mode %r" % mode)
    bw, bh = w / GRID_SIZE, h / GRID_SIZE
    gx = np.clip((np.arange(w) + 0.5) / bw - 0.5, 0.0, GRID_SIZE - 1)
    gy = np.clip((np.arange(h) + 0.5) / bh - 0.5, 0.0, GRID_SIZE - 1)
    x0 = np.minimum(gx.astype(int), GRID_SIZE - 2)
    y0 = np.minimum(gy.astype(int), GRID_SIZE - 2)
    fx = (gx - x0)[None, :, None]
    fy = (gy - y0)[:, None, None]
    c = t.cells.astype(np.float64)
    top = c[y0][:, x0] * (1 - fx) + c[y0][:, x0 + 1] * fx
    bot = c[y0 + 1][:, x0] * (1 - fx) + c[y0 + 1][:, x0 + 1] * fx
    out = top * (1 - fy) + bot * fy
    return ImageBuffer(np.floor(out + 0.5).astype(np.uint8))
