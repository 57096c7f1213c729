"""Structure layer: pose keypoints or a downsampled binary edge map.

Pose payload (before compression):

    count:u8 then per person:
    schema_id:u8 presence[11] (88 bits, MSB-first) (qx:u8 qy:u8)*present

Edge payload:

    downscale:u8 threshold:u8 reserved:u8 reserved:u8
    then: codec 1 = zstd(bit-packed rows, each row padded to a byte)
          codec 2 = opaque externally produced bytes, stored verbatim
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import zstd
from .container import EDGE_CODEC_EXTERNAL, EDGE_CODEC_REFERENCE, POSE_CODEC_ZSTD
from .errors import BackendError, InvalidArgument, PayloadDecodeError
from .image import ImageBuffer

BODY_KEYPOINTS = 18
FACE_KEYPOINTS = 70
SCHEMA_BODY18_FACE70 = 0
SCHEMA_SIZES = {SCHEMA_BODY18_FACE70: BODY_KEYPOINTS + FACE_KEYPOINTS}
MAX_PERSONS = 16

DEFAULT_DOWNSCALE = 2
DEFAULT_EDGE_THRESHOLD = 50

_PRESENCE_BYTES = 11  # 88 bits


def quantize_coord(x: float) -> int:
    """Quantize a normalized coordinate to hundredths (0-100), rounding
    half away from zero."""
    if not (0.0 <= x <= 1.0):
        raise InvalidArgument("coordinate %r outside [0, 1]" % (x,))
    return int(math.floor(100.0 * x + 0.5))


def dequantize_coord(q: int) -> float:
    return q / 100.0


@dataclass(frozen=True)
class PoseKeypoint:
    present: bool
    qx: int = 0
    qy: int = 0

    def __post_init__(self):
        if self.present and not (0 <= self.qx <= 100 and 0 <= self.qy <= 100):
            raise InvalidArgument("quantized coordinates must be in 0-100")

    @classmethod
    def absent(cls) -> "PoseKeypoint":
        return cls(False)

    @classmethod
    def at(cls, x: float, y: float) -> "PoseKeypoint":
        return cls(True, quantize_coord(x), quantize_coord(y))

    @property
    def x(self) -> float:
        return dequantize_coord(self.qx)

    @property
    def y(self) -> float:
        return dequantize_coord(self.qy)


@dataclass(frozen=True)
class PosePerson:
    keypoints: tuple
    schema_id: int = SCHEMA_BODY18_FACE70

    def __post_init__(self):
        object.__setattr__(self, "keypoints", tuple(self.keypoints))
        size = SCHEMA_SIZES.get(self.schema_id)
        if size is None:
            raise InvalidArgument("unknown pose schema %d" % self.schema_id)
        if len(self.keypoints) != size:
            raise InvalidArgument(
                "schema %d requires %d keypoints, got %d"
                % (self.schema_id, size, len(self.keypoints))
            )
        if not any(k.present for k in self.keypoints):
            raise InvalidArgument("person must have at least one present keypoint")

    def bounding_box_area(self) -> float:
        """Normalized bbox area over the present keypoints."""
        xs = [k.x for k in self.keypoints if k.present]
        ys = [k.y for k in self.keypoints if k.present]
        return (max(xs) - min(xs)) * (max(ys) - min(ys))


@dataclass(frozen=True)
class PoseMap:
    persons: tuple

    def __post_init__(self):
        object.__setattr__(self, "persons", tuple(self.persons))
        if not self.persons:
            raise InvalidArgument("pose map must contain at least one person")
        if len(self.persons) > MAX_PERSONS:
            raise InvalidArgument("pose map limited to %d persons" % MAX_PERSONS)


@dataclass(frozen=True)
class EdgeMap:
    grid: np.ndarray = field(repr=False)
    downscale: int = DEFAULT_DOWNSCALE
    threshold: int = DEFAULT_EDGE_THRESHOLD

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=bool)
        if g.ndim != 2:
            raise InvalidArgument("edge grid must be 2-dimensional")
        if not (1 <= self.downscale <= 255 and 0 <= self.threshold <= 255):
            raise InvalidArgument("downscale/threshold must fit one byte")
        object.__setattr__(self, "grid", g)

    @property
    def width(self) -> int:
        return self.grid.shape[1]

    @property
    def height(self) -> int:
        return self.grid.shape[0]

    def __eq__(self, other):
        return (isinstance(other, EdgeMap)
                and self.downscale == other.downscale
                and self.threshold == other.threshold
                and np.array_equal(self.grid, other.grid))


def _pack_presence(person: PosePerson) -> bytes:
    bits = np.array([k.present for k in person.keypoints], dtype=np.uint8)
    return np.packbits(bits).tobytes().ljust(_PRESENCE_BYTES, b"\x00")


def pose_raw_bytes(p: PoseMap) -> bytes:
    """The uncompressed pose layout; what codec 0 stores verbatim."""
    out = bytearray([len(p.persons)])
    for person in p.persons:
        out.append(person.schema_id)
        out += _pack_presence(person)
        for k in person.keypoints:
            if k.present:
                out.append(k.qx)
                out.append(k.qy)
    return bytes(out)


def encode_pose(p: PoseMap, level: int = zstd.DEFAULT_LEVEL) -> bytes:
    """Layer-2 payload for the pose variant (codec_id 1)."""
    return zstd.compress(pose_raw_bytes(p), level)


def decode_pose(payload: bytes, codec_id: int = POSE_CODEC_ZSTD) -> PoseMap:
    raw = zstd.decompress(payload) if codec_id == POSE_CODEC_ZSTD else payload
    if len(raw) < 1:
        raise PayloadDecodeError("empty pose payload")
    count = raw[0]
    pos = 1
    persons = []
    for _ in range(count):
        if pos + 1 + _PRESENCE_BYTES > len(raw):
            raise PayloadDecodeError("pose payload shorter than declared persons")
        schema_id = raw[pos]
        size = SCHEMA_SIZES.get(schema_id)
        if size is None:
            raise PayloadDecodeError("unknown pose schema %d" % schema_id)
        pos += 1
        presence = np.unpackbits(
            np.frombuffer(raw[pos:pos + _PRESENCE_BYTES], dtype=np.uint8)
        )[:size].astype(bool)
        pos += _PRESENCE_BYTES
        n_present = int(presence.sum())
        if pos + 2 * n_present > len(raw):
            raise PayloadDecodeError(
                "pose payload length inconsistent with presence bitmap"
            )
        keypoints = []
        for present in presence:
            if present:
                qx, qy = raw[pos], raw[pos + 1]
                pos += 2
                if qx > 100 or qy > 100:
                    raise PayloadDecodeError("quantized coordinate out of range")
                keypoints.append(PoseKeypoint(True, qx, qy))
            else:
                keypoints.append(PoseKeypoint.absent())
        try:
            persons.append(PosePerson(tuple(keypoints), schema_id))
        except InvalidArgument as e:
            raise PayloadDecodeError(str(e))
    if pos != len(raw):
        raise PayloadDecodeError("trailing bytes after last person")
    try:
        return PoseMap(tuple(persons))
    except InvalidArgument as e:
        raise PayloadDecodeError(str(e))


def _pack_grid(grid: np.ndarray) -> bytes:
    return np.packbits(grid.astype(np.uint8), axis=1).tobytes()


def _unpack_grid(data: bytes, width: int, height: int) -> np.ndarray:
    row_bytes = (width + 7) // 8
    if len(data) != row_bytes * height:
        raise PayloadDecodeError("bit-packed grid length mismatch")
    rows = np.frombuffer(data, dtype=np.uint8).reshape(height, row_bytes)
    return np.unpackbits(rows, axis=1)[:, :width].astype(bool)


def encode_edges(e: EdgeMap, codec_id: int = EDGE_CODEC_REFERENCE,
                 level: int = zstd.DEFAULT_LEVEL,
                 external_payload: bytes = None) -> bytes:
    """Layer-2 payload for the edge variant."""
    params = bytes([e.downscale, e.threshold, 0, 0])
    if codec_id == EDGE_CODEC_REFERENCE:
        return params + zstd.compress(_pack_grid(e.grid), level)
    if codec_id == EDGE_CODEC_EXTERNAL:
        if external_payload is None:
            raise InvalidArgument("codec 2 requires an externally produced payload")
        return params + external_payload
    raise InvalidArgument("unknown edge codec_id %d" % codec_id)


def decode_edges(payload: bytes, codec_id: int, image_width: int,
                 image_height: int, external_decoder=None) -> EdgeMap:
    """Recover the EdgeMap; grid dimensions derive from the image dimensions
    and the downscale factor stored in the parameter block."""
    if len(payload) < 4:
        raise PayloadDecodeError("edge payload shorter than parameter block")
    downscale, threshold = payload[0], payload[1]
    if downscale == 0:
        raise PayloadDecodeError("edge downscale must be nonzero")
    width = image_width // downscale
    height = image_height // downscale
    body = payload[4:]
    if codec_id == EDGE_CODEC_REFERENCE:
        grid = _unpack_grid(zstd.decompress(body), width, height)
    elif codec_id == EDGE_CODEC_EXTERNAL:
        if external_decoder is None:
            raise BackendError("no external decoder registered for edge codec 2")
        decoded = np.asarray(external_decoder(body, width, height))
        grid = decoded >= threshold if decoded.dtype != bool else decoded
    else:
        raise PayloadDecodeError("unknown edge codec_id %d" % codec_id)
    return EdgeMap(grid, downscale=downscale, threshold=threshold)


_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = _SOBEL_X.T


def _convolve3x3(field2d: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    padded = np.pad(field2d, 1, mode="edge")
    out = np.zeros_like(field2d)
    for dy in range(3):
        for dx in range(3):
            out += kernel[dy, dx] * padded[dy:dy + field2d.shape[0],
                                           dx:dx + field2d.shape[1]]
    return out


def detect_edges_fallback(img: ImageBuffer,
                          threshold: int = DEFAULT_EDGE_THRESHOLD) -> EdgeMap:
    """Deterministic model-free edge extractor: Sobel gradient magnitude on
    luma (scaled to the 0-255 range), 2x2 max-pool downsample, threshold."""
    if img.width % 2 or img.height % 2:
        raise InvalidArgument("image dimensions must be divisible by 2")
    luma = img.luminance()
    gx = _convolve3x3(luma, _SOBEL_X)
    gy = _convolve3x3(luma, _SOBEL_Y)
    mag = np.hypot(gx, gy) / 4.0
    pooled = mag.reshape(img.height // 2, 2, img.width // 2, 2).max(axis=(1, 3))
    return EdgeMap(pooled >= threshold, downscale=2, threshold=threshold)
