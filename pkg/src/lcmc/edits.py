"""Bitstream-level editing: each operation decodes only the targeted layer
payload, modifies it, and re-encodes it canonically. Every other layer
record stays byte-identical, and no operation ever builds a ConditionSet
or talks to a generation backend.
"""

from dataclasses import dataclass

import numpy as np

from .container import (
    LayerId,
    LayeredBitstream,
    LayerRecord,
    StructureVariant,
)
from .errors import InvalidArgument
from .structure import (
    EdgeMap,
    PoseKeypoint,
    PoseMap,
    PosePerson,
    decode_edges,
    decode_pose,
    encode_edges,
    encode_pose,
)
from .texture import GRID_SIZE, TextureMap, decode_texture, encode_texture

ERASE_FALLBACK_FILL = (128, 128, 128)


@dataclass(frozen=True)
class RegionRect:
    """Axis-aligned region in normalized image coordinates."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (0.0 <= self.x0 < self.x1 <= 1.0
                and 0.0 <= self.y0 < self.y1 <= 1.0):
            raise InvalidArgument("region must have positive area inside [0,1]^2")

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


def _require_variant(bs: LayeredBitstream, variant: StructureVariant, op: str):
    if bs.header.structure_variant != variant:
        raise InvalidArgument(
            "%s requires the %s structure variant" % (op, variant.name.lower())
        )
    if bs.layer(LayerId.STRUCTURE) is None:
        raise InvalidArgument("%s requires a structure layer" % op)


def _decoded_pose(bs: LayeredBitstream) -> PoseMap:
    rec = bs.layer(LayerId.STRUCTURE)
    return decode_pose(rec.payload, rec.codec_id)


def _decoded_edges(bs: LayeredBitstream) -> EdgeMap:
    rec = bs.layer(LayerId.STRUCTURE)
    return decode_edges(rec.payload, rec.codec_id,
                        bs.header.image_width, bs.header.image_height)


def _with_pose(bs: LayeredBitstream, pose: PoseMap) -> LayeredBitstream:
    rec = bs.layer(LayerId.STRUCTURE)
    return bs.replace_layer(
        LayerRecord(LayerId.STRUCTURE, rec.codec_id, encode_pose(pose))
    )


def _with_edges(bs: LayeredBitstream, edges: EdgeMap) -> LayeredBitstream:
    rec = bs.layer(LayerId.STRUCTURE)
    return bs.replace_layer(
        LayerRecord(LayerId.STRUCTURE, rec.codec_id, encode_edges(edges))
    )


def _with_texture(bs: LayeredBitstream, tex: TextureMap) -> LayeredBitstream:
    rec = bs.layer(LayerId.TEXTURE)
    return bs.replace_layer(
        LayerRecord(LayerId.TEXTURE, rec.codec_id, encode_texture(tex))
    )


def pose_translate(bs: LayeredBitstream, person: int, keypoints,
                   dx: float, dy: float) -> LayeredBitstream:
    """Shift selected keypoints by (dx, dy) in normalized coordinates,
    clamped to [0, 1] and re-quantized."""
    _require_variant(bs, StructureVariant.POSE, "pose_translate")
    pose = _decoded_pose(bs)
    if not (0 <= person < len(pose.persons)):
        raise InvalidArgument("person index %d out of range" % person)
    target = pose.persons[person]
    indices = set(keypoints)
    for i in indices:
        if not (0 <= i < len(target.keypoints)):
            raise InvalidArgument("keypoint index %d out of range" % i)
    moved = []
    for i, k in enumerate(target.keypoints):
        if i in indices and k.present:
            nx = min(1.0, max(0.0, k.x + dx))
            ny = min(1.0, max(0.0, k.y + dy))
            moved.append(PoseKeypoint.at(nx, ny))
        else:
            moved.append(k)
    persons = list(pose.persons)
    persons[person] = PosePerson(tuple(moved), target.schema_id)
    return _with_pose(bs, PoseMap(tuple(persons)))


def edge_stencil(bs: LayeredBitstream, stencil: np.ndarray,
                 mode: str) -> LayeredBitstream:
    """OR (add) or AND-NOT (subtract) a stencil into the edge grid."""
    _require_variant(bs, StructureVariant.EDGE, "edge_stencil")
    edges = _decoded_edges(bs)
    stencil = np.asarray(stencil, dtype=bool)
    if stencil.shape != edges.grid.shape:
        raise InvalidArgument(
            "stencil shape %r does not match grid %r"
            % (stencil.shape, edges.grid.shape)
        )
    if mode == "add":
        grid = edges.grid | stencil
    elif mode == "subtract":
        grid = edges.grid & ~stencil
    else:
        raise InvalidArgument("mode must be 'add' or 'subtract'")
    return _with_edges(bs, EdgeMap(grid, edges.downscale, edges.threshold))


def texture_patch(bs: LayeredBitstream, cells) -> LayeredBitstream:
    """Replace listed texture cells; cells is a list of (i, j, (r, g, b))
    with i the row and j the column."""
    rec = bs.layer(LayerId.TEXTURE)
    if rec is None:
        raise InvalidArgument("texture_patch requires a texture layer")
    if not cells:
        return bs
    tex = decode_texture(rec.payload)
    grid = tex.cells.copy()
    for i, j, rgb in cells:
        if not (0 <= i < GRID_SIZE and 0 <= j < GRID_SIZE):
            raise InvalidArgument("cell index (%d, %d) out of range" % (i, j))
        grid[i, j] = rgb
    return _with_texture(bs, TextureMap(grid))


def texture_swap(bs: LayeredBitstream,
                 donor: LayeredBitstream) -> LayeredBitstream:
    """Replace bs's texture payload with the donor's, byte for byte."""
    rec = bs.layer(LayerId.TEXTURE)
    donor_rec = donor.layer(LayerId.TEXTURE)
    if rec is None or donor_rec is None:
        raise InvalidArgument("texture_swap requires a texture layer on both sides")
    decode_texture(donor_rec.payload)  # reject incompatible grid configurations
    return bs.replace_layer(
        LayerRecord(LayerId.TEXTURE, donor_rec.codec_id, donor_rec.payload)
    )


def _erase_structure(bs: LayeredBitstream,
                     region: RegionRect) -> LayeredBitstream:
    if bs.header.structure_variant == StructureVariant.EDGE:
        edges = _decoded_edges(bs)
        # A grid cell's pixel footprint spans [c*s, (c+1)*s) in pixels.
        w, h = bs.header.image_width, bs.header.image_height
        cols = np.arange(edges.width)
        rows = np.arange(edges.height)
        s = edges.downscale
        col_hit = (cols * s < region.x1 * w) & ((cols + 1) * s > region.x0 * w)
        row_hit = (rows * s < region.y1 * h) & ((rows + 1) * s > region.y0 * h)
        grid = edges.grid & ~np.outer(row_hit, col_hit)
        return _with_edges(bs, EdgeMap(grid, edges.downscale, edges.threshold))
    pose = _decoded_pose(bs)
    persons = []
    for person in pose.persons:
        kps = tuple(
            PoseKeypoint.absent() if k.present and region.contains(k.x, k.y)
            else k
            for k in person.keypoints
        )
        if any(k.present for k in kps):
            persons.append(PosePerson(kps, person.schema_id))
    if not persons:
        raise InvalidArgument("erase would leave the pose map empty")
    return _with_pose(bs, PoseMap(tuple(persons)))


def _erase_texture(bs: LayeredBitstream, region: RegionRect) -> LayeredBitstream:
    tex = decode_texture(bs.layer(LayerId.TEXTURE).payload)
    cols = np.arange(GRID_SIZE)
    # Cell (i, j) covers [j/8, (j+1)/8) x [i/8, (i+1)/8) in normalized space.
    col_hit = (cols / GRID_SIZE < region.x1) & ((cols + 1) / GRID_SIZE > region.x0)
    row_hit = (cols / GRID_SIZE < region.y1) & ((cols + 1) / GRID_SIZE > region.y0)
    hit = np.outer(row_hit, col_hit)
    grid = tex.cells.copy()
    if hit.all():
        grid[:] = ERASE_FALLBACK_FILL
    else:
        survivors = tex.cells[~hit].astype(np.float64)
        grid[hit] = np.floor(survivors.mean(axis=0) + 0.5).astype(np.uint8)
    return _with_texture(bs, TextureMap(grid))


def erase_object(bs: LayeredBitstream, region: RegionRect) -> LayeredBitstream:
    """Jointly mask a region out of the structure and texture layers."""
    if bs.layer(LayerId.STRUCTURE) is None or bs.layer(LayerId.TEXTURE) is None:
        raise InvalidArgument("erase_object requires structure and texture layers")
    return _erase_texture(_erase_structure(bs, region), region)
