"""Encode/decode orchestration: drives extractors, assembles containers,
builds condition sets and requests generation from a backend provider.
"""

from dataclasses import dataclass, field
from typing import Optional, Union

from .container import (
    LayerId,
    LayerRecord,
    LayeredBitstream,
    ContainerHeader,
    EDGE_CODEC_REFERENCE,
    POSE_CODEC_ZSTD,
    TEXTURE_CODEC_STORED,
    StructureVariant,
    parse,
)
from .errors import EncodeError, InvalidArgument, LcmcError
from .image import ImageBuffer
from .render import ConditionSet, render_edges, render_pose, render_texture
from .semantic import SemanticPrior, choose_semantic_payload, decode_semantic
from .structure import (
    EdgeMap,
    PoseMap,
    decode_edges,
    decode_pose,
    encode_edges,
    encode_pose,
)
from .texture import TextureMap, decode_texture, encode_texture, extract_texture

#: Minimum pose bounding-box coverage for the auto variant to pick pose.
POSE_AREA_THRESHOLD = 0.40


@dataclass(frozen=True)
class LayeredPriors:
    semantic: SemanticPrior
    structure: Optional[Union[PoseMap, EdgeMap]] = None
    texture: Optional[TextureMap] = None

    def __post_init__(self):
        if self.texture is not None and self.structure is None:
            raise InvalidArgument("texture prior requires a structure prior")

    @property
    def fidelity_level(self) -> int:
        if self.texture is not None:
            return 3
        if self.structure is not None:
            return 2
        return 1


@dataclass(frozen=True)
class GenerationParams:
    guidance_scale: float = 7.5
    steps: int = 50
    condition_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise InvalidArgument("steps must be >= 1")
        if self.guidance_scale < 0:
            raise InvalidArgument("guidance_scale must be >= 0")


@dataclass(frozen=True)
class GeneratedImage:
    image: ImageBuffer
    fidelity_level: int
    params: GenerationParams


def _build_structure_layer(img, variant, extractors):
    """Returns (StructureVariant, LayerRecord, prior) for the chosen variant."""
    pose = None
    if variant in ("pose", "auto"):
        try:
            pose = extractors.pose(img)
        except LcmcError as e:
            if variant == "pose":
                raise EncodeError("structure", str(e))
            pose = None
    if variant == "pose" or (variant == "auto" and pose is not None and any(
            p.bounding_box_area() >= POSE_AREA_THRESHOLD for p in pose.persons)):
        if pose is None:
            raise EncodeError("structure", "pose extractor returned no persons")
        rec = LayerRecord(LayerId.STRUCTURE, POSE_CODEC_ZSTD, encode_pose(pose))
        return StructureVariant.POSE, rec, pose
    try:
        edges = extractors.edges(img)
    except LcmcError as e:
        raise EncodeError("structure", str(e))
    rec = LayerRecord(LayerId.STRUCTURE, EDGE_CODEC_REFERENCE,
                      encode_edges(edges))
    return StructureVariant.EDGE, rec, edges


def encode_image(img: ImageBuffer, variant: str,
                 extractors) -> LayeredBitstream:
    """Extract all three priors from an image and assemble a full container.

    `variant` is "edge", "pose" or "auto"; auto picks pose when at least one
    detected person's bounding box covers 40% of the image area.
    """
    if variant not in ("edge", "pose", "auto"):
        raise InvalidArgument("variant must be edge, pose or auto")
    try:
        caption = extractors.caption(img)
    except LcmcError as e:
        raise EncodeError("semantic", str(e))
    codec_id, payload = choose_semantic_payload(SemanticPrior(caption))
    semantic_rec = LayerRecord(LayerId.SEMANTIC, codec_id, payload)

    structure_variant, structure_rec, _ = _build_structure_layer(
        img, variant, extractors
    )

    texture_rec = LayerRecord(
        LayerId.TEXTURE, TEXTURE_CODEC_STORED, encode_texture(extract_texture(img))
    )

    bs = LayeredBitstream(
        ContainerHeader(img.width, img.height, structure_variant),
        (semantic_rec, structure_rec, texture_rec),
    )
    bs.validate()
    return bs


def decode_layers(data: bytes, k: int) -> LayeredPriors:
    """Decode the priors of layers 1..k from a serialized container."""
    if k not in (1, 2, 3):
        raise InvalidArgument("fidelity level must be 1, 2 or 3")
    bs = parse(data)
    present = {rec.layer_id for rec in bs.layers}
    for level, layer_id in ((1, LayerId.SEMANTIC), (2, LayerId.STRUCTURE),
                            (3, LayerId.TEXTURE)):
        if level <= k and layer_id not in present:
            raise InvalidArgument(
                "requested level %d but layer %d is absent" % (k, layer_id)
            )
    sem_rec = bs.layer(LayerId.SEMANTIC)
    semantic = decode_semantic(sem_rec.payload, sem_rec.codec_id)
    structure = None
    if k >= 2:
        rec = bs.layer(LayerId.STRUCTURE)
        if bs.header.structure_variant == StructureVariant.POSE:
            structure = decode_pose(rec.payload, rec.codec_id)
        else:
            structure = decode_edges(rec.payload, rec.codec_id,
                                     bs.header.image_width,
                                     bs.header.image_height)
    texture = None
    if k >= 3:
        texture = decode_texture(bs.layer(LayerId.TEXTURE).payload)
    return LayeredPriors(semantic, structure, texture)


def build_condition_set(priors: LayeredPriors, w: int, h: int) -> ConditionSet:
    """Map priors to the conditioning inputs of their fidelity level."""
    structure_image = None
    structure_kind = None
    if priors.structure is not None:
        if isinstance(priors.structure, PoseMap):
            structure_image = render_pose(priors.structure, w, h)
            structure_kind = "pose"
        else:
            structure_image = render_edges(priors.structure, w, h)
            structure_kind = "edge"
    texture_image = None
    if priors.texture is not None:
        texture_image = render_texture(priors.texture, w, h)
    return ConditionSet(priors.semantic.text, structure_image,
                        structure_kind, texture_image)


def reconstruct(priors: LayeredPriors, w: int, h: int,
                params: GenerationParams, backend) -> GeneratedImage:
    """Render conditions and request one generation from the backend."""
    conditions = build_condition_set(priors, w, h)
    image = backend.generate(conditions, params, w, h)
    if image.width != w or image.height != h:
        raise LcmcError(
            "backend returned %dx%d, expected %dx%d"
            % (image.width, image.height, w, h)
        )
    return GeneratedImage(image, priors.fidelity_level, params)
