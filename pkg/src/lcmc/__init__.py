"""Layered cross-modal image codec.

Compresses images into a prefix-decodable three-layer bitstream (caption,
pose or edge structure, 8x8 colormap) and reconstructs them through a
pluggable generative backend.
"""

from .container import (
    ContainerHeader,
    LayerId,
    LayerRecord,
    LayeredBitstream,
    StructureVariant,
    bits_per_pixel,
    parse,
    serialize,
    truncate_to_layer,
)
from .edits import (
    RegionRect,
    edge_stencil,
    erase_object,
    pose_translate,
    texture_patch,
    texture_swap,
)
from .image import ImageBuffer, load_image, save_image
from .pipeline import (
    GeneratedImage,
    GenerationParams,
    LayeredPriors,
    decode_layers,
    encode_image,
    reconstruct,
)
from .render import ConditionSet, render_edges, render_pose, render_texture
from .semantic import SemanticPrior, decode_semantic, encode_semantic
from .structure import (
    EdgeMap,
    PoseKeypoint,
    PoseMap,
    PosePerson,
    decode_edges,
    decode_pose,
    dequantize_coord,
    detect_edges_fallback,
    encode_edges,
    encode_pose,
    quantize_coord,
)
from .texture import TextureMap, decode_texture, encode_texture, extract_texture

__version__ = "0.1.0"
