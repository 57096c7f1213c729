"""Layered bitstream container: a 10-byte header followed by self-delimiting
TLV layer records.

Wire format (all multi-byte integers big-endian):

    header   := magic[4]="LCMC" version:u8 width:u16 height:u16 variant:u8
    record   := layer_id:u8 codec_id:u8 payload_length:u32 payload[...]
    stream   := header record*

Records are self-delimiting and layer ids strictly ascend, so any prefix
ending at a record boundary is itself a valid stream; that is what makes
byte-level truncation realize layer scalability.
"""

import enum
import struct
from dataclasses import dataclass, field

from .errors import (
    BadMagic,
    DuplicateLayer,
    InvalidArgument,
    InvariantViolation,
    LadderViolation,
    LayerOrderError,
    TruncatedStream,
    UnknownCodec,
    UnsupportedVersion,
)

MAGIC = b"LCMC"
VERSION = 1
HEADER_SIZE = 10
RECORD_OVERHEAD = 6
MIN_DIMENSION = 64

_HEADER = struct.Struct(">4sBHHB")
_RECORD_HEAD = struct.Struct(">BBI")


class StructureVariant(enum.IntEnum):
    NONE = 0
    EDGE = 1
    POSE = 2


class LayerId(enum.IntEnum):
    SEMANTIC = 1
    STRUCTURE = 2
    TEXTURE = 3


# Registered codec ids per (layer, variant). The structure layer's payload
# interpretation is selected by the header's structure_variant.
SEMANTIC_CODEC_RAW = 0
SEMANTIC_CODEC_ZSTD = 1
POSE_CODEC_RAW = 0
POSE_CODEC_ZSTD = 1
EDGE_CODEC_REFERENCE = 1
EDGE_CODEC_EXTERNAL = 2
TEXTURE_CODEC_STORED = 0

_REGISTERED = {
    (LayerId.SEMANTIC, None): {SEMANTIC_CODEC_RAW, SEMANTIC_CODEC_ZSTD},
    (LayerId.STRUCTURE, StructureVariant.POSE): {POSE_CODEC_RAW, POSE_CODEC_ZSTD},
    (LayerId.STRUCTURE, StructureVariant.EDGE): {
        EDGE_CODEC_REFERENCE,
        EDGE_CODEC_EXTERNAL,
    },
    (LayerId.TEXTURE, None): {TEXTURE_CODEC_STORED},
}


def registered_codecs(layer_id: LayerId, variant: StructureVariant) -> set:
    key = (layer_id, variant if layer_id == LayerId.STRUCTURE else None)
    return _REGISTERED.get(key, set())


@dataclass(frozen=True)
class ContainerHeader:
    image_width: int
    image_height: int
    structure_variant: StructureVariant = StructureVariant.NONE
    version: int = VERSION

    def validate(self):
        if self.version != VERSION:
            raise InvariantViolation("header version must equal %d" % VERSION)
        for name, v in (("image_width", self.image_width),
                        ("image_height", self.image_height)):
            if not (MIN_DIMENSION <= v <= 0xFFFF):
                raise InvariantViolation(
                    "%s must be in [%d, 65535], got %d" % (name, MIN_DIMENSION, v)
                )
        if not isinstance(self.structure_variant, StructureVariant):
            raise InvariantViolation("structure_variant must be a StructureVariant")


@dataclass(frozen=True)
class LayerRecord:
    layer_id: LayerId
    codec_id: int
    payload: bytes

    @property
    def payload_length(self) -> int:
        return len(self.payload)

    @property
    def record_length(self) -> int:
        return RECORD_OVERHEAD + len(self.payload)

    def validate(self, variant: StructureVariant):
        if not isinstance(self.layer_id, LayerId):
            raise InvariantViolation("unknown layer_id %r" % (self.layer_id,))
        if not (0 <= self.codec_id <= 0xFF):
            raise InvariantViolation("codec_id out of byte range")
        if self.codec_id not in registered_codecs(self.layer_id, variant):
            raise UnknownCodec(
                "codec_id %d is not registered for layer %d"
                % (self.codec_id, self.layer_id)
            )
        if len(self.payload) > 0xFFFFFFFF:
            raise InvariantViolation("payload exceeds u32 length field")


@dataclass(frozen=True)
class LayeredBitstream:
    header: ContainerHeader
    layers: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    def validate(self):
        self.header.validate()
        ids = [rec.layer_id for rec in self.layers]
        if any(b <= a for a, b in zip(ids, ids[1:])):
            if len(set(ids)) != len(ids):
                raise DuplicateLayer("layer_id repeated: %r" % (ids,))
            raise LayerOrderError("layer ids must strictly ascend: %r" % (ids,))
        present = set(ids)
        if LayerId.STRUCTURE in present and LayerId.SEMANTIC not in present:
            raise LadderViolation("structure layer requires the semantic layer")
        if LayerId.TEXTURE in present and not (
            LayerId.SEMANTIC in present and LayerId.STRUCTURE in present
        ):
            raise LadderViolation("texture layer requires semantic and structure")
        # Only the forward direction is enforced: a variant byte without a
        # structure layer is exactly what byte-prefix truncation produces.
        if (LayerId.STRUCTURE in present
                and self.header.structure_variant == StructureVariant.NONE):
            raise InvariantViolation(
                "structure layer present but structure_variant is none"
            )
        for rec in self.layers:
            rec.validate(self.header.structure_variant)

    def layer(self, layer_id: LayerId):
        """Return the record for `layer_id`, or None."""
        for rec in self.layers:
            if rec.layer_id == layer_id:
                return rec
        return None

    def replace_layer(self, record: LayerRecord) -> "LayeredBitstream":
        """Return a copy with the record of the same layer_id swapped out."""
        layers = tuple(
            record if rec.layer_id == record.layer_id else rec
            for rec in self.layers
        )
        out = LayeredBitstream(self.header, layers)
        out.validate()
        return out


def serialize(bs: LayeredBitstream) -> bytes:
    """Serialize a validated bitstream to its canonical byte form."""
    bs.validate()
    parts = [
        _HEADER.pack(
            MAGIC,
            bs.header.version,
            bs.header.image_width,
            bs.header.image_height,
            int(bs.header.structure_variant),
        )
    ]
    for rec in bs.layers:
        parts.append(_RECORD_HEAD.pack(int(rec.layer_id), rec.codec_id,
                                       len(rec.payload)))
        parts.append(rec.payload)
    return b"".join(parts)


def parse(data: bytes) -> LayeredBitstream:
    """Parse bytes into a LayeredBitstream, rejecting malformed input."""
    if len(data) < HEADER_SIZE:
        raise TruncatedStream("stream shorter than the fixed header")
    magic, version, width, height, variant = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagic("bad magic %r" % magic)
    if version != VERSION:
        raise UnsupportedVersion("unsupported version %d" % version)
    try:
        variant = StructureVariant(variant)
    except ValueError:
        raise InvariantViolation("unknown structure_variant %d" % variant)
    header = ContainerHeader(width, height, variant)

    layers = []
    pos = HEADER_SIZE
    while pos < len(data):
        if pos + RECORD_OVERHEAD > len(data):
            raise TruncatedStream("truncated record header at offset %d" % pos)
        layer_id, codec_id, length = _RECORD_HEAD.unpack_from(data, pos)
        pos += RECORD_OVERHEAD
        if pos + length > len(data):
            raise TruncatedStream(
                "record payload overruns stream at offset %d" % pos
            )
        try:
            layer_id = LayerId(layer_id)
        except ValueError:
            raise InvariantViolation("unknown layer_id %d" % layer_id)
        layers.append(LayerRecord(layer_id, codec_id, bytes(data[pos:pos + length])))
        pos += length

    bs = LayeredBitstream(header, tuple(layers))
    bs.validate()
    return bs


def truncate_to_layer(data: bytes, k: int) -> bytes:
    """Shortest prefix of `data` containing exactly the layers with id <= k."""
    if k < 1:
        raise InvalidArgument("k must be >= 1, got %d" % k)
    bs = parse(data)
    end = HEADER_SIZE
    for rec in bs.layers:
        if rec.layer_id > k:
            break
        end += rec.record_length
    return bytes(data[:end])


def bits_per_pixel(data: bytes) -> float:
    """Total container bits (header and framing included) per image pixel."""
    bs = parse(data)
    return len(data) * 8 / (bs.header.image_width * bs.header.image_height)
