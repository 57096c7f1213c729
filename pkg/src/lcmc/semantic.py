"""Semantic layer: the caption string, Zstandard-compressed."""

from dataclasses import dataclass

from . import zstd
from .container import SEMANTIC_CODEC_RAW, SEMANTIC_CODEC_ZSTD
from .errors import InvalidArgument, PayloadDecodeError, TextEncodingError

MAX_CAPTION_BYTES = 4096


@dataclass(frozen=True)
class SemanticPrior:
    text: str

    def encoded_bytes(self) -> bytes:
        raw = self.text.encode("utf-8")
        if len(raw) > MAX_CAPTION_BYTES:
            raise InvalidArgument(
                "caption exceeds %d encoded bytes" % MAX_CAPTION_BYTES
            )
        return raw


def encode_semantic(p: SemanticPrior, level: int = zstd.DEFAULT_LEVEL) -> bytes:
    """Compress the caption; returns the layer-1 payload for codec_id 1."""
    return zstd.compress(p.encoded_bytes(), level)


def choose_semantic_payload(p: SemanticPrior,
                            level: int = zstd.DEFAULT_LEVEL) -> tuple:
    """Return (codec_id, payload), falling back to raw storage when
    compression would inflate the caption."""
    raw = p.encoded_bytes()
    compressed = zstd.compress(raw, level)
    if len(compressed) < len(raw):
        return SEMANTIC_CODEC_ZSTD, compressed
    return SEMANTIC_CODEC_RAW, raw


def decode_semantic(payload: bytes,
                    codec_id: int = SEMANTIC_CODEC_ZSTD) -> SemanticPrior:
    """Recover the exact caption from a layer-1 payload."""
    if codec_id == SEMANTIC_CODEC_RAW:
        raw = payload
    elif codec_id == SEMANTIC_CODEC_ZSTD:
        raw = zstd.decompress(payload)
    else:
        raise PayloadDecodeError("unknown semantic codec_id %d" % codec_id)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise TextEncodingError("caption bytes are not valid UTF-8: %s" % e)
    return SemanticPrior(text)
