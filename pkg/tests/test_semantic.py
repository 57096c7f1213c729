import random
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcmc import errors
from lcmc.container import SEMANTIC_CODEC_RAW
from lcmc.semantic import (
    MAX_CAPTION_BYTES,
    SemanticPrior,
    choose_semantic_payload,
    decode_semantic,
    encode_semantic,
)
from lcmc import zstd

SAMPLE_CAPTION = "a photo of an astronaut riding a horse"


def test_round_trip_sample_caption():
    payload = encode_semantic(SemanticPrior(SAMPLE_CAPTION))
    assert decode_semantic(payload).text == SAMPLE_CAPTION


def test_round_trip_empty():
    payload = encode_semantic(SemanticPrior(""))
    assert decode_semantic(payload).text == ""


def test_200_char_caption_compresses():
    # Representative English caption, repeated clause keeps it realistic.
    caption = ("a highly detailed digital painting of a castle on a cliff "
               "overlooking the sea at sunset, dramatic lighting, vivid "
               "colors, intricate gothic architecture, volumetric light, "
               "sharp focus and very fine detail")[:200]
    assert len(caption) == 200
    payload = encode_semantic(SemanticPrior(caption))
    assert len(payload) <= 200


def test_round_trip_random_printable():
    rng = random.Random(42)
    alphabet = string.printable
    for _ in range(500):
        text = "".join(rng.choice(alphabet)
                       for _ in range(rng.randrange(0, 300)))
        payload = encode_semantic(SemanticPrior(text))
        assert decode_semantic(payload).text == text


@settings(max_examples=100)
@given(st.text(max_size=500))
def test_round_trip_unicode(text):
    prior = SemanticPrior(text)
    if len(text.encode("utf-8")) > MAX_CAPTION_BYTES:
        with pytest.raises(errors.InvalidArgument):
            encode_semantic(prior)
        return
    assert decode_semantic(encode_semantic(prior)).text == text


def test_caption_cap_enforced():
    with pytest.raises(errors.InvalidArgument):
        encode_semantic(SemanticPrior("x" * (MAX_CAPTION_BYTES + 1)))


def test_truncated_payload_rejected():
    payload = encode_semantic(SemanticPrior(SAMPLE_CAPTION))
    with pytest.raises(errors.PayloadDecodeError):
        decode_semantic(payload[:len(payload) // 2])


def test_invalid_utf8_rejected():
    payload = zstd.compress(b"\xff\xfe\x80")
    with pytest.raises(errors.TextEncodingError):
        decode_semantic(payload)


def test_raw_fallback_on_tiny_strings():
    codec_id, payload = choose_semantic_payload(SemanticPrior("hi"))
    assert codec_id == SEMANTIC_CODEC_RAW
    assert payload == b"hi"
    assert decode_semantic(payload, codec_id).text == "hi"


def test_no_pathological_inflation():
    # Raw fallback bounds the payload at the caption's own byte length.
    for text in ("", "a", "hi", SAMPLE_CAPTION, "z" * 1000):
        codec_id, payload = choose_semantic_payload(SemanticPrior(text))
        assert len(payload) <= max(len(text.encode("utf-8")), 1)
        assert decode_semantic(payload, codec_id).text == text
