import os
import random

import numpy as np
import pytest

from lcmc.container import (
    ContainerHeader,
    LayerId,
    LayerRecord,
    LayeredBitstream,
    StructureVariant,
    registered_codecs,
)
from lcmc.structure import (
    BODY_KEYPOINTS,
    FACE_KEYPOINTS,
    PoseKeypoint,
    PoseMap,
    PosePerson,
)

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
CORPUS = os.path.join(FIXTURES, "corpus")


def random_bitstream(rng: random.Random) -> LayeredBitstream:
    """Independent generator of valid bitstreams; the round-trip oracle."""
    width = rng.randrange(64, 1024)
    height = rng.randrange(64, 1024)
    n_layers = rng.choice([0, 1, 2, 3])
    layer_ids = [LayerId.SEMANTIC, LayerId.STRUCTURE,
                 LayerId.TEXTURE][:n_layers]
    if LayerId.STRUCTURE in layer_ids:
        variant = rng.choice([StructureVariant.EDGE, StructureVariant.POSE])
    else:
        variant = rng.choice(list(StructureVariant))
    header = ContainerHeader(width, height, variant)
    layers = []
    for layer_id in layer_ids:
        codec_id = rng.choice(sorted(registered_codecs(layer_id, variant)))
        payload = rng.randbytes(rng.randrange(0, 300))
        layers.append(LayerRecord(layer_id, codec_id, payload))
    return LayeredBitstream(header, tuple(layers))


def random_pose_map(rng: random.Random, max_persons: int = 3) -> PoseMap:
    persons = []
    for _ in range(rng.randrange(1, max_persons + 1)):
        keypoints = []
        for _ in range(BODY_KEYPOINTS + FACE_KEYPOINTS):
            if rng.random() < 0.6:
                keypoints.append(PoseKeypoint(True, rng.randrange(101),
                                              rng.randrange(101)))
            else:
                keypoints.append(PoseKeypoint.absent())
        if not any(k.present for k in keypoints):
            keypoints[0] = PoseKeypoint(True, 50, 50)
        persons.append(PosePerson(tuple(keypoints)))
    return PoseMap(tuple(persons))


def full_person() -> PosePerson:
    """One person with every keypoint present, bbox area ~0.5."""
    kps = tuple(
        PoseKeypoint(True, 20 + (i * 7) % 61, 15 + (i * 11) % 71)
        for i in range(BODY_KEYPOINTS + FACE_KEYPOINTS)
    )
    return PosePerson(kps)


def random_image(rng: np.random.Generator, w: int = 512, h: int = 512):
    from lcmc.image import ImageBuffer

    return ImageBuffer(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))


@pytest.fixture
def rng():
    return random.Random(0xC0DEC)


@pytest.fixture
def nprng():
    return np.random.default_rng(0xC0DEC)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def corpus_dir():
    return CORPUS
