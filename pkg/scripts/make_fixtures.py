#!/usr/bin/env python3
"""Regenerates the shipped test fixtures under tests/fixtures/:

* corpus/      - ten synthetic 512x512 PNGs plus caption/pose sidecars
* golden_pose.lcmc, golden_edge.lcmc - reference containers
* manifest.json - per-file header fields and byte counts
* *.hex.txt    - documented hex dumps of the golden vectors

Run from the repository root: python scripts/make_fixtures.py
"""

import json
import os

import numpy as np

from lcmc.cli import OfflineExtractors
from lcmc.container import bits_per_pixel, serialize
from lcmc.image import ImageBuffer, save_image
from lcmc.pipeline import encode_image
from lcmc.providers import pose_to_json
from lcmc.structure import PoseKeypoint, PoseMap, PosePerson

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures")

POSE_CAPTION = "a photo of an astronaut riding a horse"


def full_person() -> PosePerson:
    """All 88 keypoints present: a standing figure spanning ~42% of the
    frame, with the face keypoints clustered around the head."""
    body = [
        (0.50, 0.15), (0.50, 0.25), (0.38, 0.25), (0.34, 0.42), (0.32, 0.58),
        (0.62, 0.25), (0.66, 0.42), (0.68, 0.58), (0.44, 0.52), (0.43, 0.70),
        (0.42, 0.86), (0.56, 0.52), (0.57, 0.70), (0.58, 0.86), (0.47, 0.12),
        (0.53, 0.12), (0.44, 0.14), (0.56, 0.14),
    ]
    face = [
        (0.44 + 0.12 * (i % 10) / 9.0, 0.08 + 0.10 * (i // 10) / 6.0)
        for i in range(70)
    ]
    return PosePerson(tuple(PoseKeypoint.at(x, y) for x, y in body + face))


def corpus_images():
    size = 512
    y, x = np.mgrid[0:size, 0:size]
    imgs = {}

    imgs["constant"] = np.full((size, size, 3), (100, 150, 200), np.uint8)

    grad = (x * 255 // (size - 1)).astype(np.uint8)
    imgs["gradient_h"] = np.stack([grad, grad, grad], axis=-1)

    grad_v = (y * 255 // (size - 1)).astype(np.uint8)
    imgs["gradient_v"] = np.stack([grad_v, grad_v // 2, 255 - grad_v], axis=-1)

    halves = np.zeros((size, size, 3), np.uint8)
    halves[:, size // 2:] = 255
    imgs["halves"] = halves

    circle = np.zeros((size, size, 3), np.uint8)
    circle[(x - 256) ** 2 + (y - 256) ** 2 <= 150 ** 2] = (220, 60, 60)
    imgs["circle"] = circle

    stripes = np.zeros((size, size, 3), np.uint8)
    stripes[(y // 64) % 2 == 0] = (30, 120, 210)
    imgs["stripes"] = stripes

    checker = np.where(((x // 128 + y // 128) % 2 == 0)[..., None],
                       np.uint8(240), np.uint8(40))
    imgs["checker"] = np.broadcast_to(checker, (size, size, 3)).copy()

    radial = np.clip(np.hypot(x - 256, y - 256) / 362 * 255, 0, 255)
    imgs["radial"] = np.stack([radial, radial, radial], -1).astype(np.uint8)

    diag = ((x + y) * 255 // (2 * size - 2)).astype(np.uint8)
    imgs["diagonal"] = np.stack([diag, 255 - diag, diag // 2], -1)

    blocks = np.zeros((size, size, 3), np.uint8)
    rng = np.random.default_rng(7)
    for by in range(4):
        for bx in range(4):
            blocks[by * 128:(by + 1) * 128, bx * 128:(bx + 1) * 128] = (
                rng.integers(0, 256, 3)
            )
    imgs["blocks"] = blocks
    return imgs


def hexdump(data: bytes, limit: int = 128) -> str:
    lines = []
    for off in range(0, min(len(data), limit), 16):
        chunk = data[off:off + 16]
        lines.append("%08x  %s" % (off, chunk.hex(" ")))
    if len(data) > limit:
        lines.append("... (%d bytes total)" % len(data))
    return "\n".join(lines)


def describe(data: bytes) -> dict:
    from lcmc.container import parse

    bs = parse(data)
    return {
        "total_bytes": len(data),
        "bpp": bits_per_pixel(data),
        "header": {
            "version": bs.header.version,
            "image_width": bs.header.image_width,
            "image_height": bs.header.image_height,
            "structure_variant": bs.header.structure_variant.name.lower(),
        },
        "layers": [
            {
                "layer_id": int(rec.layer_id),
                "codec_id": rec.codec_id,
                "payload_bytes": rec.payload_length,
                "record_bytes": rec.record_length,
            }
            for rec in bs.layers
        ],
    }


def main():
    corpus_dir = os.path.join(FIXTURES, "corpus")
    os.makedirs(corpus_dir, exist_ok=True)

    imgs = corpus_images()
    for name, px in sorted(imgs.items()):
        save_image(ImageBuffer(px), os.path.join(corpus_dir, name + ".png"))

    # Sidecars: realistic captions for a few images, one posed subject.
    captions = {
        "circle": "a large red circle on a black background",
        "halves": "a black and white split screen composition",
        "gradient_h": "a smooth grayscale gradient from dark to light",
    }
    for name, text in captions.items():
        with open(os.path.join(corpus_dir, name + ".caption.txt"), "w") as fh:
            fh.write(text + "\n")
    with open(os.path.join(corpus_dir, "constant.pose.json"), "w") as fh:
        json.dump(pose_to_json(PoseMap((full_person(),))), fh)

    manifest = {}

    pose_img = ImageBuffer(imgs["radial"])
    pose_extractors = OfflineExtractorsLike(POSE_CAPTION,
                                            PoseMap((full_person(),)))
    golden_pose = serialize(encode_image(pose_img, "pose", pose_extractors))
    _write_golden("golden_pose.lcmc", golden_pose, manifest)

    edge_img = ImageBuffer(imgs["halves"])
    edge_extractors = OfflineExtractorsLike(
        "a black and white split screen composition", None
    )
    golden_edge = serialize(encode_image(edge_img, "edge", edge_extractors))
    _write_golden("golden_edge.lcmc", golden_edge, manifest)

    with open(os.path.join(FIXTURES, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
    print("fixtures written to", FIXTURES)


class OfflineExtractorsLike:
    def __init__(self, caption, pose):
        self._caption = caption
        self._pose = pose

    def caption(self, img):
        return self._caption

    def edges(self, img):
        from lcmc.structure import detect_edges_fallback

        return detect_edges_fallback(img)

    def pose(self, img):
        return self._pose


def _write_golden(name: str, data: bytes, manifest: dict):
    path = os.path.join(FIXTURES, name)
    with open(path, "wb") as fh:
        fh.write(data)
    with open(path + ".hex.txt", "w") as fh:
        fh.write(hexdump(data) + "\n")
    manifest[name] = describe(data)


if __name__ == "__main__":
    main()
