"""Acceptance suite: one test per release criterion, each printing a
pass/fail line (run with `pytest tests/test_acceptance.py -v -s`).

Everything here runs offline: no network, no GPU, no inference service.
"""

import json
import os
import random
import time

import numpy as np

from lcmc.cli import main as cli_main
from lcmc.container import (
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
from lcmc.edits import (
    RegionRect,
    edge_stencil,
    erase_object,
    pose_translate,
    texture_patch,
    texture_swap,
)
from lcmc.evalharness import run_eval
from lcmc.image import ImageBuffer, save_image
from lcmc.pipeline import encode_image
from lcmc.providers import StubExtractors
from lcmc.render import render_edges
from lcmc.semantic import SemanticPrior, choose_semantic_payload
from lcmc.structure import EdgeMap, PoseMap, decode_edges, encode_edges, encode_pose
from lcmc.texture import TextureMap, decode_texture, encode_texture, extract_texture

from conftest import CORPUS, FIXTURES, full_person, random_bitstream


def report(name: str, ok: bool, detail: str = ""):
    print("[%s] %s%s" % ("PASS" if ok else "FAIL", name,
                         " (%s)" % detail if detail else ""))
    assert ok, "%s failed %s" % (name, detail)


def test_container_round_trip_1000():
    rng = random.Random(20240817)
    start = time.monotonic()
    for _ in range(1000):
        bs = random_bitstream(rng)
        assert parse(serialize(bs)) == bs
    elapsed = time.monotonic() - start
    report("container round-trip x1000", elapsed < 5.0,
           "%.2fs" % elapsed)


def test_prefix_decodability_on_fixtures():
    ok = True
    for name in ("golden_pose.lcmc", "golden_edge.lcmc"):
        data = open(os.path.join(FIXTURES, name), "rb").read()
        full = parse(data)
        present = {rec.layer_id for rec in full.layers}
        bpps = []
        for k in (1, 2, 3):
            prefix = truncate_to_layer(data, k)
            sub = parse(prefix)
            ok &= {r.layer_id for r in sub.layers} == {
                i for i in present if i <= k
            }
            bpps.append(bits_per_pixel(prefix))
        ok &= bpps == sorted(bpps)
    report("prefix decodability + bpp monotone", ok)


def test_rate_budget_pose_headline():
    caption = ("a photorealistic portrait of a young dancer mid-leap on a "
               "sunlit stage, flowing red dress, dramatic rim lighting, "
               "high detail, shallow depth of field, 35mm photograph")[:200]
    codec_id, payload = choose_semantic_payload(SemanticPrior(caption))
    layers = (
        LayerRecord(LayerId.SEMANTIC, codec_id, payload),
        LayerRecord(LayerId.STRUCTURE, 1,
                    encode_pose(PoseMap((full_person(),)))),
        LayerRecord(LayerId.TEXTURE, 0, encode_texture(
            TextureMap(np.arange(192, dtype=np.uint8).reshape(8, 8, 3)))),
    )
    bs = LayeredBitstream(
        ContainerHeader(512, 512, StructureVariant.POSE), layers
    )
    bpp = bits_per_pixel(serialize(bs))
    report("rate budget pose < 0.02 bpp", bpp < 0.02, "bpp=%.6f" % bpp)


def test_rate_budget_edge_corpus(tmp_path):
    def encode_fn(img, path):
        return encode_image(img, "edge", StubExtractors())

    summary = run_eval(CORPUS, str(tmp_path), encode_fn)
    mean3 = summary["mean_bpp"]["3"]
    report("edge corpus mean level-3 bpp < 0.03", mean3 < 0.03,
           "mean=%.6f over %d images" % (mean3, summary["images"]))


def test_quantization_bound():
    rng = np.random.default_rng(7)
    xs = rng.uniform(0.0, 1.0, 1_000_000)
    qs = np.floor(100.0 * xs + 0.5)  # vectorized quantize_coord
    err = np.abs(xs - qs / 100.0).max()
    report("quantization max error <= 0.005", err <= 0.005 + 1e-12,
           "max=%.6f" % err)


def test_texture_oracle_100_images():
    rng = np.random.default_rng(11)
    ok = True
    for _ in range(100):
        px = rng.integers(0, 256, (128, 128, 3), dtype=np.uint8)
        got = extract_texture(ImageBuffer(px)).cells
        expected = np.zeros((8, 8, 3), np.uint8)
        for i in range(8):
            for j in range(8):
                block = px[i * 16:(i + 1) * 16, j * 16:(j + 1) * 16]
                expected[i, j] = np.floor(
                    block.reshape(-1, 3).astype(np.float64).mean(axis=0) + 0.5
                )
        ok &= np.array_equal(got, expected)
    report("texture extraction equals brute-force block means", ok)


def test_edge_codec_losslessness_200():
    rng = np.random.default_rng(5)
    ok = True
    for _ in range(200):
        grid = rng.random((64, 64)) < rng.uniform(0.01, 0.5)
        e = EdgeMap(grid)
        ok &= decode_edges(encode_edges(e), 1, 128, 128) == e
        rendered = render_edges(e, 128, 128)
        binar = rendered.pixels.any(axis=2)
        pooled = binar.reshape(64, 2, 64, 2).max(axis=(1, 3)).astype(bool)
        ok &= np.array_equal(pooled, grid)
    report("edge codec lossless + render inverted by re-binarize", ok)


def _locality_ok(before, after, touched_ids):
    if {r.layer_id for r in before.layers} != {r.layer_id for r in after.layers}:
        return False
    for rec in before.layers:
        if rec.layer_id in touched_ids:
            continue
        other = after.layer(rec.layer_id)
        if rec.payload != other.payload or rec.codec_id != other.codec_id:
            return False
    parse(serialize(after))
    return True


def test_edit_locality_all_five():
    pose_bs = parse(open(os.path.join(FIXTURES, "golden_pose.lcmc"), "rb").read())
    edge_bs = parse(open(os.path.join(FIXTURES, "golden_edge.lcmc"), "rb").read())

    ok = _locality_ok(pose_bs,
                      pose_translate(pose_bs, 0, [0, 1], 0.05, 0.05),
                      {LayerId.STRUCTURE})
    grid_shape = (256, 256)
    stencil = np.zeros(grid_shape, bool)
    stencil[:64, :64] = True
    ok &= _locality_ok(edge_bs, edge_stencil(edge_bs, stencil, "add"),
                       {LayerId.STRUCTURE})
    ok &= _locality_ok(edge_bs, texture_patch(edge_bs, [(3, 3, (9, 9, 9))]),
                       {LayerId.TEXTURE})
    ok &= _locality_ok(edge_bs, texture_swap(edge_bs, pose_bs),
                       {LayerId.TEXTURE})
    ok &= _locality_ok(edge_bs,
                       erase_object(edge_bs, RegionRect(0.0, 0.0, 0.5, 0.5)),
                       {LayerId.STRUCTURE, LayerId.TEXTURE})

    # analytic erase fill on the half-black/half-white texture fixture
    cells = np.zeros((8, 8, 3), np.uint8)
    cells[:, 4:] = 255
    fixture = edge_bs.replace_layer(
        LayerRecord(LayerId.TEXTURE, 0, encode_texture(TextureMap(cells)))
    )
    erased = erase_object(fixture, RegionRect(0.0, 0.0, 0.5, 1.0))
    after = decode_texture(erased.layer(LayerId.TEXTURE).payload).cells
    ok &= bool((after == 255).all())  # survivors are all white -> mean 255
    report("edit locality (5 ops) + surviving-mean erase fill", ok)


def test_deterministic_offline_cli(tmp_path):
    img_path = str(tmp_path / "in.png")
    y, x = np.mgrid[0:512, 0:512]
    px = ((x // 64 + y // 64) % 2 * 200).astype(np.uint8)
    save_image(ImageBuffer(np.stack([px, px, px], -1)), img_path)

    digests = []
    for attempt in ("one", "two"):
        container = str(tmp_path / ("c_%s.lcmc" % attempt))
        decoded = str(tmp_path / ("d_%s.png" % attempt))
        assert cli_main(["encode", img_path, "-o", container,
                         "--offline"]) == 0
        assert cli_main(["decode", container, "-o", decoded,
                         "--layers", "3", "--stub", "--seed", "7"]) == 0
        digests.append((open(container, "rb").read(),
                        open(decoded, "rb").read()))
    report("offline encode/decode byte-identical across runs",
           digests[0] == digests[1])
