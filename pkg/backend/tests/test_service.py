import base64
import io

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from lcmc_backend.app import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app("lite"))


def b64png(pixels: np.ndarray) -> str:
    buf = io.BytesIO()
    Image.fromarray(pixels.astype(np.uint8), mode="RGB").save(buf, "PNG")
    return base64.b64encode(buf.getvalue()).decode()


def png_to_pixels(data: str) -> np.ndarray:
    with Image.open(io.BytesIO(base64.b64decode(data))) as im:
        return np.asarray(im.convert("RGB"))


@pytest.fixture(scope="module")
def sample():
    y, x = np.mgrid[0:512, 0:512]
    px = np.zeros((512, 512, 3), np.uint8)
    px[(x - 256) ** 2 + (y - 200) ** 2 <= 100 ** 2] = (210, 60, 60)
    return px


def test_healthz(client):
    out = client.get("/healthz")
    assert out.status_code == 200
    body = out.json()
    assert body["status"] == "ok"
    assert "models" in body


class TestCaption:
    def test_valid_image_nonempty_text(self, client, sample):
        out = client.post("/caption", json={"image": b64png(sample)})
        assert out.status_code == 200
        assert isinstance(out.json()["text"], str)
        assert out.json()["text"]

    def test_corrupt_payload_400(self, client):
        out = client.post("/caption", json={"image": "bm90IGEgcG5n"})
        assert out.status_code == 400

    def test_deterministic(self, client, sample):
        a = client.post("/caption", json={"image": b64png(sample)}).json()
        b = client.post("/caption", json={"image": b64png(sample)}).json()
        assert a["text"] == b["text"]


class TestEdges:
    def test_grid_shape_contract(self, client, sample):
        out = client.post("/edges", json={"image": b64png(sample),
                                          "threshold": 50})
        assert out.status_code == 200
        body = out.json()
        assert (body["width"], body["height"]) == (256, 256)
        assert body["downscale"] == 2 and body["threshold"] == 50
        raw = base64.b64decode(body["grid"])
        assert len(raw) == (256 // 8) * 256

    def test_constant_image_empty_grid(self, client):
        px = np.full((512, 512, 3), 90, np.uint8)
        out = client.post("/edges", json={"image": b64png(px),
                                          "threshold": 50}).json()
        grid = np.unpackbits(
            np.frombuffer(base64.b64decode(out["grid"]), np.uint8)
        )
        assert not grid.any()


class TestPose:
    def test_contract_shape(self, client, sample):
        out = client.post("/pose", json={"image": b64png(sample)})
        assert out.status_code == 200
        persons = out.json()["persons"]
        assert isinstance(persons, list)
        for person in persons:
            for k in person["keypoints"]:
                assert 0.0 <= k["x"] <= 1.0 and 0.0 <= k["y"] <= 1.0

    def test_corrupt_payload_400(self, client):
        assert client.post("/pose", json={"image": "???"}).status_code == 400


class TestGenerate:
    def test_prompt_only(self, client):
        out = client.post("/generate", json={"prompt": "a calm lake",
                                             "seed": 3})
        assert out.status_code == 200
        px = png_to_pixels(out.json()["image"])
        assert px.shape == (512, 512, 3)

    def test_ladder_violation_400(self, client, sample):
        out = client.post("/generate", json={
            "prompt": "x", "texture_image": b64png(sample),
        })
        assert out.status_code == 400

    def test_seed_reproducible(self, client, sample):
        req = {
            "prompt": "a red circle",
            "structure_image": b64png(sample),
            "structure_kind": "edge",
            "texture_image": b64png(sample),
            "seed": 7,
        }
        a = png_to_pixels(client.post("/generate", json=req).json()["image"])
        b = png_to_pixels(client.post("/generate", json=req).json()["image"])
        assert np.array_equal(a, b)

    def test_seed_changes_output(self, client):
        imgs = [
            png_to_pixels(client.post("/generate", json={
                "prompt": "p", "seed": seed,
            }).json()["image"])
            for seed in (1, 2)
        ]
        assert not np.array_equal(imgs[0], imgs[1])

    def test_missing_structure_kind_400(self, client, sample):
        out = client.post("/generate", json={
            "prompt": "x", "structure_image": b64png(sample),
        })
        assert out.status_code == 400

    def test_non_reference_size_400(self, client):
        out = client.post("/generate", json={"prompt": "x", "width": 256,
                                             "height": 256})
        assert out.status_code == 400


class TestMetrics:
    def test_identical_sets(self, client, sample):
        imgs = [b64png(sample), b64png(np.roll(sample, 64, axis=1))]
        out = client.post("/metrics", json={"reference": imgs, "test": imgs})
        assert out.status_code == 200
        body = out.json()
        assert body["FID"] <= 1e-3
        assert body["DISTS"] <= 1e-3
        assert body["ClipSIM"] >= 0.999
        assert np.isfinite(body["NIQE"])

    def test_different_sets_nonzero(self, client, sample):
        ref = [b64png(sample)]
        tst = [b64png(255 - sample)]
        body = client.post("/metrics", json={"reference": ref,
                                             "test": tst}).json()
        assert body["FID"] > 1e-3
        assert body["DISTS"] > 1e-3

    def test_empty_sets_400(self, client):
        out = client.post("/metrics", json={"reference": [], "test": []})
        assert out.status_code == 400
