"""Extractor and generator providers.

Two bundled families:

* deterministic stubs for offline/CI use (no network, no models), and
* HTTP clients speaking the backend wire contract:

    POST /caption  {"image": b64png}                      -> {"text": str}
    POST /edges    {"image": b64png, "threshold": int}    -> {"grid": b64,
                      "width": int, "height": int, "downscale": int,
                      "threshold": int}
    POST /pose     {"image": b64png}                      -> {"persons": [
                      {"schema_id": int, "keypoints": [
                          {"present": bool, "x": float, "y": float}, ...]}]}
    POST /generate {"prompt", "structure_image"?, "structure_kind"?,
                    "texture_image"?, "guidance_scale", "steps",
                    "condition_scale", "seed", "width", "height"}
                                                          -> {"image": b64png}

Images travel as base64 PNG; edge grids as base64 bit-packed rows.
"""

import base64
import hashlib
import io
import threading
import time
from typing import Optional

import numpy as np
import requests
from PIL import Image

from .errors import BackendError, LcmcError
from .image import ImageBuffer
from .pipeline import GenerationParams
from .render import ConditionSet
from .structure import (
    EdgeMap,
    PoseKeypoint,
    PoseMap,
    PosePerson,
    detect_edges_fallback,
)

DEFAULT_TIMEOUT = 120.0
MAX_RETRIES = 2
MAX_IN_FLIGHT = 2


def image_to_b64png(img: ImageBuffer) -> str:
    buf = io.BytesIO()
    Image.fromarray(img.pixels, mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def b64png_to_image(data: str) -> ImageBuffer:
    raw = base64.b64decode(data)
    with Image.open(io.BytesIO(raw)) as im:
        return ImageBuffer(np.asarray(im.convert("RGB")))


def grid_to_b64(grid: np.ndarray) -> str:
    packed = np.packbits(np.asarray(grid, dtype=np.uint8), axis=1)
    return base64.b64encode(packed.tobytes()).decode("ascii")


def b64_to_grid(data: str, width: int, height: int) -> np.ndarray:
    raw = base64.b64decode(data)
    row_bytes = (width + 7) // 8
    if len(raw) != row_bytes * height:
        raise BackendError("grid payload length mismatch")
    rows = np.frombuffer(raw, dtype=np.uint8).reshape(height, row_bytes)
    return np.unpackbits(rows, axis=1)[:, :width].astype(bool)


def pose_from_json(persons_json) -> Optional[PoseMap]:
    persons = []
    for p in persons_json:
        kps = tuple(
            PoseKeypoint.at(min(1.0, max(0.0, float(k["x"]))),
                            min(1.0, max(0.0, float(k["y"]))))
            if k.get("present") else PoseKeypoint.absent()
            for k in p["keypoints"]
        )
        if any(k.present for k in kps):
            persons.append(PosePerson(kps, int(p.get("schema_id", 0))))
    return PoseMap(tuple(persons)) if persons else None


def pose_to_json(pose: PoseMap):
    return [
        {
            "schema_id": person.schema_id,
            "keypoints": [
                {"present": k.present, "x": k.x, "y": k.y}
                for k in person.keypoints
            ],
        }
        for person in pose.persons
    ]


class StubExtractors:
    """Deterministic offline extractors: a fixed (or sidecar-supplied)
    caption, the Sobel fallback edge detector, and an optional fixed pose."""

    def __init__(self, caption: str = "test", pose: Optional[PoseMap] = None,
                 edge_threshold: int = 50):
        self._caption = caption
        self._pose = pose
        self._threshold = edge_threshold

    def caption(self, img: ImageBuffer) -> str:
        return self._caption

    def edges(self, img: ImageBuffer) -> EdgeMap:
        return detect_edges_fallback(img, self._threshold)

    def pose(self, img: ImageBuffer) -> Optional[PoseMap]:
        return self._pose


class StubGenerator:
    """Deterministic generation stand-in: returns the texture condition when
    present, otherwise noise seeded from a digest of the request."""

    def generate(self, conditions: ConditionSet, params: GenerationParams,
                 w: int, h: int) -> ImageBuffer:
        if conditions.texture_image is not None:
            return conditions.texture_image
        digest = hashlib.sha256()
        digest.update(conditions.prompt.encode("utf-8"))
        digest.update(str(params.seed).encode())
        digest.update(b"%dx%d" % (w, h))
        if conditions.structure_image is not None:
            digest.update(conditions.structure_kind.encode())
            digest.update(conditions.structure_image.pixels.tobytes())
        seed = int.from_bytes(digest.digest()[:8], "big")
        rng = np.random.Generator(np.random.PCG64(seed))
        return ImageBuffer(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))


class _HttpClient:
    def __init__(self, base_url: str, timeout: float = DEFAULT_TIMEOUT,
                 max_in_flight: int = MAX_IN_FLIGHT):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()
        self._slots = threading.BoundedSemaphore(max_in_flight)

    def post(self, path: str, payload: dict) -> dict:
        last_error = None
        for attempt in range(MAX_RETRIES + 1):
            try:
                with self._slots:
                    resp = self._session.post(self.base_url + path,
                                              json=payload,
                                              timeout=self.timeout)
            except requests.RequestException as e:
                # Transport errors only are retried, with exponential backoff.
                last_error = e
                if attempt < MAX_RETRIES:
                    time.sleep(0.25 * 2 ** attempt)
                continue
            if resp.status_code != 200:
                raise BackendError(
                    "%s returned HTTP %d: %s"
                    % (path, resp.status_code, resp.text[:200])
                )
            return resp.json()
        raise BackendError("%s unreachable: %s" % (path, last_error))


class HttpExtractors:
    """Extractors backed by the model inference service."""

    def __init__(self, base_url: str, edge_threshold: int = 50, **kw):
        self._client = _HttpClient(base_url, **kw)
        self._threshold = edge_threshold

    def caption(self, img: ImageBuffer) -> str:
        out = self._client.post("/caption", {"image": image_to_b64png(img)})
        return out["text"]

    def edges(self, img: ImageBuffer) -> EdgeMap:
        out = self._client.post(
            "/edges",
            {"image": image_to_b64png(img), "threshold": self._threshold},
        )
        grid = b64_to_grid(out["grid"], out["width"], out["height"])
        return EdgeMap(grid, downscale=int(out.get("downscale", 2)),
                       threshold=int(out.get("threshold", self._threshold)))

    def pose(self, img: ImageBuffer) -> Optional[PoseMap]:
        out = self._client.post("/pose", {"image": image_to_b64png(img)})
        return pose_from_json(out.get("persons", []))


class HttpGenerator:
    """Generator backed by the diffusion service."""

    def __init__(self, base_url: str, **kw):
        self._client = _HttpClient(base_url, **kw)

    def generate(self, conditions: ConditionSet, params: GenerationParams,
                 w: int, h: int) -> ImageBuffer:
        payload = {
            "prompt": conditions.prompt,
            "guidance_scale": params.guidance_scale,
            "steps": params.steps,
            "condition_scale": params.condition_scale,
            "seed": params.seed,
            "width": w,
            "height": h,
        }
        if conditions.structure_image is not None:
            payload["structure_image"] = image_to_b64png(
                conditions.structure_image
            )
            payload["structure_kind"] = conditions.structure_kind
        if conditions.texture_image is not None:
            payload["texture_image"] = image_to_b64png(conditions.texture_image)
        out = self._client.post("/generate", payload)
        try:
            return b64png_to_image(out["image"])
        except (KeyError, ValueError, LcmcError) as e:
            raise BackendError("malformed /generate response: %s" % e)
