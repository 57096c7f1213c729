"""Inference engines.

`LiteEngine` is a deterministic, CPU-only engine used for development,
CI, and wire-contract testing: heuristic captions, Sobel edges, no pose
detector, and a procedural generator that honors the conditioning inputs.

A model-backed engine (BLIP-2 captioner, PiDiNet, OpenPose, SD 1.5 with
adapter conditioning) plugs in behind the same interface; it is selected
with LCMC_BACKEND_ENGINE and must expose the same five methods. Requests
hitting an engine without the needed model return 503 at the app layer
via ModelUnavailable.
"""

import hashlib

import numpy as np


class ModelUnavailable(RuntimeError):
    """The selected engine cannot serve this endpoint (no model loaded)."""


class BadRequest(ValueError):
    pass


_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)

_COLOR_NAMES = (
    ((220, 40, 40), "red"), ((240, 160, 40), "orange"),
    ((230, 230, 60), "yellow"), ((60, 200, 60), "green"),
    ((60, 120, 230), "blue"), ((150, 60, 200), "purple"),
    ((245, 245, 245), "white"), ((128, 128, 128), "gray"),
    ((20, 20, 20), "black"), ((150, 100, 60), "brown"),
)


def _sobel_magnitude(luma: np.ndarray) -> np.ndarray:
    padded = np.pad(luma, 1, mode="edge")
    h, w = luma.shape
    gx = np.zeros_like(luma)
    gy = np.zeros_like(luma)
    for dy in range(3):
        for dx in range(3):
            window = padded[dy:dy + h, dx:dx + w]
            gx += _SOBEL_X[dy, dx] * window
            gy += _SOBEL_X[dx, dy] * window
    return np.hypot(gx, gy) / 4.0


class LiteEngine:
    name = "lite"

    def models(self) -> dict:
        return {"caption": "heuristic", "edges": "sobel", "pose": "none",
                "generate": "procedural", "metrics": "lite"}

    def caption(self, pixels: np.ndarray) -> str:
        mean = pixels.reshape(-1, 3).astype(np.float64).mean(axis=0)
        name = min(_COLOR_NAMES,
                   key=lambda c: float(((mean - c[0]) ** 2).sum()))[1]
        brightness = ("dark" if mean.mean() < 85
                      else "bright" if mean.mean() > 170 else "muted")
        detail = _sobel_magnitude(pixels.mean(axis=2)).mean()
        texture = "highly detailed" if detail > 12 else (
            "softly textured" if detail > 2 else "flat")
        return "a %s, %s image in %s tones" % (brightness, texture, name)

    def edges(self, pixels: np.ndarray, threshold: int) -> dict:
        h, w = pixels.shape[:2]
        if h % 2 or w % 2:
            raise BadRequest("image dimensions must be even")
        r, g, b = (pixels[..., i].astype(np.float64) for i in range(3))
        mag = _sobel_magnitude(0.299 * r + 0.587 * g + 0.114 * b)
        pooled = mag.reshape(h // 2, 2, w // 2, 2).max(axis=(1, 3))
        return {
            "grid": pooled >= threshold,
            "width": w // 2,
            "height": h // 2,
            "downscale": 2,
            "threshold": threshold,
        }

    def pose(self, pixels: np.ndarray) -> list:
        # no keypoint detector in the lite engine
        return []

    def generate(self, prompt: str, structure, structure_kind,
                 texture, guidance_scale: float, steps: int,
                 condition_scale: float, seed: int,
                 width: int, height: int) -> np.ndarray:
        digest = hashlib.sha256()
        digest.update(prompt.encode("utf-8"))
        digest.update(b"|%d|%dx%d|%.4f|%d|%.4f" % (
            seed, width, height, guidance_scale, steps, condition_scale))
        if structure is not None:
            digest.update(structure_kind.encode())
            digest.update(structure.tobytes())
        if texture is not None:
            digest.update(texture.tobytes())
        rng = np.random.Generator(
            np.random.PCG64(int.from_bytes(digest.digest()[:8], "big"))
        )
        if texture is not None:
            base = texture.astype(np.float64)
        else:
            # prompt-seeded smooth color wash
            corners = rng.integers(0, 256, (2, 2, 3)).astype(np.float64)
            ys = np.linspace(0, 1, height)[:, None, None]
            xs = np.linspace(0, 1, width)[None, :, None]
            top = corners[0, 0] * (1 - xs) + corners[0, 1] * xs
            bot = corners[1, 0] * (1 - xs) + corners[1, 1] * xs
            base = top * (1 - ys) + bot * ys
        if structure is not None:
            mask = structure.astype(np.float64).mean(axis=2, keepdims=True) / 255
            base = base * (1 - 0.6 * condition_scale * mask) \
                + 255.0 * 0.6 * condition_scale * mask
        noise = rng.normal(0.0, 6.0, base.shape)
        return np.clip(base + noise, 0, 255).astype(np.uint8)


ENGINES = {"lite": LiteEngine}


def make_engine(name: str):
    try:
        return ENGINES[name]()
    except KeyError:
        raise ModelUnavailable("unknown engine %r; available: %s"
                               % (name, sorted(ENGINES)))
