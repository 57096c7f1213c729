"""HTTP inference service for the layered codec.

Endpoints (JSON in/out, images as base64 PNG, grids as base64 bit-packed
rows): POST /caption, /edges, /pose, /generate, /metrics; GET /healthz.
"""

import os
from typing import List, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import metrics as metrics_mod
from .engine import BadRequest, ModelUnavailable, make_engine
from .wire import WireError, decode_image, encode_grid, encode_image

REFERENCE_SIZE = 512


class CaptionRequest(BaseModel):
    image: str


class EdgesRequest(BaseModel):
    image: str
    threshold: int = Field(default=50, ge=0, le=255)


class PoseRequest(BaseModel):
    image: str


class GenerateRequest(BaseModel):
    prompt: str
    structure_image: Optional[str] = None
    structure_kind: Optional[str] = None
    texture_image: Optional[str] = None
    guidance_scale: float = Field(default=7.5, ge=0)
    steps: int = Field(default=50, ge=1)
    condition_scale: float = 1.0
    seed: int = 0
    width: int = REFERENCE_SIZE
    height: int = REFERENCE_SIZE


class MetricsRequest(BaseModel):
    reference: List[str]
    test: List[str]


def create_app(engine_name: Optional[str] = None) -> FastAPI:
    engine_name = engine_name or os.environ.get("LCMC_BACKEND_ENGINE", "lite")
    try:
        engine = make_engine(engine_name)
    except ModelUnavailable as e:
        raise SystemExit(str(e))

    app = FastAPI(title="lcmc inference backend")

    def _image_or_400(data: str) -> np.ndarray:
        try:
            return decode_image(data)
        except WireError as e:
            raise HTTPException(400, str(e))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "engine": engine.name,
                "models": engine.models()}

    @app.post("/caption")
    def caption(req: CaptionRequest):
        pixels = _image_or_400(req.image)
        try:
            return {"text": engine.caption(pixels)}
        except ModelUnavailable as e:
            raise HTTPException(503, str(e))

    @app.post("/edges")
    def edges(req: EdgesRequest):
        pixels = _image_or_400(req.image)
        try:
            out = engine.edges(pixels, req.threshold)
        except BadRequest as e:
            raise HTTPException(400, str(e))
        except ModelUnavailable as e:
            raise HTTPException(503, str(e))
        return {
            "grid": encode_grid(out["grid"]),
            "width": out["width"],
            "height": out["height"],
            "downscale": out["downscale"],
            "threshold": out["threshold"],
        }

    @app.post("/pose")
    def pose(req: PoseRequest):
        pixels = _image_or_400(req.image)
        try:
            return {"persons": engine.pose(pixels)}
        except ModelUnavailable as e:
            raise HTTPException(503, str(e))

    @app.post("/generate")
    def generate(req: GenerateRequest):
        if req.texture_image is not None and req.structure_image is None:
            raise HTTPException(
                400, "texture conditioning requires structure conditioning"
            )
        if req.structure_image is not None and req.structure_kind not in (
            "edge", "pose"
        ):
            raise HTTPException(400, "structure_kind must be 'edge' or 'pose'")
        if (req.width, req.height) != (REFERENCE_SIZE, REFERENCE_SIZE):
            raise HTTPException(
                400, "reference configuration generates %dx%d only"
                % (REFERENCE_SIZE, REFERENCE_SIZE)
            )
        structure = (_image_or_400(req.structure_image)
                     if req.structure_image is not None else None)
        texture = (_image_or_400(req.texture_image)
                   if req.texture_image is not None else None)
        for name, img in (("structure", structure), ("texture", texture)):
            if img is not None and img.shape[:2] != (req.height, req.width):
                raise HTTPException(
                    400, "%s_image does not match requested dimensions" % name
                )
        try:
            pixels = engine.generate(
                req.prompt, structure, req.structure_kind, texture,
                req.guidance_scale, req.steps, req.condition_scale,
                req.seed, req.width, req.height,
            )
        except ModelUnavailable as e:
            raise HTTPException(503, str(e))
        except MemoryError:
            raise HTTPException(507, "out of memory")
        return {"image": encode_image(pixels)}

    @app.post("/metrics")
    def compute_metrics(req: MetricsRequest):
        if not req.reference or not req.test:
            raise HTTPException(400, "reference and test sets must be non-empty")
        if len(req.reference) != len(req.test):
            raise HTTPException(400, "reference/test pair counts differ")
        reference = [_image_or_400(d) for d in req.reference]
        test = [_image_or_400(d) for d in req.test]
        return metrics_mod.compute_all(reference, test)

    return app


def main():  # console entry point
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(prog="lcmc-backend")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int,
                        default=int(os.environ.get("LCMC_BACKEND_PORT", 8750)))
    parser.add_argument("--engine",
                        default=os.environ.get("LCMC_BACKEND_ENGINE", "lite"))
    args = parser.parse_args()
    uvicorn.run(create_app(args.engine), host=args.host, port=args.port)


app = create_app()


if __name__ == "__main__":
    main()
