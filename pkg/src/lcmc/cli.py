"""`lcmc` command line tool: encode, decode, inspect, truncate, edit, eval.

Exit codes: 2 unreadable input, 3 backend/extractor failure, 4 requested
layer absent, 5 empty/failed eval corpus, 6 invalid edit argument,
7 malformed container.
"""

import argparse
import json
import os
import sys

import numpy as np
from PIL import Image

from . import edits
from .container import (
    LayerId,
    bits_per_pixel,
    parse,
    serialize,
    truncate_to_layer,
)
from .errors import (
    BackendError,
    ContainerError,
    EncodeError,
    InvalidArgument,
    LcmcError,
    PayloadDecodeError,
)
from .evalharness import run_eval
from .image import load_image, save_image
from .pipeline import GenerationParams, decode_layers, encode_image, reconstruct
from .providers import (
    HttpExtractors,
    HttpGenerator,
    StubExtractors,
    StubGenerator,
    pose_from_json,
)

EXIT_BAD_INPUT = 2
EXIT_BACKEND = 3
EXIT_LAYER_ABSENT = 4
EXIT_EMPTY_CORPUS = 5
EXIT_EDIT_ARG = 6
EXIT_BAD_CONTAINER = 7

ENV_BACKEND_URL = "LCMC_BACKEND_URL"
DEFAULT_OFFLINE_CAPTION = "test"


def _fail(code: int, message: str):
    print("lcmc: error: %s" % message, file=sys.stderr)
    raise SystemExit(code)


def _sidecar(image_path: str, kind: str) -> str:
    return os.path.splitext(image_path)[0] + "." + kind


class OfflineExtractors(StubExtractors):
    """Stub extractors that honor per-image sidecar files:
    `<name>.caption.txt` for the caption and `<name>.pose.json`
    (wire-format persons list) for the pose."""

    def __init__(self, image_path: str, edge_threshold: int = 50):
        caption = DEFAULT_OFFLINE_CAPTION
        cap_path = _sidecar(image_path, "caption.txt")
        if os.path.exists(cap_path):
            with open(cap_path, encoding="utf-8") as fh:
                caption = fh.read().strip()
        pose = None
        pose_path = _sidecar(image_path, "pose.json")
        if os.path.exists(pose_path):
            with open(pose_path, encoding="utf-8") as fh:
                pose = pose_from_json(json.load(fh))
        super().__init__(caption=caption, pose=pose,
                         edge_threshold=edge_threshold)


def _resolve_backend_url(args) -> str:
    url = getattr(args, "backend", None) or os.environ.get(ENV_BACKEND_URL)
    if not url:
        _fail(EXIT_BACKEND,
              "no backend URL given (use --backend, --offline/--stub, "
              "or set %s)" % ENV_BACKEND_URL)
    return url


def _load_image_or_fail(path):
    try:
        return load_image(path)
    except (OSError, LcmcError) as e:
        _fail(EXIT_BAD_INPUT, "cannot read image %s: %s" % (path, e))


def _read_container_or_fail(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as e:
        _fail(EXIT_BAD_INPUT, "cannot read container %s: %s" % (path, e))


def _parse_or_fail(data: bytes):
    try:
        return parse(data)
    except ContainerError as e:
        _fail(EXIT_BAD_CONTAINER, "malformed container: %s" % e)


def cmd_encode(args) -> int:
    img = _load_image_or_fail(args.input)
    if args.offline:
        extractors = OfflineExtractors(args.input, args.edge_threshold)
    else:
        extractors = HttpExtractors(_resolve_backend_url(args),
                                    edge_threshold=args.edge_threshold)
    try:
        bs = encode_image(img, args.variant, extractors)
    except (EncodeError, BackendError) as e:
        _fail(EXIT_BACKEND, str(e))
    data = serialize(bs)
    with open(args.output, "wb") as fh:
        fh.write(data)
    for rec in bs.layers:
        print("layer %d: %d payload bytes (%d framed)"
              % (rec.layer_id, rec.payload_length, rec.record_length))
    print("total: %d bytes, %.6f bpp" % (len(data), bits_per_pixel(data)))
    return 0


def cmd_decode(args) -> int:
    data = _read_container_or_fail(args.container)
    bs = _parse_or_fail(data)
    try:
        priors = decode_layers(data, args.layers)
    except InvalidArgument as e:
        _fail(EXIT_LAYER_ABSENT, str(e))
    except (ContainerError, PayloadDecodeError) as e:
        _fail(EXIT_BAD_CONTAINER, str(e))
    backend = StubGenerator() if args.stub else HttpGenerator(
        _resolve_backend_url(args)
    )
    params = GenerationParams(guidance_scale=args.guidance_scale,
                              steps=args.steps,
                              condition_scale=args.condition_scale,
                              seed=args.seed)
    try:
        generated = reconstruct(priors, bs.header.image_width,
                                bs.header.image_height, params, backend)
    except (BackendError, LcmcError) as e:
        _fail(EXIT_BACKEND, str(e))
    save_image(generated.image, args.output)
    print("wrote level-%d reconstruction to %s"
          % (generated.fidelity_level, args.output))
    return 0


def cmd_inspect(args) -> int:
    data = _read_container_or_fail(args.container)
    bs = _parse_or_fail(data)
    report = {
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
        "total_bytes": len(data),
        "bpp": bits_per_pixel(data),
    }
    print(json.dumps(report, indent=2))
    return 0


def cmd_truncate(args) -> int:
    data = _read_container_or_fail(args.container)
    _parse_or_fail(data)
    try:
        out = truncate_to_layer(data, args.layers)
    except InvalidArgument as e:
        _fail(EXIT_EDIT_ARG, str(e))
    with open(args.output, "wb") as fh:
        fh.write(out)
    print("wrote %d bytes (layers <= %d)" % (len(out), args.layers))
    return 0


def _load_stencil(path, width, height) -> np.ndarray:
    try:
        with Image.open(path) as im:
            grid = np.asarray(im.convert("L")) > 0
    except OSError as e:
        _fail(EXIT_BAD_INPUT, "cannot read stencil %s: %s" % (path, e))
    if grid.shape != (height, width):
        _fail(EXIT_EDIT_ARG,
              "stencil is %dx%d, grid is %dx%d"
              % (grid.shape[1], grid.shape[0], width, height))
    return grid


def _parse_cell(spec: str):
    parts = spec.split(",")
    if len(parts) != 5:
        _fail(EXIT_EDIT_ARG, "cell must be i,j,r,g,b: %r" % spec)
    i, j, r, g, b = (int(v) for v in parts)
    return i, j, (r, g, b)


def cmd_edit(args) -> int:
    data = _read_container_or_fail(args.container)
    bs = _parse_or_fail(data)
    try:
        if args.edit_command == "pose-translate":
            indices = [int(v) for v in args.keypoints.split(",")]
            out = edits.pose_translate(bs, args.person, indices,
                                       args.dx, args.dy)
        elif args.edit_command == "edge-stencil":
            grid_w = bs.header.image_width // 2
            grid_h = bs.header.image_height // 2
            stencil = _load_stencil(args.stencil, grid_w, grid_h)
            out = edits.edge_stencil(bs, stencil, args.mode)
        elif args.edit_command == "texture-patch":
            cells = [_parse_cell(c) for c in args.cell]
            out = edits.texture_patch(bs, cells)
        elif args.edit_command == "texture-swap":
            donor = _parse_or_fail(_read_container_or_fail(args.donor))
            out = edits.texture_swap(bs, donor)
        elif args.edit_command == "erase":
            x0, y0, x1, y1 = (float(v) for v in args.region.split(","))
            out = edits.erase_object(bs, edits.RegionRect(x0, y0, x1, y1))
        else:  # pragma: no cover - argparse enforces choices
            _fail(EXIT_EDIT_ARG, "unknown edit %r" % args.edit_command)
    except InvalidArgument as e:
        _fail(EXIT_EDIT_ARG, str(e))
    except (ContainerError, PayloadDecodeError) as e:
        _fail(EXIT_BAD_CONTAINER, str(e))
    result = serialize(out)
    with open(args.output, "wb") as fh:
        fh.write(result)
    print("wrote %d bytes, %.6f bpp" % (len(result), bits_per_pixel(result)))
    return 0


def cmd_eval(args) -> int:
    if not os.path.isdir(args.corpus):
        _fail(EXIT_BAD_INPUT, "corpus directory %s not found" % args.corpus)

    if args.backend:
        extractors_for = lambda path: HttpExtractors(args.backend)
    else:
        extractors_for = lambda path: OfflineExtractors(path)

    def encode_fn(img, path):
        return encode_image(img, args.variant, extractors_for(path))

    generator = None
    metrics_client = None
    if args.backend and args.metrics:
        generator = HttpGenerator(args.backend)
        http = HttpExtractors(args.backend)._client

        def metrics_client(reference, test):
            out = http.post("/metrics", {"reference": reference, "test": test})
            return {k.lower(): out.get(k) for k in
                    ("FID", "ClipSIM", "DISTS", "NIQE")}

    try:
        summary = run_eval(args.corpus, args.output, encode_fn,
                           generator=generator, metrics_client=metrics_client,
                           max_workers=args.jobs)
    except LcmcError as e:
        _fail(EXIT_EMPTY_CORPUS, str(e))
    print(json.dumps(summary, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcmc",
        description="Layered cross-modal image codec",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="compress an image into a container")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--variant", choices=["edge", "pose", "auto"],
                   default="auto")
    p.add_argument("--backend", help="inference service base URL")
    p.add_argument("--offline", action="store_true",
                   help="use deterministic stub extractors and sidecar files")
    p.add_argument("--edge-threshold", type=int, default=50)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="reconstruct an image from a container")
    p.add_argument("container")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--layers", type=int, choices=[1, 2, 3], default=3)
    p.add_argument("--backend")
    p.add_argument("--stub", action="store_true",
                   help="use the deterministic stub generator")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--guidance-scale", type=float, default=7.5)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--condition-scale", type=float, default=1.0)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("inspect", help="print container structure as JSON")
    p.add_argument("container")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("truncate", help="keep only layers <= k")
    p.add_argument("container")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--layers", type=int, required=True)
    p.set_defaults(func=cmd_truncate)

    p = sub.add_parser("edit", help="edit a container without decoding")
    esub = p.add_subparsers(dest="edit_command", required=True)

    e = esub.add_parser("pose-translate")
    e.add_argument("container")
    e.add_argument("-o", "--output", required=True)
    e.add_argument("--person", type=int, required=True)
    e.add_argument("--keypoints", required=True,
                   help="comma-separated keypoint indices")
    e.add_argument("--dx", type=float, default=0.0)
    e.add_argument("--dy", type=float, default=0.0)

    e = esub.add_parser("edge-stencil")
    e.add_argument("container")
    e.add_argument("-o", "--output", required=True)
    e.add_argument("--stencil", required=True,
                   help="1-bit image at grid resolution")
    e.add_argument("--mode", choices=["add", "subtract"], required=True)

    e = esub.add_parser("texture-patch")
    e.add_argument("container")
    e.add_argument("-o", "--output", required=True)
    e.add_argument("--cell", action="append", default=[],
                   help="i,j,r,g,b (repeatable)")

    e = esub.add_parser("texture-swap")
    e.add_argument("container")
    e.add_argument("donor")
    e.add_argument("-o", "--output", required=True)

    e = esub.add_parser("erase")
    e.add_argument("container")
    e.add_argument("-o", "--output", required=True)
    e.add_argument("--region", required=True, help="x0,y0,x1,y1 normalized")

    for e in esub.choices.values():
        e.set_defaults(func=cmd_edit)

    p = sub.add_parser("eval", help="rate(-distortion) report over a corpus")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", required=True,
                   help="output directory for CSV and summary JSON")
    p.add_argument("--variant", choices=["edge", "pose", "auto"],
                   default="auto")
    p.add_argument("--backend")
    p.add_argument("--metrics", action="store_true",
                   help="request perceptual metrics from the backend")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
