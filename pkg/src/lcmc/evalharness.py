"""Corpus-level rate (and delegated-metric) evaluation.

Emits one CSV row per (image, fidelity level) and an aggregate JSON
summary. Metric values are never computed locally; when a backend URL is
supplied the harness reconstructs each level, ships image pairs to
POST /metrics and records whatever comes back.
"""

import csv
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .container import bits_per_pixel, serialize, truncate_to_layer
from .errors import LcmcError
from .image import load_image
from .pipeline import GenerationParams, decode_layers, reconstruct

log = logging.getLogger("lcmc.eval")

CSV_COLUMNS = ["image_id", "level", "bytes", "bpp",
               "fid", "clipsim", "dists", "niqe"]
METRIC_KEYS = ["fid", "clipsim", "dists", "niqe"]
IMAGE_EXTENSIONS = (".png", ".ppm")


@dataclass
class RDRecord:
    image_id: str
    fidelity_level: int
    byte_count: int
    bpp: float
    metrics: dict = field(default_factory=dict)

    def row(self):
        return [
            self.image_id,
            self.fidelity_level,
            self.byte_count,
            "%.8f" % self.bpp,
        ] + ["" if self.metrics.get(k) is None else "%.6f" % self.metrics[k]
             for k in METRIC_KEYS]


def _eval_one(path, encode_fn, metrics_fn) -> tuple:
    """Returns (records, variant_name) for one image."""
    from .providers import image_to_b64png  # local import avoids cycle

    img = load_image(path)
    image_id = os.path.splitext(os.path.basename(path))[0]
    bs = encode_fn(img, path)
    data = serialize(bs)
    records = []
    for level in (1, 2, 3):
        prefix = truncate_to_layer(data, level)
        rec = RDRecord(image_id, level, len(prefix), bits_per_pixel(prefix))
        if metrics_fn is not None:
            priors = decode_layers(prefix, level)
            generated = metrics_fn["reconstruct"](priors, img)
            rec.metrics = metrics_fn["metrics"](
                [image_to_b64png(img)], [image_to_b64png(generated.image)]
            )
        records.append(rec)
    variant = bs.header.structure_variant.name.lower()
    return records, variant


def run_eval(corpus_dir: str, out_dir: str, encode_fn,
             generator=None, metrics_client=None,
             params: Optional[GenerationParams] = None,
             max_workers: Optional[int] = None) -> dict:
    """Encode every image under `corpus_dir`, write RD rows and a summary.

    `encode_fn(img, path) -> LayeredBitstream` supplies the encoder (offline
    or backend-driven). Per-image failures are logged and skipped; raises
    only if no image succeeds.
    """
    paths = sorted(
        os.path.join(corpus_dir, name)
        for name in os.listdir(corpus_dir)
        if name.lower().endswith(IMAGE_EXTENSIONS)
    )
    if not paths:
        raise LcmcError("no images found in %s" % corpus_dir)

    metrics_fn = None
    if generator is not None and metrics_client is not None:
        gp = params or GenerationParams()
        metrics_fn = {
            "reconstruct": lambda priors, img: reconstruct(
                priors, img.width, img.height, gp, generator
            ),
            "metrics": metrics_client,
        }

    if max_workers is None:
        max_workers = min(8, os.cpu_count() or 1)
    results = []
    variant_counts = {}
    failures = 0
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {pool.submit(_eval_one, p, encode_fn, metrics_fn): p
                   for p in paths}
        for future, path in futures.items():
            try:
                records, variant = future.result()
            except Exception as e:  # per-image isolation
                log.warning("skipping %s: %s", path, e)
                failures += 1
                continue
            results.extend(records)
            variant_counts[variant] = variant_counts.get(variant, 0) + 1
    if not results:
        raise LcmcError("all %d images failed" % len(paths))

    results.sort(key=lambda r: (r.image_id, r.fidelity_level))
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "rd_records.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in results:
            writer.writerow(rec.row())

    summary = {
        "images": len(paths) - failures,
        "failed": failures,
        "variant_counts": variant_counts,
        "mean_bpp": {
            str(level): sum(r.bpp for r in results
                            if r.fidelity_level == level)
            / sum(1 for r in results if r.fidelity_level == level)
            for level in (1, 2, 3)
        },
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    return summary
