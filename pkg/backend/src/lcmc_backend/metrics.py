"""Lightweight perceptual-metric stand-ins for the lite engine.

These follow the mathematical shape of the published metrics (FID is a
true Frechet distance, just over cheap block-mean features instead of
Inception activations) so that identity and ordering sanity checks hold,
while staying CPU-only and deterministic. They are NOT calibrated against
the model-based originals.
"""

import numpy as np
from scipy import linalg, ndimage


def _block_features(pixels: np.ndarray, grid: int = 8) -> np.ndarray:
    """Per-block channel means, flattened: a 3*grid^2 feature vector."""
    h, w, _ = pixels.shape
    bh, bw = h // grid, w // grid
    blocks = pixels[: bh * grid, : bw * grid].reshape(grid, bh, grid, bw, 3)
    return blocks.mean(axis=(1, 3), dtype=np.float64).ravel()


def frechet_distance(reference: list, test: list) -> float:
    """Frechet distance between Gaussians fit to block-mean features."""
    ref = np.stack([_block_features(p) for p in reference])
    tst = np.stack([_block_features(p) for p in test])
    mu1, mu2 = ref.mean(axis=0), tst.mean(axis=0)
    c1 = np.cov(ref, rowvar=False) if len(ref) > 1 else np.zeros((ref.shape[1],) * 2)
    c2 = np.cov(tst, rowvar=False) if len(tst) > 1 else np.zeros((tst.shape[1],) * 2)
    covmean = linalg.sqrtm(c1 @ c2)
    if np.iscomplexobj(covmean):
        covmean = covmean.real
    diff = mu1 - mu2
    return float(diff @ diff + np.trace(c1 + c2 - 2.0 * covmean))


def clip_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of centered block-mean feature vectors."""
    fa, fb = _block_features(a), _block_features(b)
    fa -= fa.mean()
    fb -= fb.mean()
    na, nb = np.linalg.norm(fa), np.linalg.norm(fb)
    if na == 0 or nb == 0:
        return 1.0 if na == nb else 0.0
    return float(fa @ fb / (na * nb))


def dissimilarity(a: np.ndarray, b: np.ndarray) -> float:
    """Structure-and-texture dissimilarity proxy in [0, 1]; 0 = identical.

    Combines normalized luma MSE with a gradient-magnitude MSE term.
    """
    la = a.astype(np.float64).mean(axis=2) / 255.0
    lb = b.astype(np.float64).mean(axis=2) / 255.0
    intensity = float(((la - lb) ** 2).mean())
    ga = np.hypot(ndimage.sobel(la, 0), ndimage.sobel(la, 1))
    gb = np.hypot(ndimage.sobel(lb, 0), ndimage.sobel(lb, 1))
    structure = float(((ga - gb) ** 2).mean()) / 16.0
    return min(1.0, 0.5 * intensity + 0.5 * structure)


def naturalness(a: np.ndarray) -> float:
    """No-reference naturalness proxy: deviation of local-contrast
    statistics from those of typical photographs (lower is better)."""
    luma = a.astype(np.float64).mean(axis=2)
    mu = ndimage.uniform_filter(luma, 7)
    sigma = np.sqrt(np.maximum(ndimage.uniform_filter(luma ** 2, 7) - mu ** 2,
                               0.0))
    normalized = (luma - mu) / (sigma + 1.0)
    # photographs typically show unit-scale, mildly heavy-tailed stats
    scale = float(normalized.std())
    kurt = float((normalized ** 4).mean() / max(normalized.var() ** 2, 1e-9))
    return abs(scale - 0.7) * 10.0 + abs(kurt - 3.0)


def compute_all(reference: list, test: list) -> dict:
    pairs = list(zip(reference, test))
    return {
        "FID": frechet_distance(reference, test),
        "ClipSIM": float(np.mean([clip_similarity(a, b) for a, b in pairs]))
        if pairs else 0.0,
        "DISTS": float(np.mean([dissimilarity(a, b) for a, b in pairs]))
        if pairs else 0.0,
        "NIQE": float(np.mean([naturalness(b) for b in test])),
    }
