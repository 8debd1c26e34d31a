"""Synthetic test images for the three optimisation tasks.

All generators return fields on the 0-255 scale. Fractional positions are
``(x, y)`` = (column, row) fractions of the grid; lengths given as fractions
are relative to ``min(rows, cols)``.
"""

from __future__ import annotations

import numpy as np


def _grid(rows: int, cols: int):
    if rows < 2 or cols < 2:
        raise ValueError(f"generator needs at least a 2x2 grid, got {rows}x{cols}")
    yy, xx = np.mgrid[0:rows, 0:cols].astype(np.float64)
    return yy, xx


def _gauss(yy, xx, cy, cx, sigma):
    return np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * sigma * sigma))


def gen_double_well(rows: int = 64, cols: int = 64, centers=((0.35, 0.5), (0.65, 0.5)),
                    sigma: float = 0.22, depth: float = 200.0, base: float = 255.0) -> np.ndarray:
    """Two overlapping radial depressions cut into a flat plateau.

    The depressions combine by taking the deeper of the two at each pixel, so
    each well keeps its own minimum and the pass between them sits below the
    plateau by an amount set by the well separation relative to ``sigma``.
    """
    yy, xx = _grid(rows, cols)
    s = sigma * min(rows, cols)
    wells = [_gauss(yy, xx, cy * (rows - 1), cx * (cols - 1), s) for cx, cy in centers]
    return np.clip(base - depth * np.max(wells, axis=0), 0.0, 255.0)


def gen_circle(rows: int = 64, cols: int = 64, n_points: int = 20, sigma: float = 0.08,
               seed: int = 0, radius: float = 0.3) -> np.ndarray:
    """Rescaled sum of Gaussians centred at points drawn uniformly on a centred circle."""
    if n_points < 3:
        raise ValueError("a circle needs at least 3 sample points")
    yy, xx = _grid(rows, cols)
    rng = np.random.default_rng(seed)
    m = min(rows, cols)
    theta = rng.uniform(0.0, 2.0 * np.pi, n_points)
    cy, cx = (rows - 1) / 2.0, (cols - 1) / 2.0
    r = radius * m
    total = np.zeros((rows, cols))
    for t in theta:
        total += _gauss(yy, xx, cy + r * np.sin(t), cx + r * np.cos(t), sigma * m)
    lo, hi = total.min(), total.max()
    return 255.0 * (total - lo) / (hi - lo)


def blob_centers(rows: int, cols: int, n_blobs: int, rng: np.random.Generator,
                 margin: float = 0.2, min_sep: float = 0.3) -> np.ndarray:
    """Rejection-sample ``n_blobs`` well-separated centres (row, col) away from the border."""
    m = min(rows, cols)
    for _ in range(10_000):
        pts = np.column_stack([
            rng.uniform(margin * (rows - 1), (1 - margin) * (rows - 1), n_blobs),
            rng.uniform(margin * (cols - 1), (1 - margin) * (cols - 1), n_blobs),
        ])
        d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
        if n_blobs == 1 or d[np.triu_indices(n_blobs, 1)].min() >= min_sep * m:
            return pts
    raise RuntimeError("could not place blobs; lower min_sep")


def gen_blobs(rows: int = 64, cols: int = 64, n_blobs: int = 3, seed: int = 0,
              bridge: float = 0.5, sigma: float = 0.07, bridge_width: float = 0.03,
              peak: float = 170.0) -> np.ndarray:
    """Bright amorphous bumps joined in a chain by straight ridges at ``bridge`` x peak height.

    Each blob is a sum of three jittered anisotropic Gaussians (hence
    "amorphous"); blob i is bridged to blob i+1. Bumps and bridges combine by
    pointwise maximum, so the ridge crest is flat at the bridge height.
    """
    if n_blobs < 2:
        raise ValueError("need at least two blobs to bridge")
    yy, xx = _grid(rows, cols)
    rng = np.random.default_rng(seed)
    m = min(rows, cols)
    centers = blob_centers(rows, cols, n_blobs, rng)
    s = sigma * m

    blobs = np.zeros((rows, cols))
    for cy, cx in centers:
        bump = np.zeros((rows, cols))
        for _ in range(3):
            oy, ox = rng.normal(0.0, 0.35 * s, 2)
            sy, sx = s * rng.uniform(0.7, 1.2, 2)
            bump += np.exp(-(((yy - cy - oy) / sy) ** 2 + ((xx - cx - ox) / sx) ** 2) / 2.0)
        blobs = np.maximum(blobs, bump / bump.max())

    ridges = np.zeros((rows, cols))
    w = bridge_width * m
    for (ay, ax), (by, bx) in zip(centers[:-1], centers[1:]):
        dy, dx = by - ay, bx - ax
        t = np.clip(((yy - ay) * dy + (xx - ax) * dx) / (dy * dy + dx * dx), 0.0, 1.0)
        dist2 = (yy - ay - t * dy) ** 2 + (xx - ax - t * dx) ** 2
        ridges = np.maximum(ridges, bridge * np.exp(-dist2 / (2.0 * w * w)))
    return peak * np.maximum(blobs, ridges)


GENERATORS = {
    "wells": gen_double_well,
    "circle": gen_circle,
    "blobs": gen_blobs,
}
