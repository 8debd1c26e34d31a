"""Scalar fields on 2D pixel grids.

A field is a plain ``float64`` numpy array of shape ``(rows, cols)``. Values
nominally live on the 0-255 image scale, but nothing here enforces that; the
scale only matters for png8 export and for the cross-entropy data term.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from PIL import Image

BCE_CLAMP = 1e-6

FORMATS_IN = ("png8", "png16", "csv")
FORMATS_OUT = ("png8", "csv")


def as_field(values) -> np.ndarray:
    """Validate and convert ``values`` to a 2D float64 field (copy-free when possible)."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"field must be a non-empty 2D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field contains NaN or Inf")
    return arr


def _check_same_shape(f: np.ndarray, f0: np.ndarray) -> None:
    if f.shape != f0.shape:
        raise ValueError(f"shape mismatch: {f.shape} vs {f0.shape}")


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def load_field(path, format: str = "csv") -> np.ndarray:
    """Read a field from ``path``.

    ``png8`` maps bytes to 0-255 directly, ``png16`` maps 0-65535 linearly onto
    0-255, and ``csv`` reads comma-separated rows of reals.
    """
    path = Path(path)
    if format not in FORMATS_IN:
        raise ValueError(f"unsupported input format {format!r}")
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")

    if format == "csv":
        with path.open(newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
        if not rows:
            raise ValueError(f"{path}: empty csv")
        width = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != width:
                raise ValueError(f"{path}: ragged csv, row {i} has {len(row)} entries, expected {width}")
        try:
            data = [[float(x) for x in row] for row in rows]
        except ValueError as exc:
            raise ValueError(f"{path}: {exc}") from None
        return as_field(data)

    try:
        img = Image.open(path)
        img.load()
    except OSError as exc:
        raise ValueError(f"{path}: unreadable image ({exc})") from None
    mode = img.mode
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"{path}: expected a single-channel image, got mode {mode}")
    if format == "png8":
        if mode not in ("L", "P", "1"):
            raise ValueError(f"{path}: unsupported bit depth for png8 (mode {mode})")
        return as_field(arr.astype(np.float64))
    if mode not in ("I;16", "I;16B", "I;16L", "I"):
        raise ValueError(f"{path}: unsupported bit depth for png16 (mode {mode})")
    return as_field(arr.astype(np.float64) * (255.0 / 65535.0))


def to_png8(field: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255] and round half-to-even into uint8."""
    return np.rint(np.clip(field, 0.0, 255.0)).astype(np.uint8)


def save_field(field, path, format: str = "csv") -> None:
    field = as_field(field)
    if format not in FORMATS_OUT:
        raise ValueError(f"unsupported output format {format!r}")
    path = Path(path)
    if format == "csv":
        # %.17g round-trips every float64 exactly
        lines = [",".join(format_real(x) for x in row) for row in field]
        path.write_text("\n".join(lines) + "\n")
    else:
        Image.fromarray(to_png8(field), mode="L").save(path, format="PNG")


def format_real(x: float) -> str:
    if np.isposinf(x):
        return "inf"
    if np.isneginf(x):
        return "-inf"
    return f"{float(x):.17g}"


# ---------------------------------------------------------------------------
# Noise and genericity
# ---------------------------------------------------------------------------

def add_uniform_noise(field, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Return ``field`` plus i.i.d. Uniform[-eps, eps] noise; the input is not modified."""
    if eps < 0:
        raise ValueError(f"noise level must be non-negative, got {eps}")
    field = np.asarray(field, dtype=np.float64)
    if eps == 0:
        return field.copy()
    return field + rng.uniform(-eps, eps, size=field.shape)


def make_generic(field) -> np.ndarray:
    """Break ties so that all pixel values are pairwise distinct.

    Adds ``i * eta`` to the pixel at linear index ``i``. ``eta`` is
    ``1e-9 * range / P``, shrunk further when needed so that pixels with
    distinct values never swap order. A field that is already injective is
    returned as an unmodified copy.
    """
    field = as_field(field)
    flat = field.ravel()
    P = flat.size
    sorted_vals = np.sort(flat)
    gaps = np.diff(sorted_vals)
    if P == 1 or np.all(gaps > 0):
        return field.copy()

    span = float(sorted_vals[-1] - sorted_vals[0])
    scale = span if span > 0 else max(1.0, float(np.max(np.abs(flat))))
    total = 1e-9 * scale
    positive = gaps[gaps > 0]
    if positive.size:
        total = min(total, 0.5 * float(positive.min()))
    eta = total / P
    out = flat + np.arange(P) * eta

    # the ramp can fall below one ulp for large values; repair with nextafter
    order = np.lexsort((np.arange(P), flat))
    ranked = out[order]
    if np.any(np.diff(ranked) <= 0):
        for i in range(1, P):
            if ranked[i] <= ranked[i - 1]:
                ranked[i] = np.nextafter(ranked[i - 1], np.inf)
        out[order] = ranked
    return out.reshape(field.shape)


# ---------------------------------------------------------------------------
# Data-fit terms
# ---------------------------------------------------------------------------

def mse(f, f0) -> float:
    f, f0 = np.asarray(f, dtype=np.float64), np.asarray(f0, dtype=np.float64)
    _check_same_shape(f, f0)
    return float(np.mean((f - f0) ** 2))


def mse_gradient(f, f0) -> np.ndarray:
    f, f0 = np.asarray(f, dtype=np.float64), np.asarray(f0, dtype=np.float64)
    _check_same_shape(f, f0)
    return (2.0 / f.size) * (f - f0)


def _bce_probs(f, f0):
    f, f0 = np.asarray(f, dtype=np.float64), np.asarray(f0, dtype=np.float64)
    _check_same_shape(f, f0)
    p = np.clip(f / 255.0, BCE_CLAMP, 1.0 - BCE_CLAMP)
    p0 = np.clip(f0 / 255.0, BCE_CLAMP, 1.0 - BCE_CLAMP)
    return f, p, p0


def bce(f, f0) -> float:
    """Binary cross-entropy between ``f/255`` and ``f0/255`` after clamping to [1e-6, 1-1e-6]."""
    _, p, p0 = _bce_probs(f, f0)
    return float(-np.mean(p0 * np.log(p) + (1.0 - p0) * np.log1p(-p)))


def bce_gradient(f, f0) -> np.ndarray:
    f, p, p0 = _bce_probs(f, f0)
    raw = f / 255.0
    inside = (raw > BCE_CLAMP) & (raw < 1.0 - BCE_CLAMP)
    dp = (p - p0) / (p * (1.0 - p))
    return np.where(inside, dp / (255.0 * f.size), 0.0)


DATA_TERMS = {
    "mse": (mse, mse_gradient),
    "bce": (bce, bce_gradient),
}
