"""Stochastic pooling, STUMP descent and gradient-sampling diagnostics.

Each STUMP step perturbs the current field with uniform noise, pools it over
non-overlapping k x k patches using a random convex weighting per patch,
computes the topological gradient on the small pooled grid, pushes it back
through the (linear) pooling map and hands the result, plus the full-resolution
data-term gradient, to Adam.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Literal, NamedTuple

import numpy as np

from .backprop import compose_downsample_gradient, topological_gradient
from .field import DATA_TERMS, add_uniform_noise, as_field
from .functional import FunctionalSpec, default_alpha, mixed_loss

Measure = Literal["center", "vertex_uniform", "simplex_uniform"]
MEASURES = ("center", "vertex_uniform", "simplex_uniform")


# ---------------------------------------------------------------------------
# Pooling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DownsampleSpec:
    """Cover by adjacent k x k patches.

    Patches at the grid borders are truncated when k does not divide the grid.
    With ``shift`` the patch grid is translated by a random offset in
    ``[0, k)^2`` at every draw, so patch seams do not stay in one place.
    """

    k: int = 5
    measure: Measure = "simplex_uniform"
    shift: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"patch size must be >= 1, got {self.k}")
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}")

    def coarse_shape(self, shape, offset=(0, 0)) -> tuple[int, int]:
        rows, cols = shape
        return (-(-(rows + offset[0]) // self.k), -(-(cols + offset[1]) // self.k))


@dataclass(frozen=True, eq=False)
class Weighting:
    """One probability vector per patch, stored at full resolution.

    ``weights[v]`` is the weight of pixel ``v`` inside its (unique) patch, so
    the weights of each patch are non-negative and sum to one. Patch ``(i, j)``
    covers rows ``[i*k - oy, (i+1)*k - oy)`` and the analogous columns,
    clipped to the grid, where ``(oy, ox) = offset``.
    """

    k: int
    weights: np.ndarray
    offset: tuple[int, int] = (0, 0)

    @property
    def coarse_shape(self) -> tuple[int, int]:
        rows, cols = self.weights.shape
        oy, ox = self.offset
        return (-(-(rows + oy) // self.k), -(-(cols + ox) // self.k))


def _patch_sum(x: np.ndarray, k: int, offset=(0, 0)) -> np.ndarray:
    if k == 1:
        return x.copy()
    rows, cols = x.shape
    oy, ox = offset
    R, C = -(-(rows + oy) // k), -(-(cols + ox) // k)
    pad = np.zeros((R * k, C * k))
    pad[oy:oy + rows, ox:ox + cols] = x
    return pad.reshape(R, k, C, k).sum(axis=(1, 3))


def _spread(coarse: np.ndarray, k: int, shape, offset=(0, 0)) -> np.ndarray:
    rows, cols = shape
    oy, ox = offset
    return np.repeat(np.repeat(coarse, k, axis=0), k, axis=1)[oy:oy + rows, ox:ox + cols]


def _patch_extents(n: int, k: int, o: int):
    """Start index and length of each (clipped) patch along one axis."""
    starts = np.arange(-(-(n + o) // k)) * k - o
    lo = np.maximum(starts, 0)
    hi = np.minimum(starts + k, n)
    return lo, hi - lo


def sample_weighting(spec: DownsampleSpec, shape, rng: np.random.Generator) -> Weighting:
    rows, cols = shape
    k = spec.k
    offset = (0, 0)
    if spec.shift and k > 1:
        oy, ox = rng.integers(0, k, size=2)
        offset = (int(oy), int(ox))
    if spec.measure == "center":
        sizes = _patch_sum(np.ones((rows, cols)), k, offset)
        return Weighting(k, 1.0 / _spread(sizes, k, shape, offset), offset)
    if spec.measure == "vertex_uniform":
        r0, heights = _patch_extents(rows, k, offset[0])
        c0, widths = _patch_extents(cols, k, offset[1])
        sizes = heights[:, None] * widths[None, :]
        pick = np.minimum(np.floor(rng.random(sizes.shape) * sizes).astype(np.int64), sizes - 1)
        r = r0[:, None] + pick // widths[None, :]
        c = c0[None, :] + pick % widths[None, :]
        w = np.zeros((rows, cols))
        w[r.ravel(), c.ravel()] = 1.0
        return Weighting(k, w, offset)
    # Dirichlet(1, ..., 1) via normalised exponential spacings
    e = rng.standard_exponential((rows, cols))
    return Weighting(k, e / _spread(_patch_sum(e, k, offset), k, shape, offset), offset)


def downsample(field, w: Weighting) -> np.ndarray:
    """Pooled field: value of patch i is the w_i-weighted sum of its pixels."""
    f = np.asarray(field, dtype=np.float64)
    if f.shape != w.weights.shape:
        raise ValueError(f"field shape {f.shape} does not match weighting {w.weights.shape}")
    return _patch_sum(f * w.weights, w.k, w.offset)


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AdamState:
    t: int
    m: np.ndarray
    v: np.ndarray
    lr: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8

    @classmethod
    def init(cls, shape, lr: float = 0.05, beta1: float = 0.9, beta2: float = 0.999,
             eps_hat: float = 1e-8) -> "AdamState":
        return cls(0, np.zeros(shape), np.zeros(shape), lr, beta1, beta2, eps_hat)


def adam_step(state: AdamState, grad, field) -> tuple[AdamState, np.ndarray]:
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.m.shape or np.shape(field) != grad.shape:
        raise ValueError("gradient, field and optimizer state must share a shape")
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * (grad * grad)
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    new_field = field - state.lr * m_hat / (np.sqrt(v_hat) + state.eps_hat)
    return replace(state, t=t, m=m, v=v), new_field


# ---------------------------------------------------------------------------
# Descent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmearConfig:
    """Everything one descent step needs besides the field, target and RNG.

    ``alpha=None`` means 1 - 1/P for the field being optimised. With
    ``superlevel`` the functional is evaluated on the negated field.
    """

    spec: FunctionalSpec = field(default_factory=FunctionalSpec)
    superlevel: bool = False
    alpha: float | None = None
    data_term: str = "mse"
    eps: float = 0.0
    downsample: DownsampleSpec = field(default_factory=DownsampleSpec)
    lr: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8

    def __post_init__(self):
        if self.data_term not in DATA_TERMS:
            raise ValueError(f"unknown data term {self.data_term!r}")
        if self.eps < 0:
            raise ValueError("noise level must be non-negative")
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")

    def alpha_for(self, shape) -> float:
        return default_alpha(shape[0] * shape[1]) if self.alpha is None else self.alpha

    def vanilla(self) -> "SmearConfig":
        return replace(self, eps=0.0, downsample=DownsampleSpec(1, "center"))

    def adam(self, shape) -> AdamState:
        return AdamState.init(shape, self.lr, self.beta1, self.beta2, self.eps_hat)


@dataclass(frozen=True)
class LossRecord:
    step: int
    wall_ms: float
    topo_loss: float
    data_loss: float
    total_loss: float


LOG_HEADER = ("step", "wall_ms", "topo_loss", "data_loss", "total_loss")


def smeared_topological_gradient(field, config: SmearConfig, rng: np.random.Generator):
    """One-sample estimate of the smeared topological gradient: (Phi on the sample, gradient on the source grid)."""
    noisy = add_uniform_noise(field, config.eps, rng)
    w = sample_weighting(config.downsample, noisy.shape, rng)
    coarse = downsample(noisy, w)
    res = topological_gradient(coarse, config.spec, config.superlevel)
    return res.value, compose_downsample_gradient(res.grad, w)


def _descend(field, f0, config, adam, topo_value, topo_grad, t0):
    alpha = config.alpha_for(field.shape)
    loss_fn, grad_fn = DATA_TERMS[config.data_term]
    data_value = loss_fn(field, f0)
    grad = alpha * topo_grad + (1.0 - alpha) * grad_fn(field, f0)
    adam, new_field = adam_step(adam, grad, field)
    record = LossRecord(adam.t, (time.perf_counter() - t0) * 1e3, topo_value, data_value,
                        mixed_loss(topo_value, data_value, alpha))
    return new_field, adam, record


def stump_step(field, f0, config: SmearConfig, adam: AdamState, rng: np.random.Generator):
    """Noise, pool, coarse topological gradient, push back, add data gradient, Adam.

    Returns ``(new_field, new_adam_state, LossRecord)``; the recorded topological
    loss is the one of the pooled noisy sample.
    """
    t0 = time.perf_counter()
    field = np.asarray(field, dtype=np.float64)
    topo_value, topo_grad = smeared_topological_gradient(field, config, rng)
    return _descend(field, f0, config, adam, topo_value, topo_grad, t0)


def vanilla_step(field, f0, config: SmearConfig, adam: AdamState):
    """Plain topological backpropagation on the full-resolution field, same Adam update."""
    t0 = time.perf_counter()
    field = np.asarray(field, dtype=np.float64)
    res = topological_gradient(field, config.spec, config.superlevel)
    return _descend(field, f0, config, adam, res.value, res.grad, t0)


def run(field, config: SmearConfig, steps: int, seed: int, mode: str = "stump", f0=None,
        callback: Callable[[int, np.ndarray, LossRecord], None] | None = None):
    """Iterate ``steps`` descent steps from ``field`` towards ``f0`` (default: the start field).

    Returns ``(final_field, loss_log)``.
    """
    if mode not in ("stump", "vanilla"):
        raise ValueError(f"unknown mode {mode!r}")
    f = as_field(field).copy()
    f0 = f.copy() if f0 is None else as_field(f0)
    rng = np.random.default_rng(seed)
    adam = config.adam(f.shape)
    log: list[LossRecord] = []
    for _ in range(steps):
        if mode == "stump":
            f, adam, rec = stump_step(f, f0, config, adam, rng)
        else:
            f, adam, rec = vanilla_step(f, f0, config, adam)
        log.append(rec)
        if callback is not None:
            callback(rec.step, f, rec)
    return f, log


def write_loss_log(log, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOG_HEADER)
        for r in log:
            w.writerow([r.step, f"{r.wall_ms:.3f}", repr(r.topo_loss), repr(r.data_loss), repr(r.total_loss)])


# ---------------------------------------------------------------------------
# Gradient sampling diagnostics
# ---------------------------------------------------------------------------

class MinNormResult(NamedTuple):
    weights: np.ndarray
    objective: float
    degenerate: bool
    iterations: int


def gram_matrix(grads) -> np.ndarray:
    if any(np.shape(g) != np.shape(grads[0]) for g in grads):
        raise ValueError("all gradients must share a shape")
    X = np.stack([np.asarray(g, dtype=np.float64).ravel() for g in grads])
    G = X @ X.T
    return 0.5 * (G + G.T)


def project_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-and-threshold)."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, len(y) + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(y - theta, 0.0)


def min_norm_weights(grads, tol: float = 1e-10, max_iter: int = 100_000) -> MinNormResult:
    """Convex weights c minimising ||sum c_i g_i||^2.

    A diagonal Gram matrix has the closed form c_i proportional to 1/||g_i||^2;
    otherwise projected gradient descent on the simplex is used.
    """
    return min_norm_from_gram(gram_matrix(list(grads)), tol, max_iter)


def min_norm_from_gram(G: np.ndarray, tol: float = 1e-10, max_iter: int = 100_000) -> MinNormResult:
    m = G.shape[0]
    diag = np.diag(G).copy()
    if np.all(diag == 0):
        return MinNormResult(np.full(m, 1.0 / m), 0.0, True, 0)
    if m == 1:
        return MinNormResult(np.ones(1), float(G[0, 0]), False, 0)
    off = G - np.diag(diag)
    if not np.any(off):
        zero = diag == 0
        if zero.any():
            c = zero / zero.sum()
        else:
            inv = 1.0 / diag
            c = inv / inv.sum()
        return MinNormResult(c, float(c @ G @ c), False, 0)

    scale = float(np.max(diag))
    Gs = G / scale
    step = 1.0 / (2.0 * max(np.linalg.eigvalsh(Gs)[-1], 1e-300))
    c = np.full(m, 1.0 / m)
    obj = float(c @ Gs @ c)
    it = 0
    for it in range(1, max_iter + 1):
        c_new = project_simplex(c - step * 2.0 * (Gs @ c))
        obj_new = float(c_new @ Gs @ c_new)
        c, done = c_new, abs(obj - obj_new) <= tol
        obj = obj_new
        if done:
            break
    return MinNormResult(c, obj * scale, False, it)


def sample_gradients(field, config: SmearConfig, m: int, rng: np.random.Generator) -> list[np.ndarray]:
    """``m`` smeared topological gradients at independent noise/pooling draws around ``field``."""
    return [smeared_topological_gradient(field, config, rng)[1] for _ in range(m)]


def offdiag_ratio(G: np.ndarray) -> float:
    """|offdiag(G)|_1 / |diag(G)|_1."""
    d = np.abs(np.diag(G)).sum()
    return float((np.abs(G).sum() - d) / d)
