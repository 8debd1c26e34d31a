"""From diagram gradients to pixel gradients.

A dot's birth and death equal the field values at its critical vertices, and
that pairing is locally constant, so d(birth)/d(pixel) is an indicator of the
birth vertex (likewise for death). Pulling back is therefore a scatter-add.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .cubical import build_filtration
from .field import make_generic
from .functional import DiagramGradient, FunctionalSpec, diagram_gradient, wasserstein_norm
from .persistence import NO_VERTEX, PersistenceDiagram, compute_persistence


def pullback_gradient(dgrad: DiagramGradient, diag: PersistenceDiagram, shape) -> np.ndarray:
    """Scatter dot partials onto their critical pixels, accumulating on collisions."""
    rows, cols = shape
    P = rows * cols
    if len(dgrad) != len(diag):
        raise ValueError(f"gradient has {len(dgrad)} entries for a diagram of {len(diag)} dots")
    out = np.zeros(P)

    bmask = dgrad.dbirth != 0
    bv = diag.birth_vertex[bmask]
    dmask = dgrad.ddeath != 0
    dv = diag.death_vertex[dmask].copy()
    dv[dv == NO_VERTEX] = diag.max_vertex  # clamped essential deaths
    for verts in (bv, dv):
        if verts.size and (verts.min() < 0 or verts.max() >= P):
            raise IndexError(f"critical vertex out of range for a {rows}x{cols} grid")
    np.add.at(out, bv, dgrad.dbirth[bmask])
    np.add.at(out, dv, dgrad.ddeath[dmask])
    return out.reshape(rows, cols)


def compose_downsample_gradient(down_grad: np.ndarray, weighting) -> np.ndarray:
    """Transpose of the downsampling map ``f -> f_w``.

    Source pixel ``v`` in patch ``i`` receives ``down_grad[i] * w_i(v)``.
    ``weighting`` is a :class:`~topsmear.smear.Weighting`.
    """
    down_grad = np.asarray(down_grad, dtype=np.float64)
    k = weighting.k
    w = weighting.weights
    coarse_shape = weighting.coarse_shape
    if down_grad.shape != coarse_shape:
        raise ValueError(f"coarse gradient shape {down_grad.shape} does not match weighting {coarse_shape}")
    rows, cols = w.shape
    oy, ox = getattr(weighting, "offset", (0, 0))
    spread = np.repeat(np.repeat(down_grad, k, axis=0), k, axis=1)[oy:oy + rows, ox:ox + cols]
    return spread * w


class TopoResult(NamedTuple):
    value: float
    grad: np.ndarray
    diagram: PersistenceDiagram
    dgrad: DiagramGradient


def topological_gradient(field, spec: FunctionalSpec, superlevel: bool = False) -> TopoResult:
    """Evaluate Phi(PD(f)) and its pixel gradient.

    With ``superlevel`` the diagram is that of ``-field`` and the returned
    gradient is with respect to ``field`` itself.
    """
    f = np.asarray(field, dtype=np.float64)
    g = make_generic(-f if superlevel else f)
    diag = compute_persistence(build_filtration(g))
    value = wasserstein_norm(diag, spec)
    dgrad = diagram_gradient(diag, spec)
    grad = pullback_gradient(dgrad, diag, g.shape)
    if superlevel:
        grad = -grad
    return TopoResult(value, grad, diag, dgrad)
