"""Sliced matchings between diagrams, gradient transfer and critical smears.

A critical smear localises the critical pixels of a dot robustly: the
gradient computed once on PD(f) is carried over to the diagrams of many noisy
downsampled copies of f through sliced matchings, pulled back there, and
averaged on the source grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backprop import compose_downsample_gradient, pullback_gradient
from .cubical import build_filtration
from .field import add_uniform_noise, as_field, make_generic, save_field
from .functional import DiagramGradient, FunctionalSpec, diagram_gradient
from .persistence import PersistenceDiagram, compute_persistence
from .smear import DownsampleSpec, downsample, sample_weighting


@dataclass(frozen=True, eq=False)
class DiagramMatching:
    """Aggregated partial matching from ``src`` dots to ``dst`` dots.

    ``weights[i, j]`` is the fraction of slices that matched src dot i to dst
    dot j; ``src_diagonal[i]`` and ``dst_diagonal[j]`` hold the remaining mass
    that went to the diagonal. Each row of ``weights`` plus ``src_diagonal``
    sums to 1, and likewise for columns.
    """

    weights: np.ndarray
    src_diagonal: np.ndarray
    dst_diagonal: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.weights.shape

    def assignment(self) -> np.ndarray:
        """Most frequent partner of each src dot; -1 where the diagonal wins (ties go to the diagonal)."""
        n, m = self.weights.shape
        out = np.full(n, -1, dtype=np.int64)
        if m == 0:
            return out
        best = np.argmax(self.weights, axis=1)
        win = self.weights[np.arange(n), best] > self.src_diagonal
        out[win] = best[win]
        return out


def slice_angles(n_proj: int) -> np.ndarray:
    """Evenly spaced mid-bin angles in [0, pi).

    The bin centres never hit pi/4, the direction along the diagonal, where a
    dot and its diagonal foot project to the same value and ranks degenerate.
    """
    return np.pi * (np.arange(n_proj) + 0.5) / n_proj


def _slice_match(src: np.ndarray, dst: np.ndarray, theta: float) -> np.ndarray:
    """Rank-match along one direction; returns the dst partner of each src dot (-1 for diagonal)."""
    n, m = len(src), len(dst)
    diag_src = np.repeat(src.mean(axis=1, keepdims=True), 2, axis=1)
    diag_dst = np.repeat(dst.mean(axis=1, keepdims=True), 2, axis=1)
    direction = np.array([np.cos(theta), np.sin(theta)])
    left = np.vstack([src, diag_dst]) @ direction   # labels 0..n-1 real, n.. diagonal
    right = np.vstack([dst, diag_src]) @ direction  # labels 0..m-1 real, m.. diagonal
    lo = np.argsort(left, kind="stable")
    ro = np.argsort(right, kind="stable")
    partner = np.full(n, -1, dtype=np.int64)
    for a, b in zip(lo, ro):
        if a < n and b < m:
            partner[a] = b
    return partner


def sliced_matching(src: PersistenceDiagram, dst: PersistenceDiagram, n_proj: int = 20,
                    rng: np.random.Generator | None = None) -> DiagramMatching:
    """Aggregate ``n_proj`` per-slice rank matchings with weight 1/n_proj each.

    Both diagrams must hold a single homological dimension. Finite dots are
    matched by slicing; essential dots (infinite death) are matched among
    themselves by birth rank with full weight, surplus ones go to the diagonal.
    ``rng`` is unused while slice angles are evenly spaced.
    """
    del rng
    if n_proj < 1:
        raise ValueError("n_proj must be at least 1")
    for d in (src, dst):
        if len(np.unique(d.dim)) > 1:
            raise ValueError("sliced_matching expects a single homological dimension")
    n, m = len(src), len(dst)
    hits = np.zeros((n, m), dtype=np.int64)

    sf = np.flatnonzero(np.isfinite(src.death))
    df = np.flatnonzero(np.isfinite(dst.death))
    if len(sf) and len(df):
        sp = np.column_stack([src.birth[sf], src.death[sf]])
        dp = np.column_stack([dst.birth[df], dst.death[df]])
        for theta in slice_angles(n_proj):
            partner = _slice_match(sp, dp, theta)
            hit = partner >= 0
            np.add.at(hits, (sf[hit], df[partner[hit]]), 1)
    weights = hits / n_proj

    se = np.flatnonzero(~np.isfinite(src.death))
    de = np.flatnonzero(~np.isfinite(dst.death))
    se = se[np.argsort(src.birth[se], kind="stable")]
    de = de[np.argsort(dst.birth[de], kind="stable")]
    for a, b in zip(se, de):
        weights[a, b] = 1.0

    src_diag = np.clip(1.0 - weights.sum(axis=1), 0.0, None)
    dst_diag = np.clip(1.0 - weights.sum(axis=0), 0.0, None)
    return DiagramMatching(weights, src_diag, dst_diag)


def transfer_gradient(dgrad: DiagramGradient, matching: DiagramMatching) -> DiagramGradient:
    """Each dst dot inherits the weighted sum of the gradients of the src dots matched to it."""
    n, _ = matching.shape
    if len(dgrad) != n:
        raise ValueError(f"gradient has {len(dgrad)} entries, matching expects {n} source dots")
    w = matching.weights
    return DiagramGradient(w.T @ dgrad.dbirth, w.T @ dgrad.ddeath)


@dataclass(frozen=True, eq=False)
class SmearHeatmap:
    birth_heat: np.ndarray
    death_heat: np.ndarray
    n_samples: int

    def save(self, birth_path, death_path) -> None:
        save_field(self.birth_heat, birth_path, "csv")
        save_field(self.death_heat, death_path, "csv")

    def composite_png8(self) -> np.ndarray:
        """RGB image: red = normalised |birth heat|, blue = normalised |death heat|."""
        def norm(h):
            a = np.abs(h)
            top = a.max()
            return a / top if top > 0 else a
        rgb = np.zeros(self.birth_heat.shape + (3,))
        rgb[..., 0] = norm(self.birth_heat)
        rgb[..., 2] = norm(self.death_heat)
        return np.rint(255.0 * rgb).astype(np.uint8)


def _diagram(field: np.ndarray, superlevel: bool) -> PersistenceDiagram:
    return compute_persistence(build_filtration(make_generic(-field if superlevel else field)))


def critical_smear(field, funcspec: FunctionalSpec, downspec: DownsampleSpec, eps: float,
                   n_samples: int, n_proj: int = 20, rng: np.random.Generator | None = None,
                   superlevel: bool = False) -> SmearHeatmap:
    """Average the transferred pullback over ``n_samples`` noisy pooled copies of ``field``.

    The reference gradient is computed once on PD(field). Birth and death
    contributions are accumulated separately. Heats are gradients with respect
    to ``field`` (sign included), so their magnitude shows where the dot lives.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng() if rng is None else rng
    f = as_field(field)
    dim = funcspec.hom_dim
    ref = _diagram(f, superlevel)
    ref_mask = ref.dim == dim
    ref_dim = ref.select(ref_mask)
    ref_grad = diagram_gradient(ref, funcspec)
    ref_grad = DiagramGradient(ref_grad.dbirth[ref_mask], ref_grad.ddeath[ref_mask])
    sign = -1.0 if superlevel else 1.0

    birth = np.zeros(f.shape)
    death = np.zeros(f.shape)
    for _ in range(n_samples):
        noisy = add_uniform_noise(f, eps, rng)
        w = sample_weighting(downspec, f.shape, rng)
        coarse = downsample(noisy, w)
        diag = _diagram(coarse, superlevel)
        mask = diag.dim == dim
        moved = transfer_gradient(ref_grad, sliced_matching(ref_dim, diag.select(mask), n_proj))
        full_b = np.zeros(len(diag))
        full_d = np.zeros(len(diag))
        full_b[mask] = moved.dbirth
        full_d[mask] = moved.ddeath
        zeros = np.zeros(len(diag))
        gb = pullback_gradient(DiagramGradient(full_b, zeros), diag, coarse.shape)
        gd = pullback_gradient(DiagramGradient(zeros, full_d), diag, coarse.shape)
        birth += compose_downsample_gradient(gb, w)
        death += compose_downsample_gradient(gd, w)
    return SmearHeatmap(sign * birth / n_samples, sign * death / n_samples, n_samples)
