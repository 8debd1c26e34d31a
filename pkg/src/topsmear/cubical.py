"""Lower-star cubical filtrations of pixel grids (V-construction).

Pixels are vertices. Horizontal and vertical edges join 4-adjacent pixels and
unit squares span 2x2 blocks. Every cell enters the filtration at the maximum
value of its pixels; the pixel attaining that maximum is the cell's critical
vertex.

Cell ids are laid out as::

    [0, P)                 vertices, id = r * cols + c
    [P, P + H)             horizontal edges (r, c)-(r, c+1)
    [P + H, P + H + V)     vertical edges (r, c)-(r+1, c)
    [P + H + V, N)         squares with top-left pixel (r, c)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .field import as_field


class Cell(NamedTuple):
    dim: int
    vertex_ids: tuple[int, ...]
    value: float
    critical_vertex: int


def grid_cells(rows: int, cols: int) -> dict[str, np.ndarray]:
    """Vertex lists of every edge and square of a ``rows x cols`` grid, plus edge ids of squares."""
    P = rows * cols
    idx = np.arange(P).reshape(rows, cols)
    h_edges = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    v_edges = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    squares = np.stack(
        [idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel(), idx[1:, :-1].ravel(), idx[1:, 1:].ravel()],
        axis=1,
    )
    H, V = len(h_edges), len(v_edges)
    sq_r, sq_c = np.divmod(np.arange(len(squares)), max(cols - 1, 1))
    h_id = lambda r, c: P + r * (cols - 1) + c  # noqa: E731
    v_id = lambda r, c: P + H + r * cols + c  # noqa: E731
    square_edges = np.stack(
        [h_id(sq_r, sq_c), h_id(sq_r + 1, sq_c), v_id(sq_r, sq_c), v_id(sq_r, sq_c + 1)], axis=1
    ).astype(np.int64).reshape(-1, 4)
    return {
        "h_edges": h_edges.reshape(-1, 2),
        "v_edges": v_edges.reshape(-1, 2),
        "squares": squares.reshape(-1, 4),
        "square_edges": square_edges,
    }


@dataclass(frozen=True, eq=False)
class CubicalFiltration:
    """Sorted cells of the V-construction.

    Attributes are indexed by filtration position unless noted otherwise.

    Attributes:
        shape: (rows, cols) of the source field.
        order: cell id at each filtration position.
        position: filtration position of each cell id (inverse of ``order``).
        dims: cell dimension per position.
        values: filtration value per position.
        critical: critical vertex (pixel linear index) per position.
        edge_vertices: (E, 2) vertex ids of each edge id ``P + e``.
        square_edges: (S, 4) edge cell ids of each square id ``P + E + s``.
    """

    shape: tuple[int, int]
    order: np.ndarray
    position: np.ndarray
    dims: np.ndarray
    values: np.ndarray
    critical: np.ndarray
    edge_vertices: np.ndarray
    square_edges: np.ndarray

    @property
    def n_cells(self) -> int:
        return len(self.order)

    def cell_vertices(self, cell_id: int) -> tuple[int, ...]:
        P = self.shape[0] * self.shape[1]
        E = len(self.edge_vertices)
        if cell_id < P:
            return (int(cell_id),)
        if cell_id < P + E:
            return tuple(int(v) for v in self.edge_vertices[cell_id - P])
        edges = self.square_edges[cell_id - P - E]
        verts = set()
        for e in edges:
            verts.update(int(v) for v in self.edge_vertices[e - P])
        return tuple(sorted(verts))

    @property
    def cells(self) -> list[Cell]:
        """Materialised cell list in filtration order (slow; for inspection and tests)."""
        return [
            Cell(int(d), self.cell_vertices(int(cid)), float(v), int(c))
            for cid, d, v, c in zip(self.order, self.dims, self.values, self.critical)
        ]

    def boundary(self, pos: int) -> np.ndarray:
        """Filtration positions of the codimension-1 faces of the cell at ``pos``."""
        cid = int(self.order[pos])
        P = self.shape[0] * self.shape[1]
        E = len(self.edge_vertices)
        if cid < P:
            return np.empty(0, dtype=np.int64)
        if cid < P + E:
            return self.position[self.edge_vertices[cid - P]]
        return self.position[self.square_edges[cid - P - E]]


def build_filtration(field) -> CubicalFiltration:
    """Lower-star V-construction of ``field``, sorted by (value, dim, cell id).

    The field should have pairwise-distinct values (see ``make_generic``); ties
    are still ordered deterministically.
    """
    f = as_field(field)
    rows, cols = f.shape
    flat = f.ravel()
    P = flat.size
    g = grid_cells(rows, cols)
    edge_vertices = np.concatenate([g["h_edges"], g["v_edges"]]).astype(np.int64)
    squares = g["squares"].astype(np.int64)

    def crit_of(vertex_lists: np.ndarray) -> np.ndarray:
        if len(vertex_lists) == 0:
            return np.empty(0, dtype=np.int64)
        vals = flat[vertex_lists]
        best = vals.max(axis=1, keepdims=True)
        # smallest index among maximisers: argmax over a mask on the sorted-index axis
        sorted_ids = np.sort(vertex_lists, axis=1)
        svals = flat[sorted_ids]
        hit = svals == best
        return sorted_ids[np.arange(len(sorted_ids)), hit.argmax(axis=1)]

    crit = np.concatenate([np.arange(P), crit_of(edge_vertices), crit_of(squares)]).astype(np.int64)
    dims = np.concatenate(
        [np.zeros(P, np.int8), np.ones(len(edge_vertices), np.int8), np.full(len(squares), 2, np.int8)]
    )
    values = flat[crit]
    ids = np.arange(len(crit))
    order = np.lexsort((ids, dims, values))
    position = np.empty_like(order)
    position[order] = np.arange(len(order))
    return CubicalFiltration(
        shape=(rows, cols),
        order=order,
        position=position,
        dims=dims[order],
        values=values[order],
        critical=crit[order],
        edge_vertices=edge_vertices,
        square_edges=g["square_edges"],
    )


def ordinal_field(field) -> np.ndarray:
    """Rank transform: the pixel with the k-th smallest value maps to k-1."""
    f = as_field(field)
    flat = f.ravel()
    order = np.argsort(flat, kind="stable")
    if np.any(np.diff(flat[order]) == 0):
        raise ValueError("ordinal_field requires pairwise-distinct values")
    ranks = np.empty(flat.size, dtype=np.int64)
    ranks[order] = np.arange(flat.size)
    return ranks.reshape(f.shape)
