"""Persistence diagrams with critical-vertex pairings.

The reduction is the standard column algorithm over Z/2 on the filtration
boundary matrix, with the twist (clearing) optimisation: squares are reduced
first and every edge that becomes a square's pivot is skipped when the edge
columns are reduced. Columns are Python integers used as bit sets indexed by
filtration position, so column addition is a single XOR and the pivot is
``bit_length() - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .cubical import CubicalFiltration, build_filtration
from .field import format_real

NO_VERTEX = -1


class Dot(NamedTuple):
    dim: int
    birth: float
    death: float
    birth_vertex: int
    death_vertex: int | None


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Dots stored column-wise. ``death`` is ``inf`` and ``death_vertex`` is -1 for essential dots.

    ``max_value``/``max_vertex`` describe the global maximum of the field, which
    is where essential deaths are clamped when a functional asks for it.
    """

    dim: np.ndarray
    birth: np.ndarray
    death: np.ndarray
    birth_vertex: np.ndarray
    death_vertex: np.ndarray
    shape: tuple[int, int]
    max_value: float
    max_vertex: int

    def __len__(self) -> int:
        return len(self.dim)

    def __iter__(self) -> Iterator[Dot]:
        for i in range(len(self)):
            dv = int(self.death_vertex[i])
            yield Dot(int(self.dim[i]), float(self.birth[i]), float(self.death[i]),
                      int(self.birth_vertex[i]), None if dv == NO_VERTEX else dv)

    @property
    def dots(self) -> list[Dot]:
        return list(self)

    @property
    def essential(self) -> np.ndarray:
        return ~np.isfinite(self.death)

    @property
    def lifetime(self) -> np.ndarray:
        return self.death - self.birth

    def select(self, mask: np.ndarray) -> "PersistenceDiagram":
        return PersistenceDiagram(
            self.dim[mask], self.birth[mask], self.death[mask],
            self.birth_vertex[mask], self.death_vertex[mask],
            self.shape, self.max_value, self.max_vertex,
        )

    def in_dim(self, dim: int) -> "PersistenceDiagram":
        return self.select(self.dim == dim)

    def map_values(self, func) -> "PersistenceDiagram":
        """Apply a strictly increasing map to every finite coordinate (vertices are kept)."""
        death = self.death.copy()
        fin = np.isfinite(death)
        death[fin] = func(death[fin])
        return PersistenceDiagram(
            self.dim.copy(), func(self.birth), death,
            self.birth_vertex.copy(), self.death_vertex.copy(),
            self.shape, float(func(np.array([self.max_value]))[0]), self.max_vertex,
        )


def _reduce(columns, positions, pivots: dict[int, int], cleared: set[int] | None):
    """Reduce bit-set ``columns`` left to right; returns (pivot, column position) pairs and zero columns."""
    pairs = []
    zeros = []
    for j, col in zip(positions, columns):
        if cleared is not None and j in cleared:
            continue
        while col:
            low = col.bit_length() - 1
            other = pivots.get(low)
            if other is None:
                break
            col ^= other
        if col:
            pivots[low] = col
            pairs.append((low, j))
        else:
            zeros.append(j)
    return pairs, zeros


def _bitsets(face_positions: np.ndarray) -> list[int]:
    one = 1
    return [sum(one << int(p) for p in row) for row in face_positions.tolist()]


def compute_persistence(filt: CubicalFiltration) -> PersistenceDiagram:
    """Persistence pairs of ``filt`` in dimensions 0 and 1.

    Zero-persistence pairs are dropped. Each dot carries the critical vertices
    of its birth and death cells.
    """
    rows, cols = filt.shape
    P = rows * cols
    E = len(filt.edge_vertices)
    order = filt.order
    pos = filt.position

    edge_pos = pos[P:P + E]
    square_pos = pos[P + E:]
    edge_faces = pos[filt.edge_vertices]
    square_faces = pos[filt.square_edges]
    if len(edge_pos) and np.any(edge_faces.max(axis=1) >= edge_pos):
        raise ValueError("malformed filtration: an edge precedes one of its vertices")
    if len(square_pos) and np.any(square_faces.max(axis=1) >= square_pos):
        raise ValueError("malformed filtration: a square precedes one of its edges")

    # dimension 2 first so its pivots clear the corresponding edge columns
    sq_sort = np.argsort(square_pos)
    pairs2, _ = _reduce(_bitsets(square_faces[sq_sort]), square_pos[sq_sort].tolist(), {}, None)
    cleared = {low for low, _ in pairs2}

    ed_sort = np.argsort(edge_pos)
    pairs1, zero_edges = _reduce(_bitsets(edge_faces[ed_sort]), edge_pos[ed_sort].tolist(), {}, cleared)

    paired_vertices = {low for low, _ in pairs1}
    vertex_pos = pos[:P]
    essential0 = sorted(int(p) for p in vertex_pos if int(p) not in paired_vertices)
    # zero edge columns that are not cleared create classes that never die
    essential1 = sorted(zero_edges)

    births, deaths = [], []
    for low, j in pairs1:
        births.append(low)
        deaths.append(j)
    for low, j in pairs2:
        births.append(low)
        deaths.append(j)
    births = np.asarray(births, dtype=np.int64)
    deaths = np.asarray(deaths, dtype=np.int64)
    keep = filt.values[deaths] > filt.values[births] if len(births) else np.zeros(0, bool)
    births, deaths = births[keep], deaths[keep]

    ess = np.asarray(essential0 + essential1, dtype=np.int64)
    b_all = np.concatenate([births, ess])
    dim = filt.dims[b_all].astype(np.int64)
    birth = filt.values[b_all]
    death = np.concatenate([filt.values[deaths], np.full(len(ess), np.inf)])
    birth_vertex = filt.critical[b_all].astype(np.int64)
    death_vertex = np.concatenate([filt.critical[deaths], np.full(len(ess), NO_VERTEX)]).astype(np.int64)

    top = int(order[np.flatnonzero(filt.dims == 0)[-1]])  # last vertex to enter
    max_value = float(filt.values[pos[top]])

    srt = np.lexsort((birth_vertex, death, birth, dim))
    return PersistenceDiagram(
        dim[srt], birth[srt], death[srt], birth_vertex[srt], death_vertex[srt],
        (rows, cols), max_value, top,
    )


def persistence_of_field(field) -> PersistenceDiagram:
    return compute_persistence(build_filtration(field))


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------

def diagram_to_csv(diag: PersistenceDiagram, header: bool = True) -> str:
    lines = ["dim,birth,death,birth_vertex,death_vertex"] if header else []
    for d in diag:
        dv = "none" if d.death_vertex is None else str(d.death_vertex)
        lines.append(f"{d.dim},{format_real(d.birth)},{format_real(d.death)},{d.birth_vertex},{dv}")
    return "\n".join(lines) + "\n"


def save_diagram(diag: PersistenceDiagram, path) -> None:
    Path(path).write_text(diagram_to_csv(diag))


def load_diagram(path, shape=(0, 0)) -> PersistenceDiagram:
    """Read a diagram CSV written by :func:`save_diagram`.

    The field maximum is not stored in the file; it is reconstructed as the
    largest finite coordinate, with vertex -1.
    """
    rows = Path(path).read_text().strip().splitlines()
    if rows and rows[0].startswith("dim"):
        rows = rows[1:]
    dim, birth, death, bv, dv = [], [], [], [], []
    for line in rows:
        parts = line.split(",")
        if len(parts) != 5:
            raise ValueError(f"bad diagram row: {line!r}")
        dim.append(int(parts[0]))
        birth.append(float(parts[1]))
        death.append(float(parts[2]))
        bv.append(int(parts[3]))
        dv.append(NO_VERTEX if parts[4] == "none" else int(parts[4]))
    birth_a = np.asarray(birth, dtype=np.float64)
    death_a = np.asarray(death, dtype=np.float64)
    finite = np.concatenate([birth_a, death_a[np.isfinite(death_a)]])
    return PersistenceDiagram(
        np.asarray(dim, np.int64), birth_a, death_a, np.asarray(bv, np.int64), np.asarray(dv, np.int64),
        tuple(shape), float(finite.max()) if finite.size else 0.0, NO_VERTEX,
    )


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def _gf2_rank(vectors) -> int:
    basis: dict[int, int] = {}
    rank = 0
    for v in vectors:
        while v:
            h = v.bit_length() - 1
            b = basis.get(h)
            if b is None:
                basis[h] = v
                rank += 1
                break
            v ^= b
    return rank


def brute_force_oracle(field) -> list[tuple[int, float, float]]:
    """Diagram of ``field`` from persistent Betti numbers, without any pairing.

    For every pair of sublevel complexes K_i <= K_j the rank of
    H_k(K_i) -> H_k(K_j) is computed from Z/2 matrix ranks, and dot
    multiplicities follow by inclusion-exclusion. Intended for small fields
    (a few dozen pixels); cost grows like (number of values)^2.

    Returns a sorted list of (dim, birth, death) with ``inf`` for essential dots.
    """
    f = np.asarray(field, dtype=np.float64)
    rows, cols = f.shape
    vid = lambda r, c: r * cols + c  # noqa: E731

    # cells as (value, frozenset of vertex ids); faces looked up by vertex sets
    vertices = [(f[r, c], frozenset([vid(r, c)])) for r in range(rows) for c in range(cols)]
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append(frozenset([vid(r, c), vid(r, c + 1)]))
            if r + 1 < rows:
                edges.append(frozenset([vid(r, c), vid(r + 1, c)]))
    squares = [frozenset([vid(r, c), vid(r, c + 1), vid(r + 1, c), vid(r + 1, c + 1)])
               for r in range(rows - 1) for c in range(cols - 1)]
    flat = f.ravel()
    val = lambda cell: max(flat[v] for v in cell)  # noqa: E731
    edge_index = {e: i for i, e in enumerate(edges)}

    edge_vals = np.array([val(e) for e in edges])
    sq_vals = np.array([val(s) for s in squares])
    # boundary vectors as bit sets over face indices
    edge_bd = [sum(1 << v for v in e) for e in edges]
    sq_bd = []
    for s in squares:
        vs = sorted(s)
        a, b, c, d = vs  # (r,c), (r,c+1), (r+1,c), (r+1,c+1)
        faces = [frozenset([a, b]), frozenset([c, d]), frozenset([a, c]), frozenset([b, d])]
        sq_bd.append(sum(1 << edge_index[x] for x in faces))

    t = np.unique(flat)
    m = len(t)
    n_vert = np.searchsorted(np.sort(flat), t, side="right")  # vertices in K_i

    def pbetti(k: int) -> np.ndarray:
        """beta[i, j] = rank H_k(K_i) -> H_k(K_j) for i <= j."""
        if k == 0:
            face_vals, cob_vals, cob_bd = flat, edge_vals, edge_bd
            z = n_vert.astype(np.int64)
        else:
            face_vals, cob_vals, cob_bd = edge_vals, sq_vals, sq_bd
            z = np.empty(m, dtype=np.int64)
            for i in range(m):
                inside = [edge_bd[e] for e in np.flatnonzero(edge_vals <= t[i])]
                z[i] = len(inside) - _gf2_rank(inside)
        beta = np.zeros((m, m), dtype=np.int64)
        for j in range(m):
            cols_j = [cob_bd[s] for s in np.flatnonzero(cob_vals <= t[j])]
            rank_j = _gf2_rank(cols_j)
            for i in range(j + 1):
                outside = 0
                for x in np.flatnonzero(face_vals > t[i]):
                    outside |= 1 << int(x)
                rank_proj = _gf2_rank([c & outside for c in cols_j])
                # dim(B_j ∩ C_k(K_i)) = rank_j - rank_proj
                beta[i, j] = z[i] - (rank_j - rank_proj)
        return beta

    out = []
    for k in (0, 1):
        beta = pbetti(k)
        B = lambda i, j: 0 if i < 0 else beta[i, j]  # noqa: E731
        for i in range(m):
            for j in range(i + 1, m):
                mu = B(i, j - 1) - B(i, j) - B(i - 1, j - 1) + B(i - 1, j)
                out.extend([(k, float(t[i]), float(t[j]))] * int(mu))
            mu_inf = B(i, m - 1) - B(i - 1, m - 1)
            out.extend([(k, float(t[i]), float("inf"))] * int(mu_inf))
    return sorted(out)
