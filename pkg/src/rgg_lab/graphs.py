"""Random geometric graphs G(X; r) and Bernoulli graphs G(n, p)."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geom import EUCLIDEAN, Norm, PointSet, paired_distances
from .rng import Stream

_KEY_LIMIT = 1 << 62


class _Adjacency:
    """Sorted neighbour lists in CSR form over vertices ``0..n-1``."""

    def _init_adjacency(self, n: int, edges: np.ndarray) -> None:
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if len(edges):
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
        edges.setflags(write=False)
        both = np.concatenate([edges, edges[:, ::-1]])
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(both[:, 0], minlength=n), out=indptr[1:])
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_indptr", indptr)
        object.__setattr__(self, "_indices", both[:, 1].copy())

    @property
    def num_vertices(self) -> int:
        return len(self._indptr) - 1

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def _check_vertex(self, v: int) -> int:
        v = int(v)
        if not 0 <= v < self.num_vertices:
            raise IndexError(f"vertex {v} out of range 0..{self.num_vertices - 1}")
        return v

    def neighbors(self, v: int) -> np.ndarray:
        v = self._check_vertex(v)
        return self._indices[self._indptr[v]:self._indptr[v + 1]]

    def degree(self, v: int) -> int:
        v = self._check_vertex(v)
        return int(self._indptr[v + 1] - self._indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self._indptr)

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        v = self._check_vertex(v)
        k = np.searchsorted(nbrs, v)
        return bool(k < len(nbrs) and nbrs[k] == v)

    def edge_set(self) -> set:
        return {(int(i), int(j)) for i, j in self.edges}

    def csr(self):
        """``(indptr, indices)`` of the symmetric adjacency."""
        return self._indptr, self._indices


@dataclass(frozen=True, eq=False, init=False)
class GeometricGraph(_Adjacency):
    """G(X; r): vertex ``i`` is ``points[i]``; ``{i, j}`` is an edge iff
    ``distance(points[i], points[j]) <= radius``."""

    points: PointSet
    radius: float
    norm: Norm
    edges: np.ndarray

    def __init__(self, points: PointSet, radius: float, norm: Norm, edges):
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "radius", float(radius))
        object.__setattr__(self, "norm", norm)
        self._init_adjacency(points.n, edges)

    @property
    def n(self) -> int:
        return self.points.n


@dataclass(frozen=True, eq=False, init=False)
class BernoulliGraph(_Adjacency):
    n: int
    p: float
    edges: np.ndarray
    seed: Optional[int]

    def __init__(self, n: int, p: float, edges, seed: Optional[int] = None):
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "p", float(p))
        object.__setattr__(self, "seed", seed)
        self._init_adjacency(int(n), edges)


def _check_radius(r: float) -> float:
    r = float(r)
    if math.isnan(r) or r < 0:
        raise ValueError(f"radius must be >= 0, got {r}")
    return r


def geometric_edges(points: PointSet, r: float, norm: Norm = EUCLIDEAN) -> np.ndarray:
    """All pairs ``i < j`` within distance ``r`` by exhaustive testing."""
    r = _check_radius(r)
    i, j = np.triu_indices(points.n, k=1)
    x = points.coords
    keep = paired_distances(x[i], x[j], norm) <= r
    return np.stack([i[keep], j[keep]], axis=1)


def build_geometric(points: PointSet, r: float, norm: Norm = EUCLIDEAN) -> GeometricGraph:
    return GeometricGraph(points, r, norm, geometric_edges(points, r, norm))


def _grid_candidates(coords: np.ndarray, side: float):
    n, d = coords.shape
    per_axis = int(math.floor(1.0 / side)) + 1
    cells = np.minimum((coords / side).astype(np.int64), per_axis - 1)
    weights = per_axis ** np.arange(d, dtype=np.int64)
    keys = cells @ weights
    order = np.argsort(keys, kind="stable")
    uniq, starts, counts = np.unique(keys[order], return_index=True, return_counts=True)
    cell_of_uniq = cells[order[starts]]

    src_parts, dst_parts = [], []
    for offset in itertools.product((-1, 0, 1), repeat=d):
        nb = cell_of_uniq + np.asarray(offset, dtype=np.int64)
        valid = np.all((nb >= 0) & (nb < per_axis), axis=1)
        nb_keys = nb @ weights
        pos = np.searchsorted(uniq, nb_keys)
        pos = np.minimum(pos, len(uniq) - 1)
        hit = valid & (uniq[pos] == nb_keys)
        a_cells = np.nonzero(hit)[0]
        b_cells = pos[hit]
        if len(a_cells) == 0:
            continue
        # every point of cell a is paired with every point of cell b
        a_sizes = counts[a_cells]
        b_sizes = counts[b_cells]
        src_pts = np.repeat(a_cells, a_sizes)
        within_a = np.arange(a_sizes.sum()) - np.repeat(np.cumsum(a_sizes) - a_sizes, a_sizes)
        src_idx = starts[src_pts] + within_a
        reps = counts[np.repeat(b_cells, a_sizes)]
        dst_cell = np.repeat(np.repeat(b_cells, a_sizes), reps)
        within_b = np.arange(reps.sum()) - np.repeat(np.cumsum(reps) - reps, reps)
        src_parts.append(order[np.repeat(src_idx, reps)])
        dst_parts.append(order[starts[dst_cell] + within_b])
    if not src_parts:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    src = np.concatenate(src_parts)
    dst = np.concatenate(dst_parts)
    keep = src < dst
    return src[keep], dst[keep]


def build_geometric_grid(points: PointSet, r: float, norm: Norm = EUCLIDEAN) -> GeometricGraph:
    """Same edges as :func:`build_geometric`, found via cell hashing.

    Cells have side ``r`` (enlarged only when the cell key would overflow
    64 bits); an l_p ball of radius ``r`` lies inside the 3^d block of cells
    around its centre for every ``p``.
    """
    r = _check_radius(r)
    if r == 0.0:
        return GeometricGraph(points, r, norm, np.empty((0, 2), np.int64))
    d = points.dim
    cells_max = math.floor(_KEY_LIMIT ** (1.0 / d)) - 2
    # compare without forming 1/r, which overflows for subnormal r
    side = r if r * (cells_max - 1) > 1.0 else 1.0 / cells_max
    src, dst = _grid_candidates(points.coords, side)
    x = points.coords
    keep = paired_distances(x[src], x[dst], norm) <= r
    return GeometricGraph(points, r, norm, np.stack([src[keep], dst[keep]], axis=1))


def build_bernoulli(n: int, p: float, seed) -> BernoulliGraph:
    """G(n, p). Pair ``(i, j)``, ``i < j`` in row-major order, consumes one
    uniform ``u`` of the stream and is an edge iff ``u < p``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    if n < 0:
        raise ValueError("n must be >= 0")
    stream = seed if isinstance(seed, Stream) else Stream(seed, 0)
    i, j = np.triu_indices(n, k=1)
    keep = stream.uniform(len(i)) < p
    return BernoulliGraph(n, p, np.stack([i[keep], j[keep]], axis=1), seed=stream.seed)


def degree(graph: _Adjacency, vertex: int) -> int:
    return graph.degree(vertex)


def neighbors(graph: _Adjacency, vertex: int) -> list[int]:
    return [int(v) for v in graph.neighbors(vertex)]


def format_edge_list(graph: GeometricGraph) -> str:
    """Plain-text dump: header ``n d r p_norm seed`` then one ``i j`` per line."""
    seed = "none" if graph.points.seed is None else str(graph.points.seed)
    lines = [f"{graph.n} {graph.points.dim} {graph.radius:.9g} {graph.norm.label()} {seed}"]
    lines.extend(f"{i} {j}" for i, j in graph.edges)
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> dict:
    lines = text.strip().splitlines()
    n, d, r, p, seed = lines[0].split()
    edges = [tuple(int(t) for t in ln.split()) for ln in lines[1:]]
    return {
        "n": int(n),
        "d": int(d),
        "r": float(r),
        "p_norm": float(p),
        "seed": None if seed == "none" else int(seed),
        "edges": edges,
    }
