"""Increasing graph properties and their per-sample critical radii.

For a fixed point set ``X`` the graph ``G(X; r)`` only changes when ``r``
crosses a pairwise distance, so an increasing property holds exactly for
``r >= r*(X)`` where ``r*(X)`` is one of those distances (or 0). The three
shipped properties have closed-form ``r*``:

=================  =========================================================
connectivity       longest edge of the minimum spanning tree
mindeg-quarter     largest distance from a point to its ``ceil(n/4)``-th
                   nearest neighbour
complete           diameter of the point set
=================  =========================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree
from scipy.spatial import ConvexHull
from scipy.spatial import QhullError

from .geom import (
    EUCLIDEAN,
    Norm,
    PointSet,
    _lp_from_diff,
    critical_radius,
    cross_distances,
    cube_diameter,
    paired_distances,
    pairwise_distances,
    sample_uniform,
)
from .graphs import GeometricGraph, build_geometric, build_geometric_grid
from .rng import Stream

METHODS = ("mst_longest_edge", "knn_quarter", "diameter", "generic_search")


def is_connected(graph: GeometricGraph) -> bool:
    n = graph.n
    if n <= 1:
        return True
    if graph.num_edges < n - 1:
        return False
    indptr, indices = graph.csr()
    adj = csr_matrix((np.ones(len(indices), dtype=np.int8), indices, indptr), shape=(n, n))
    count, _ = connected_components(adj, directed=False)
    return count == 1


def quarter_degree(n: int) -> int:
    """Smallest integer degree satisfying ``deg >= n / 4``."""
    return -(-n // 4)


def min_degree_quarter(graph: GeometricGraph) -> bool:
    return bool(graph.degrees().min() >= quarter_degree(graph.n))


def is_complete(graph: GeometricGraph) -> bool:
    n = graph.n
    return graph.num_edges == n * (n - 1) // 2


@dataclass(frozen=True)
class MonotoneProperty:
    name: str
    predicate: Callable[[GeometricGraph], bool]
    method: str = "generic_search"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown critical-radius method {self.method!r}")

    def __call__(self, graph: GeometricGraph) -> bool:
        return bool(self.predicate(graph))


CONNECTIVITY = MonotoneProperty("connectivity", is_connected, "mst_longest_edge")
MIN_DEGREE_QUARTER = MonotoneProperty("mindeg-quarter", min_degree_quarter, "knn_quarter")
COMPLETE = MonotoneProperty("complete", is_complete, "diameter")

PROPERTIES = {p.name: p for p in (CONNECTIVITY, MIN_DEGREE_QUARTER, COMPLETE)}


def get_property(name: str) -> MonotoneProperty:
    try:
        return PROPERTIES[name]
    except KeyError:
        known = ", ".join(sorted(PROPERTIES))
        raise ValueError(f"unknown property {name!r}; known: {known}") from None


# ------------------------------------------------------- critical radii


SPARSE_MST_MIN_N = 512


def prim_longest_edge(points: PointSet, norm: Norm = EUCLIDEAN) -> float:
    """Longest edge of the minimum spanning tree (dense Prim, O(n^2))."""
    x = points.coords
    n = len(x)
    if n <= 1:
        return 0.0
    rest = np.arange(1, n)
    best = _lp_from_diff(x[rest] - x[0], norm.p)
    longest = 0.0
    while len(rest):
        k = int(np.argmin(best))
        longest = max(longest, float(best[k]))
        v = rest[k]
        rest = np.delete(rest, k)
        best = np.delete(best, k)
        if len(rest):
            np.minimum(best, _lp_from_diff(x[rest] - x[v], norm.p), out=best)
    return longest


def _sparse_longest_edge(points: PointSet, norm: Norm) -> float:
    # Any connected G(X; r0) contains a minimum spanning tree of the complete
    # graph, so its own MST has the same longest edge.
    n, d = points.n, points.dim
    r0 = 1.5 * critical_radius(n, d)
    top = cube_diameter(d, norm)
    while True:
        g = build_geometric_grid(points, r0, norm)
        if is_connected(g):
            src, dst = g.edges[:, 0], g.edges[:, 1]
            w = paired_distances(points.coords[src], points.coords[dst], norm)
            # zero-length edges are dropped by the sparse format; they never
            # carry the maximum unless every edge is zero
            tree = minimum_spanning_tree(csr_matrix((w, (src, dst)), shape=(n, n)))
            return float(tree.data.max()) if tree.nnz else 0.0
        if r0 >= top:
            return prim_longest_edge(points, norm)
        r0 = min(2.0 * r0, top)


def mst_longest_edge(points: PointSet, norm: Norm = EUCLIDEAN) -> float:
    """Longest edge of a minimum spanning tree: the smallest ``r`` at which
    ``G(X; r)`` is connected."""
    if points.n >= SPARSE_MST_MIN_N:
        return _sparse_longest_edge(points, norm)
    return prim_longest_edge(points, norm)


def _kth_neighbor_1d(x: np.ndarray, k: int) -> np.ndarray:
    # The k nearest neighbours of a point on a line, together with the point,
    # occupy a window of k+1 consecutive order statistics.
    n = len(x)
    xs = np.sort(x)
    i = np.arange(n)
    window_sum = xs[:n - k] + xs[k:]
    lo = np.maximum(0, i - k)
    hi = np.minimum(i, n - 1 - k)
    s_star = np.searchsorted(window_sum, 2.0 * xs, side="left")
    best = np.full(n, np.inf)
    for s in (s_star - 1, s_star):
        s = np.clip(s, lo, hi)
        reach = np.maximum(xs - xs[s], xs[s + k] - xs)
        best = np.minimum(best, reach)
    return best


def kth_neighbor_distances(points: PointSet, k: int, norm: Norm = EUCLIDEAN) -> np.ndarray:
    """Distance from every point to its ``k``-th nearest other point
    (values are returned in sorted-coordinate order when ``d = 1``)."""
    n = points.n
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= n - 1, got k={k}, n={n}")
    if points.dim == 1:
        return _kth_neighbor_1d(points.coords[:, 0], k)
    dist = cross_distances(points.coords, points.coords, norm)
    return np.partition(dist, k, axis=1)[:, k]


def knn_quarter_radius(points: PointSet, norm: Norm = EUCLIDEAN) -> float:
    n = points.n
    k = quarter_degree(n)
    if k > n - 1:
        # a lone vertex never reaches degree 1
        return math.inf
    return float(kth_neighbor_distances(points, k, norm).max())


def diameter(points: PointSet, norm: Norm = EUCLIDEAN) -> float:
    """Largest pairwise distance; for d >= 2 only hull vertices are compared
    (a norm is convex, so the maximum sits at extreme points)."""
    x = points.coords
    n, d = x.shape
    if n <= 1:
        return 0.0
    if d == 1:
        return float(x[:, 0].max() - x[:, 0].min())
    if n > 64:
        try:
            x = x[ConvexHull(x).vertices]
        except QhullError:
            pass
    return float(cross_distances(x, x, norm).max())


def generic_critical_radius(prop: MonotoneProperty, points: PointSet, norm: Norm = EUCLIDEAN) -> float:
    """Binary search over ``0`` and the sorted pairwise distances using only
    the predicate; ``inf`` if the property fails even for the complete graph."""
    cand = np.concatenate([[0.0], np.unique(pairwise_distances(points, norm))])

    def holds(k: int) -> bool:
        return prop(build_geometric(points, float(cand[k]), norm))

    lo, hi = 0, len(cand) - 1
    if not holds(hi):
        return math.inf
    while lo < hi:
        mid = (lo + hi) // 2
        if holds(mid):
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])


_CLOSED_FORMS = {
    "mst_longest_edge": mst_longest_edge,
    "knn_quarter": knn_quarter_radius,
    "diameter": diameter,
}


def critical_radius_sample(prop: MonotoneProperty, points: PointSet, norm: Norm = EUCLIDEAN,
                           method: Optional[str] = None) -> float:
    """Smallest ``r`` with ``prop(G(points; r))`` true.

    ``method`` overrides the property's own evaluator, e.g. ``"generic_search"``
    to cross-check a closed form.
    """
    method = method or prop.method
    if method == "generic_search":
        return generic_critical_radius(prop, points, norm)
    try:
        fn = _CLOSED_FORMS[method]
    except KeyError:
        raise ValueError(f"unknown critical-radius method {method!r}") from None
    return fn(points, norm)


# ------------------------------------------------------ monotone harness


@dataclass(frozen=True)
class MonotonicityReport:
    ok: bool
    trials: int
    counterexample: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


def assert_monotone(prop: MonotoneProperty, trials: int, seed: int, max_n: int = 12,
                    norm: Norm = EUCLIDEAN) -> MonotonicityReport:
    """Randomised check of the increasing-property contract.

    Each trial draws ``2 <= n <= max_n`` points in dimension 1-3 and

    * evaluates the predicate on random radius pairs ``r < r'`` and fails if
      it holds at ``r`` but not at ``r'``;
    * sweeps every pairwise distance and the midpoints between consecutive
      ones, failing unless the predicate equals ``r >= r*`` throughout.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for t in range(trials):
        stream = Stream(seed, t)
        n, d = 2 + int(stream.uniform(1)[0] * (max_n - 1)), 1 + int(stream.uniform(1)[0] * 3)
        points = sample_uniform(n, d, stream)
        top = cube_diameter(d, norm)
        for r1, r2 in np.sort(stream.uniform((4, 2)) * top, axis=1):
            a = prop(build_geometric(points, r1, norm))
            b = prop(build_geometric(points, r2, norm))
            if a and not b:
                return MonotonicityReport(False, t + 1, (
                    f"trial {t}: n={n} d={d} holds at r={r1:.9g} but not at r'={r2:.9g}"))
        r_star = critical_radius_sample(prop, points, norm)
        dists = np.unique(pairwise_distances(points, norm))
        sweep = np.concatenate([[0.0], dists, (dists[:-1] + dists[1:]) / 2, [top]])
        for r in np.sort(sweep):
            if prop(build_geometric(points, r, norm)) != (r >= r_star):
                return MonotonicityReport(False, t + 1, (
                    f"trial {t}: n={n} d={d} predicate at r={r:.9g} disagrees with r*={r_star:.9g}"))
    return MonotonicityReport(True, trials)
