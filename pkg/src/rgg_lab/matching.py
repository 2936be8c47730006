"""Bottleneck bipartite matching.

Four solvers share the :class:`Matching` result type:

* :func:`brute_force_bottleneck` enumerates all ``n!`` bijections (oracle);
* :func:`exact_bottleneck` binary-searches the sorted candidate distances with
  a perfect-matching feasibility test at each probe;
* :func:`sorted_bottleneck_1d` pairs order statistics on the line;
* :func:`constructive_matching` subdivides both samples recursively with the
  order-statistic halving map and pairs points that land in the same box.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from ._hk import hopcroft_karp_csr

from .geom import (
    EUCLIDEAN,
    Norm,
    PointSet,
    cross_distances,
    cube_diameter,
    paired_distances,
    unit_ball_volume,
)

BRUTE_FORCE_MAX_N = 8
# below this size the exact solver works from the dense distance matrix
_DENSE_MAX_N = 384


@dataclass(frozen=True)
class BipartiteInstance:
    red: PointSet
    blue: PointSet
    norm: Norm = EUCLIDEAN

    def __post_init__(self):
        if self.red.n != self.blue.n:
            raise ValueError(f"set sizes differ: {self.red.n} red vs {self.blue.n} blue")
        if self.red.dim != self.blue.dim:
            raise ValueError(f"dimensions differ: {self.red.dim} vs {self.blue.dim}")

    @property
    def n(self) -> int:
        return self.red.n

    @property
    def dim(self) -> int:
        return self.red.dim


@dataclass(frozen=True, eq=False)
class Matching:
    """Bijection ``phi`` (red index -> blue index) and its bottleneck weight.

    ``certificate`` is set by the exact solver: the largest pairwise distance
    strictly below ``weight`` (``None`` if there is none), at which no perfect
    matching exists.
    """

    phi: np.ndarray
    weight: float
    certificate: Optional[float] = None

    @property
    def n(self) -> int:
        return len(self.phi)


def edge_lengths(inst: BipartiteInstance, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.int64)
    return paired_distances(inst.red.coords, inst.blue.coords[phi], inst.norm)


def is_permutation(phi, n: int) -> bool:
    phi = np.asarray(phi)
    if phi.shape != (n,):
        return False
    seen = np.zeros(n, dtype=bool)
    if np.any((phi < 0) | (phi >= n)):
        return False
    seen[phi] = True
    return bool(seen.all())


def matching_from_phi(inst: BipartiteInstance, phi, certificate=None) -> Matching:
    phi = np.array(phi, dtype=np.int64)
    if not is_permutation(phi, inst.n):
        raise ValueError("phi is not a permutation of the blue indices")
    phi.setflags(write=False)
    weight = float(edge_lengths(inst, phi).max())
    return Matching(phi, weight, certificate)


# ---------------------------------------------------------------- oracles


def brute_force_bottleneck(inst: BipartiteInstance) -> Matching:
    """Minimum-weight bijection by enumeration; ties go to the
    lexicographically smallest ``phi``."""
    n = inst.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    dist = cross_distances(inst.red.coords, inst.blue.coords, inst.norm)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    weights = dist[np.arange(n), perms].max(axis=1)
    # itertools yields permutations in lexicographic order; argmin takes the first
    return matching_from_phi(inst, perms[int(np.argmin(weights))])


def hopcroft_karp(adjacency: Sequence[Sequence[int]], n_right: int) -> list[int]:
    """Maximum bipartite matching; returns ``match[left] = right`` or ``-1``."""
    n_left = len(adjacency)
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    inf = n_left + n_right + 1

    while True:
        dist = [inf] * n_left
        queue = deque()
        for u in range(n_left):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for v in adjacency[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            break

        def augment(root: int) -> bool:
            # iterative DFS along the BFS layering
            stack = [(root, iter(adjacency[root]))]
            path = []
            while stack:
                u, it = stack[-1]
                advanced = False
                for v in it:
                    w = match_r[v]
                    if w == -1:
                        path.append((u, v))
                        for a, b in path:
                            match_l[a] = b
                            match_r[b] = a
                        return True
                    if dist[w] == dist[u] + 1:
                        path.append((u, v))
                        stack.append((w, iter(adjacency[w])))
                        advanced = True
                        break
                if not advanced:
                    dist[u] = inf
                    stack.pop()
                    if path:
                        path.pop()
            return False

        for u in range(n_left):
            if match_l[u] == -1:
                augment(u)
    return match_l


class _ThresholdGraph:
    """Red-blue candidate edges sorted by (red index, distance), so the edges
    of length ``<= t`` form a prefix of every row."""

    def __init__(self, n: int, rows: np.ndarray, cols: np.ndarray, dist: np.ndarray):
        order = np.lexsort((dist, rows))
        self.n = n
        self.rows = rows[order]
        self.cols = np.ascontiguousarray(cols[order], dtype=np.int64)
        self.dist = dist[order]
        self.starts = np.zeros(n, dtype=np.int64)
        np.cumsum(np.bincount(self.rows, minlength=n)[:-1], out=self.starts[1:])

    def perfect_matching(self, t: float, backend: str = "compiled") -> Optional[np.ndarray]:
        keep = self.dist <= t
        ends = self.starts + np.bincount(self.rows[keep], minlength=self.n)
        if backend == "compiled":
            match = hopcroft_karp_csr(self.starts, ends, self.cols, self.n)
        elif backend == "python":
            adjacency = [self.cols[s:e].tolist() for s, e in zip(self.starts, ends)]
            match = np.array(hopcroft_karp(adjacency, self.n), dtype=np.int64)
        else:
            raise ValueError(f"unknown matching backend {backend!r}")
        if np.any(match < 0):
            return None
        return match


def max_matching_at_threshold(inst: BipartiteInstance, t: float, backend: str = "compiled") -> Optional[Matching]:
    """A perfect matching using only red-blue pairs at distance ``<= t``, or
    ``None`` when the threshold graph has none."""
    if t < 0:
        raise ValueError("threshold must be >= 0")
    graph = _ThresholdGraph(inst.n, *_candidate_pairs(inst, t))
    phi = graph.perfect_matching(t, backend)
    return None if phi is None else matching_from_phi(inst, phi)


def _candidate_pairs(inst: BipartiteInstance, t: float):
    """All red-blue pairs with distance ``<= t``, distances recomputed with
    :func:`paired_distances` so they agree bitwise with every other solver."""
    red, blue = inst.red.coords, inst.blue.coords
    if inst.n <= _DENSE_MAX_N:
        dist = cross_distances(red, blue, inst.norm)
        rows, cols = np.nonzero(dist <= t)
        return rows, cols, dist[rows, cols]
    p = np.inf if inst.norm.is_inf else inst.norm.p
    reach = t * (1 + 1e-9) + 1e-15
    pairs = cKDTree(red).sparse_distance_matrix(cKDTree(blue), reach, p=p, output_type="ndarray")
    rows, cols = pairs["i"].astype(np.int64), pairs["j"].astype(np.int64)
    dist = paired_distances(red[rows], blue[cols], inst.norm)
    keep = dist <= t
    return rows[keep], cols[keep], dist[keep]


def _nearest_lower_bound(inst: BipartiteInstance) -> float:
    """``max`` over both colour classes of the nearest opposite-colour
    distance; no perfect matching exists below it."""
    red, blue = inst.red.coords, inst.blue.coords
    if inst.n <= _DENSE_MAX_N:
        dist = cross_distances(red, blue, inst.norm)
        return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))
    p = np.inf if inst.norm.is_inf else inst.norm.p
    _, j = cKDTree(blue).query(red, k=1, p=p)
    _, i = cKDTree(red).query(blue, k=1, p=p)
    a = paired_distances(red, blue[j], inst.norm).max()
    b = paired_distances(red[i], blue, inst.norm).max()
    # tree and recomputed distances may disagree in the last bit
    return float(max(a, b)) * (1 - 1e-9)


def exact_bottleneck(inst: BipartiteInstance, backend: str = "compiled") -> Matching:
    """Minimum bottleneck perfect matching.

    The optimum is one of the ``n^2`` red-blue distances. The search first
    grows a threshold geometrically from a nearest-neighbour lower bound until
    a perfect matching exists, then binary-searches the sorted distinct
    candidate distances below it.
    """
    n = inst.n
    if n == 1:
        return matching_from_phi(inst, [0])
    lower = _nearest_lower_bound(inst)
    top = cube_diameter(inst.dim, inst.norm)
    t = max(lower, 1e-12)
    while True:
        graph = _ThresholdGraph(n, *_candidate_pairs(inst, t))
        if t >= top or graph.perfect_matching(t, backend) is not None:
            break
        t = min(top, t * 1.5)

    cand = np.unique(graph.dist[graph.dist >= lower])
    lo, hi = 0, len(cand) - 1
    best = graph.perfect_matching(cand[hi], backend)
    while lo < hi:
        mid = (lo + hi) // 2
        phi = graph.perfect_matching(cand[mid], backend)
        if phi is None:
            lo = mid + 1
        else:
            hi, best = mid, phi
    weight = cand[lo]
    below = graph.dist[graph.dist < weight]
    certificate = float(below.max()) if len(below) else None
    m = matching_from_phi(inst, best, certificate)
    assert m.weight == weight
    return m


def certify_exact(inst: BipartiteInstance, m: Matching, backend: str = "compiled") -> bool:
    """Feasible at ``m.weight`` and infeasible at the largest pairwise
    distance strictly below it."""
    if max_matching_at_threshold(inst, m.weight, backend) is None:
        return False
    dist = np.sort(cross_distances(inst.red.coords, inst.blue.coords, inst.norm).ravel())
    k = np.searchsorted(dist, m.weight, side="left")
    if k == 0:
        return True
    return max_matching_at_threshold(inst, float(dist[k - 1]), backend) is None


def sorted_bottleneck_1d(inst: BipartiteInstance) -> Matching:
    """Pair the i-th smallest red with the i-th smallest blue (optimal on a line)."""
    if inst.dim != 1:
        raise ValueError(f"sorted pairing needs d = 1, got d = {inst.dim}")
    r = np.argsort(inst.red.coords[:, 0], kind="stable")
    b = np.argsort(inst.blue.coords[:, 0], kind="stable")
    phi = np.empty(inst.n, dtype=np.int64)
    phi[r] = b
    return matching_from_phi(inst, phi)


# ------------------------------------------------- recursive subdivision


def _lower_map(u: np.ndarray, upper_neighbor) -> np.ndarray:
    # u * (1/2) / (1/2 + delta_l) with delta_l = upper_neighbor - 1/2
    scale = 2.0 * np.asarray(upper_neighbor, dtype=np.float64)
    safe = np.where(scale > 0, scale, 1.0)
    return np.where(scale > 0, np.minimum(u / safe, 0.5), 0.0)


def _upper_map(u: np.ndarray, lower_neighbor) -> np.ndarray:
    # 1 - (1 - u) * (1/2) / (1/2 + delta_r) with delta_r = 1/2 - lower_neighbor
    scale = 2.0 * (1.0 - np.asarray(lower_neighbor, dtype=np.float64))
    safe = np.where(scale > 0, scale, 1.0)
    return np.where(scale > 0, np.maximum(1.0 - (1.0 - u) / safe, 0.5), 1.0)


def halving_transform(values, a: float = 0.0, b: float = 1.0):
    """Split sorted values of ``[a, b]`` at the median rank and stretch each
    half onto its half-interval.

    The lower ``ceil(m/2)`` values go to ``[a, (a+b)/2]``, the rest to
    ``[(a+b)/2, b]``. Returns ``(left, right, delta_l, delta_r)`` where the
    deltas are measured on the interval rescaled to ``[0, 1]``::

        delta_l = u[h+1] - 1/2,   delta_r = 1/2 - u[h],   h = ceil(m/2)

    (1-based order statistics). Conditional on the split, each half is again
    an i.i.d. uniform sample of its half-interval, and no value moves by more
    than ``max(|delta_l|, |delta_r|) * (b - a)``.
    """
    x = np.asarray(values, dtype=np.float64)
    m = len(x)
    if m < 2:
        raise ValueError("halving needs at least two values")
    if b <= a:
        raise ValueError("empty interval")
    if np.any(np.diff(x) < 0):
        raise ValueError("values must be sorted")
    if x[0] < a or x[-1] > b:
        raise ValueError("values must lie inside [a, b]")
    length = b - a
    u = (x - a) / length
    h = (m + 1) // 2
    delta_l = float(u[h] - 0.5)
    delta_r = float(0.5 - u[h - 1])
    mid = (a + b) / 2
    # clipping only absorbs rounding in a + length * mapped
    left = np.clip(a + length * _lower_map(u[:h], u[h]), a, mid)
    right = np.clip(a + length * _upper_map(u[h:], u[h - 1]), mid, b)
    return left, right, delta_l, delta_r


def steps_schedule(n: int, d: int) -> int:
    """Number of full subdivision steps.

    ``ceil(log2 n)`` for ``d <= 2`` (one point per box) and
    ``ceil(log2(n / ln n) / d)`` for ``d >= 3``.
    """
    if n < 2:
        raise ValueError("steps schedule needs n >= 2")
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if d <= 2:
        return (n - 1).bit_length()
    return max(0, math.ceil(math.log2(n / math.log(n)) / d))


@dataclass(frozen=True, eq=False)
class ShiftTrace:
    """Displacements recorded while subdividing one point set.

    ``split_max_shift[s]`` is the largest displacement of any point during the
    ``s``-th axis split (splits run axis 0..d-1 within each step).
    ``displacement`` is the final position minus the original one, per point
    and coordinate; ``total_max_shift`` is its largest absolute entry.
    """

    split_max_shift: tuple
    split_axes: tuple
    displacement: np.ndarray
    positions: np.ndarray
    steps: int
    dim: int

    @property
    def total_max_shift(self) -> float:
        if self.displacement.size == 0:
            return 0.0
        return float(np.abs(self.displacement).max())

    @property
    def box_side(self) -> float:
        return 2.0 ** -self.steps

    def axis_shift_sums(self) -> np.ndarray:
        """Sum of the per-split maxima along each axis; bounds every
        coordinate of ``displacement``."""
        sums = np.zeros(self.dim)
        for axis, s in zip(self.split_axes, self.split_max_shift):
            sums[axis] += s
        return sums

    def step_max_shift(self) -> list[float]:
        """Largest single-split displacement within each full step."""
        d = self.dim
        return [max(self.split_max_shift[i * d:(i + 1) * d], default=0.0) for i in range(self.steps)]


def recursive_subdivide(points: PointSet, j: int):
    """Run ``j`` full subdivision steps on ``points``.

    A step halves every current box along each axis in turn, moving the
    points of the box with :func:`halving_transform` (applied to all boxes at
    once). The split is rank based, so any two sets of the same size end with
    identical per-box counts. Returns ``(boxes, trace)`` where ``boxes[i]`` is
    the integer multi-index of the box of side ``2**-j`` holding point ``i``.
    """
    if j < 0:
        raise ValueError("number of steps must be >= 0")
    n, d = points.n, points.dim
    x = points.coords.copy()
    boxes = np.zeros((n, d), dtype=np.int64)
    split_max, split_axes = [], []
    for step in range(j):
        side = 2.0 ** -step
        for k in range(d):
            keys = [x[:, k]] + [boxes[:, c] for c in reversed(range(d))]
            order = np.lexsort(keys)
            sb = boxes[order]
            new_group = np.ones(n, dtype=bool)
            new_group[1:] = np.any(sb[1:] != sb[:-1], axis=1)
            starts = np.nonzero(new_group)[0]
            sizes = np.diff(np.append(starts, n))
            gid = np.cumsum(new_group) - 1
            rank = np.arange(n) - starts[gid]
            half = (sizes + 1) // 2
            lower = rank < half[gid]

            a = sb[:, k] * side
            u = np.clip((x[order, k] - a) / side, 0.0, 1.0)
            upper_idx = starts + half
            upper_nb = np.where(half < sizes, u[np.minimum(upper_idx, n - 1)], 1.0)
            lower_nb = u[starts + half - 1]
            mapped = np.where(
                lower,
                _lower_map(u, upper_nb[gid]),
                _upper_map(u, lower_nb[gid]),
            )
            new_x = np.clip(a + side * mapped,
                            np.where(lower, a, a + side / 2),
                            np.where(lower, a + side / 2, a + side))
            shift = np.abs(new_x - x[order, k])
            split_max.append(float(shift.max()))
            split_axes.append(k)
            x[order, k] = new_x
            boxes[order, k] = 2 * sb[:, k] + (~lower)
    trace = ShiftTrace(
        split_max_shift=tuple(split_max),
        split_axes=tuple(split_axes),
        displacement=x - points.coords,
        positions=x,
        steps=j,
        dim=d,
    )
    return boxes, trace


def _box_order(boxes: np.ndarray, first_coord: np.ndarray) -> np.ndarray:
    keys = [first_coord] + [boxes[:, c] for c in reversed(range(boxes.shape[1]))]
    return np.lexsort(keys)


@dataclass(frozen=True, eq=False)
class ConstructiveResult:
    matching: Matching
    red_trace: ShiftTrace
    blue_trace: ShiftTrace
    steps: int = field(default=0)

    def __iter__(self):
        return iter((self.matching, self.red_trace, self.blue_trace))

    def diagnostic_bound(self, norm: Norm = EUCLIDEAN) -> float:
        """Triangle-inequality bound on the weight: each point moves by at
        most ``total_max_shift`` per coordinate and matched points share a
        box of side ``2**-steps``."""
        d = self.red_trace.dim
        factor = 1.0 if norm.is_inf else d ** (1.0 / norm.p)
        box = self.red_trace.box_side
        return factor * (self.red_trace.total_max_shift + self.blue_trace.total_max_shift + box)

    def loose_bound(self) -> float:
        """``sqrt(d) * (shift_red + shift_blue + sqrt(d) * box_side)``."""
        d = self.red_trace.dim
        rt = math.sqrt(d)
        return rt * (self.red_trace.total_max_shift + self.blue_trace.total_max_shift
                     + rt * self.red_trace.box_side)


def constructive_matching(inst: BipartiteInstance, steps: Optional[int] = None) -> ConstructiveResult:
    """Match by recursive subdivision of both colour classes.

    Both sets are subdivided for ``steps_schedule(n, d)`` steps; inside each
    box the red and blue points are paired by rank of their original first
    coordinate. Unpacks as ``(matching, red_trace, blue_trace)``.
    """
    n, d = inst.n, inst.dim
    j = (0 if n < 2 else steps_schedule(n, d)) if steps is None else int(steps)
    red_boxes, red_trace = recursive_subdivide(inst.red, j)
    blue_boxes, blue_trace = recursive_subdivide(inst.blue, j)
    r_order = _box_order(red_boxes, inst.red.coords[:, 0])
    b_order = _box_order(blue_boxes, inst.blue.coords[:, 0])
    if not np.array_equal(red_boxes[r_order], blue_boxes[b_order]):
        raise AssertionError("red and blue box occupancies differ")
    phi = np.empty(n, dtype=np.int64)
    phi[r_order] = b_order
    return ConstructiveResult(matching_from_phi(inst, phi), red_trace, blue_trace, j)


# ------------------------------------------------ theoretical schedules


def gamma_schedule(n: int, d: int, steps: int, beta: float = 1.0) -> np.ndarray:
    """Per-step shift scales solving ``g_i^2 n / 2^((i-1)(d-2)) = beta^2 ln n``.

    Diagnostic only; the subdivision never reads it.
    """
    i = np.arange(1, steps + 1)
    return beta * np.sqrt(math.log(n) * 2.0 ** ((i - 1) * (d - 2)) / n)


def beta_schedule_1d(steps: int, beta0: float = 1.0) -> np.ndarray:
    """Line schedule ``2^i b_i^2 = b0^2 + i``; diagnostic only."""
    i = np.arange(1, steps + 1)
    return np.sqrt((beta0 ** 2 + i) / 2.0 ** i)


def subdivision_constant(d: int) -> float:
    """``sqrt(d) + 2 sqrt(d) vol_d^(1/d)``; any larger constant works in the
    high-probability bound ``M_n <= c beta r_c``."""
    return math.sqrt(d) + 2 * math.sqrt(d) * unit_ball_volume(d) ** (1.0 / d)


SOLVERS = {
    "brute": brute_force_bottleneck,
    "exact": exact_bottleneck,
    "sorted": sorted_bottleneck_1d,
    "constructive": lambda inst: constructive_matching(inst).matching,
}


def solve(inst: BipartiteInstance, method: str) -> Matching:
    """Dispatch by name; ``exact`` uses the sorted pairing when ``d = 1``."""
    if method == "exact" and inst.dim == 1:
        method = "sorted"
    try:
        fn = SOLVERS[method]
    except KeyError:
        raise ValueError(f"unknown matching method {method!r}") from None
    return fn(inst)


def format_matching(inst: BipartiteInstance, m: Matching) -> str:
    """Dump: header ``n d p_norm weight``, then ``red blue distance`` rows."""
    lengths = edge_lengths(inst, m.phi)
    lines = [f"{inst.n} {inst.dim} {inst.norm.label()} {m.weight:.9g}"]
    lines.extend(f"{i} {int(j)} {w:.9g}" for i, (j, w) in enumerate(zip(m.phi, lengths)))
    return "\n".join(lines) + "\n"
