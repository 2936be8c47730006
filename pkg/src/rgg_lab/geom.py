"""Point samples in the unit cube, l_p distances and dimensional constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .rng import Stream

# rows per block when forming distance matrices, keeps memory near 64 MB
_BLOCK_ELEMS = 1 << 23


@dataclass(frozen=True)
class Norm:
    """The l_p norm with ``1 < p <= inf``.

    ``p = inf`` (max-coordinate distance) is accepted for exploration but is
    not covered by the theory the experiments check.
    """

    p: float = 2.0

    def __post_init__(self):
        p = float(self.p)
        if math.isnan(p) or p <= 1.0:
            raise ValueError(f"norm exponent p must satisfy p > 1, got {self.p}")
        object.__setattr__(self, "p", p)

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.p)

    def label(self) -> str:
        return "inf" if self.is_inf else f"{self.p:g}"


EUCLIDEAN = Norm(2.0)


def _lp_from_diff(diff: np.ndarray, p: float) -> np.ndarray:
    # Coordinates are accumulated in a fixed order so that scalar and
    # vectorised callers produce bitwise identical distances.
    d = diff.shape[-1]
    if d == 1 or math.isinf(p):
        out = np.abs(diff[..., 0])
        for k in range(1, d):
            out = np.maximum(out, np.abs(diff[..., k]))
        return out
    if p == 2.0:
        out = diff[..., 0] * diff[..., 0]
        for k in range(1, d):
            out = out + diff[..., k] * diff[..., k]
        return np.sqrt(out)
    out = np.abs(diff[..., 0]) ** p
    for k in range(1, d):
        out = out + np.abs(diff[..., k]) ** p
    return out ** (1.0 / p)


@dataclass(frozen=True, eq=False)
class PointSet:
    """``n`` points of ``[0, 1]^d`` stored as a read-only ``(n, d)`` array."""

    coords: np.ndarray
    seed: Optional[int] = None
    stream: Optional[int] = field(default=None)

    def __post_init__(self):
        arr = np.array(self.coords, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"a point set needs shape (n>=1, d>=1), got {arr.shape}")
        if not np.all((arr >= 0.0) & (arr <= 1.0)):
            raise ValueError("all coordinates must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i) -> np.ndarray:
        return self.coords[i]


def sample_uniform(n: int, d: int, seed: Union[int, Stream]) -> PointSet:
    """Draw ``n`` i.i.d. uniform points of ``[0, 1]^d``.

    ``seed`` is either an integer token (stream 0 of that seed is used) or an
    open :class:`Stream`, in which case consecutive calls continue the stream.
    """
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    stream = seed if isinstance(seed, Stream) else Stream(seed, 0)
    coords = stream.uniform((n, d))
    return PointSet(coords, seed=stream.seed, stream=stream.stream)


def distance(a, b, norm: Norm = EUCLIDEAN) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(_lp_from_diff((a - b)[None, :], norm.p)[0])


def paired_distances(a: np.ndarray, b: np.ndarray, norm: Norm = EUCLIDEAN) -> np.ndarray:
    """Row-wise distances between two equally shaped ``(k, d)`` arrays."""
    return _lp_from_diff(np.asarray(a) - np.asarray(b), norm.p)


def cross_distances(a: np.ndarray, b: np.ndarray, norm: Norm = EUCLIDEAN) -> np.ndarray:
    """Full ``(len(a), len(b))`` distance matrix, built in row blocks."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[1] != b.shape[1]:
        raise ValueError("dimension mismatch")
    out = np.empty((a.shape[0], b.shape[0]))
    rows = max(1, _BLOCK_ELEMS // max(1, b.shape[0] * a.shape[1]))
    for s in range(0, a.shape[0], rows):
        diff = a[s:s + rows, None, :] - b[None, :, :]
        out[s:s + rows] = _lp_from_diff(diff, norm.p)
    return out


def pairwise_distances(points: PointSet, norm: Norm = EUCLIDEAN) -> np.ndarray:
    """Condensed distances of all pairs ``i < j`` in row-major pair order."""
    i, j = np.triu_indices(points.n, k=1)
    x = points.coords
    return paired_distances(x[i], x[j], norm)


def unit_ball_volume(d: int) -> float:
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def critical_radius(n: int, d: int) -> float:
    """Connectivity scale ``(ln n / (vol_d * n)) ** (1/d)``."""
    if n <= 1:
        raise ValueError("critical radius needs n >= 2")
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return (math.log(n) / (unit_ball_volume(d) * n)) ** (1.0 / d)


def cube_diameter(d: int, norm: Norm = EUCLIDEAN) -> float:
    return 1.0 if norm.is_inf else d ** (1.0 / norm.p)
