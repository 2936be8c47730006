"""Seeded random streams.

Every random draw in the package comes from a Philox-4x64-10 counter-based
generator keyed by the 128-bit pair ``(seed, stream)``. Raw 64-bit outputs are
converted to doubles in ``[0, 1)`` by keeping the top 53 bits, so the mapping
from ``(seed, stream)`` to floats depends only on the Philox definition and
not on how a numpy version implements its distribution methods.

Trial ``t`` of an experiment always reads stream ``t``, which makes results
independent of how trials are scheduled over workers.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_TO_UNIT = 2.0 ** -53


def _check_token(value: int, name: str) -> int:
    value = int(value)
    if not 0 <= value <= _MASK64:
        raise ValueError(f"{name} must lie in [0, 2**64), got {value}")
    return value


class Stream:
    """Deterministic source of uniform doubles for one ``(seed, stream)`` key."""

    __slots__ = ("seed", "stream", "_bitgen")

    def __init__(self, seed: int, stream: int = 0):
        self.seed = _check_token(seed, "seed")
        self.stream = _check_token(stream, "stream")
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self._bitgen = np.random.Philox(key=key)

    def raw(self, size: int) -> np.ndarray:
        return self._bitgen.random_raw(int(size))

    def uniform(self, shape) -> np.ndarray:
        """Doubles in ``[0, 1)`` filling ``shape`` in C order."""
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        count = int(np.prod(shape, dtype=np.int64))
        bits = self._bitgen.random_raw(count) >> np.uint64(11)
        return (bits.astype(np.float64) * _TO_UNIT).reshape(shape)

    def __repr__(self) -> str:
        return f"Stream(seed={self.seed}, stream={self.stream})"


def trial_stream(seed: int, trial: int) -> Stream:
    return Stream(seed, trial)


def derive_seed(seed: int, *labels: int) -> int:
    """Child seed for a sub-experiment (e.g. one ``n`` of a scaling sweep)."""
    entropy = [_check_token(seed, "seed")] + [int(x) & _MASK64 for x in labels]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)
