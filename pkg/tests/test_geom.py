import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import kstest

from rgg_lab.geom import (
    EUCLIDEAN,
    Norm,
    PointSet,
    critical_radius,
    cross_distances,
    cube_diameter,
    distance,
    pairwise_distances,
    sample_uniform,
    unit_ball_volume,
)
from rgg_lab.parallel import run_trials
from rgg_lab.rng import Stream

unit = st.floats(0.0, 1.0, allow_nan=False)


def test_single_point_in_cube():
    ps = sample_uniform(1, 3, 42)
    assert ps.n == 1 and ps.dim == 3
    assert np.all((ps.coords >= 0) & (ps.coords <= 1))


def test_sampling_is_deterministic():
    a = sample_uniform(50, 2, 9)
    b = sample_uniform(50, 2, 9)
    assert np.array_equal(a.coords, b.coords)
    assert a.seed == 9


def test_empirical_cdf_close_to_uniform():
    x = sample_uniform(10_000, 1, 2024).coords[:, 0]
    assert kstest(x, "uniform").statistic <= 0.02


@pytest.mark.parametrize("n,d", [(0, 2), (3, 0)])
def test_sample_rejects_empty_configuration(n, d):
    with pytest.raises(ValueError):
        sample_uniform(n, d, 1)


def test_pointset_validation():
    with pytest.raises(ValueError):
        PointSet(np.array([[0.5, 1.5]]))
    with pytest.raises(ValueError):
        PointSet(np.zeros((0, 2)))
    ps = PointSet([0.1, 0.3])
    assert ps.dim == 1 and len(ps) == 2
    with pytest.raises(ValueError):
        ps.coords[0, 0] = 0.5


def test_norm_validation():
    assert Norm().p == 2.0
    assert Norm(math.inf).is_inf
    for bad in (1.0, 0.5, float("nan")):
        with pytest.raises(ValueError):
            Norm(bad)


def test_distance_examples():
    assert distance([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert distance([0.0, 0.0], [0.6, 0.8]) == pytest.approx(1.0, abs=1e-15)
    assert distance([0.0, 0.0], [0.5, 0.5], Norm(4)) == pytest.approx(0.594604, abs=1e-6)
    assert distance([0.0, 0.0], [0.5, 0.25], Norm(math.inf)) == 0.5


def test_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        distance([0.1, 0.2], [0.1, 0.2, 0.3])


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_triangle_inequality_random_triples(p):
    norm = Norm(p)
    x = Stream(1, int(p * 10)).uniform((1000, 3, 3))
    for a, b, c in x:
        assert distance(a, c, norm) <= distance(a, b, norm) + distance(b, c, norm) + 1e-12


@given(st.lists(unit, min_size=3, max_size=3), st.lists(unit, min_size=3, max_size=3),
       st.floats(1.01, 8.0), st.floats(1.01, 8.0))
def test_norm_ordering(a, b, p, q):
    lo, hi = sorted((p, q))
    assert distance(a, b, Norm(lo)) >= distance(a, b, Norm(hi)) - 1e-12
    assert distance(a, b, Norm(hi)) >= distance(a, b, Norm(math.inf)) - 1e-12


@given(st.lists(unit, min_size=2, max_size=2), st.lists(unit, min_size=2, max_size=2))
def test_distance_symmetric(a, b):
    assert distance(a, b) == distance(b, a)


def test_vector_and_scalar_distances_agree_bitwise():
    ps = sample_uniform(12, 3, 5)
    for norm in (EUCLIDEAN, Norm(3.0), Norm(math.inf)):
        cond = pairwise_distances(ps, norm)
        full = cross_distances(ps.coords, ps.coords, norm)
        i, j = np.triu_indices(12, k=1)
        assert np.array_equal(cond, full[i, j])
        assert cond[0] == distance(ps[0], ps[1], norm)


def test_unit_ball_volume():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4.188790, abs=1e-6)


def test_critical_radius_examples():
    # reference values from a 30-digit evaluation of the formula
    assert critical_radius(3, 1) == pytest.approx(0.183102048111, abs=1e-11)
    assert critical_radius(100, 2) == pytest.approx(0.121073167868, abs=1e-11)
    assert critical_radius(1000, 3) == pytest.approx(0.118145208039, abs=1e-11)
    with pytest.raises(ValueError):
        critical_radius(1, 2)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_critical_radius_strictly_decreasing(d):
    values = [critical_radius(n, d) for n in range(3, 1_000_001)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_cube_diameter():
    assert cube_diameter(3) == pytest.approx(math.sqrt(3))
    assert cube_diameter(2, Norm(math.inf)) == 1.0


def _sample_checksum(seed, trial):
    return sample_uniform(20, 2, Stream(seed, trial)).coords.tobytes()


def test_sampling_reproducible_under_parallel_trials():
    assert run_trials(_sample_checksum, 4, 6, jobs=2) == run_trials(_sample_checksum, 4, 6, jobs=1)
