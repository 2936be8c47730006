import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rgg_lab.geom import Norm, PointSet, sample_uniform
from rgg_lab.graphs import (
    build_bernoulli,
    build_geometric,
    build_geometric_grid,
    degree,
    format_edge_list,
    neighbors,
    parse_edge_list,
)
from rgg_lab.rng import Stream

THREE = PointSet([0.1, 0.3, 0.9])


def test_zero_radius_gives_empty_graph():
    ps = sample_uniform(30, 2, 1)
    assert build_geometric(ps, 0.0).num_edges == 0
    assert build_geometric_grid(ps, 0.0).num_edges == 0


@pytest.mark.parametrize("d", [1, 2, 3])
def test_cube_diagonal_gives_complete_graph(d):
    ps = sample_uniform(25, d, d)
    for build in (build_geometric, build_geometric_grid):
        g = build(ps, math.sqrt(d))
        assert g.num_edges == 25 * 24 // 2


def test_three_point_example():
    g = build_geometric(THREE, 0.25)
    assert g.edge_set() == {(0, 1)}
    assert [degree(g, v) for v in range(3)] == [1, 1, 0]
    assert neighbors(g, 0) == [1]
    assert g.has_edge(1, 0) and not g.has_edge(0, 2)


def test_negative_radius_rejected():
    with pytest.raises(ValueError):
        build_geometric(THREE, -0.1)
    with pytest.raises(ValueError):
        build_geometric_grid(THREE, -1e-9)


def test_degree_out_of_range():
    g = build_geometric(THREE, 0.25)
    with pytest.raises(IndexError):
        g.degree(3)
    with pytest.raises(IndexError):
        neighbors(g, -1)


def test_boundary_distance_is_an_edge():
    ps = PointSet([0.25, 0.75])
    assert build_geometric(ps, 0.5).num_edges == 1
    assert build_geometric_grid(ps, 0.5).num_edges == 1


def test_empty_and_complete_degrees():
    ps = sample_uniform(9, 2, 3)
    assert np.all(build_geometric(ps, 0).degrees() == 0)
    assert np.all(build_geometric(ps, 2).degrees() == 8)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_grid_matches_naive_on_random_instances(d):
    for t in range(100):
        s = Stream(100 + d, t)
        n = 2 + int(s.uniform(1)[0] * 300)
        r = float(s.uniform(1)[0]) * 0.4
        norm = Norm((1.5, 2.0, 4.0, math.inf)[t % 4])
        ps = sample_uniform(n, d, s)
        naive = build_geometric(ps, r, norm)
        grid = build_geometric_grid(ps, r, norm)
        assert np.array_equal(naive.edges, grid.edges), (d, t)


def test_grid_large_instance_edge_count():
    ps = sample_uniform(2000, 2, 77)
    assert build_geometric_grid(ps, 0.05).num_edges == build_geometric(ps, 0.05).num_edges


def test_grid_tiny_radius_high_dimension():
    ps = sample_uniform(40, 6, 5)
    assert np.array_equal(build_geometric_grid(ps, 1e-18).edges, build_geometric(ps, 1e-18).edges)


@given(st.integers(0, 2 ** 32), st.integers(1, 3), st.floats(0, 1.2), st.floats(0, 1.2))
def test_edges_monotone_in_radius(seed, d, r1, r2):
    ps = sample_uniform(20, d, seed)
    lo, hi = sorted((r1, r2))
    assert build_geometric_grid(ps, lo).edge_set() <= build_geometric_grid(ps, hi).edge_set()


@given(st.integers(0, 2 ** 32), st.integers(1, 3), st.floats(0, 1.0))
def test_handshake_and_symmetry(seed, d, r):
    g = build_geometric_grid(sample_uniform(30, d, seed), r)
    assert g.degrees().sum() == 2 * g.num_edges
    for u, v in g.edges:
        assert u < v and g.has_edge(v, u)


def test_bernoulli_extremes():
    assert build_bernoulli(10, 0.0, 1).num_edges == 0
    assert build_bernoulli(10, 1.0, 1).num_edges == 45
    with pytest.raises(ValueError):
        build_bernoulli(10, 1.1, 1)


def test_bernoulli_deterministic_per_seed():
    assert build_bernoulli(30, 0.4, 6).edge_set() == build_bernoulli(30, 0.4, 6).edge_set()


def test_bernoulli_mean_edge_count():
    counts = np.array([build_bernoulli(100, 0.3, Stream(55, s)).num_edges for s in range(10_000)])
    # the mean of 10^4 counts has standard error 32.25 / 100
    assert abs(counts.mean() - 1485) <= 3 * 32.25 / 100


def test_edge_list_round_trip():
    ps = sample_uniform(15, 2, 321)
    g = build_geometric_grid(ps, 0.3, Norm(3))
    text = format_edge_list(g)
    assert text.splitlines()[0] == "15 2 0.3 3 321"
    parsed = parse_edge_list(text)
    assert parsed["n"] == 15 and parsed["p_norm"] == 3.0 and parsed["seed"] == 321
    assert set(parsed["edges"]) == g.edge_set()
