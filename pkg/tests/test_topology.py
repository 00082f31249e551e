import json

import numpy as np
import pytest

from delaygrad.topology import (
    MixingMatrix,
    NotConnected,
    Topology,
    generate_random_geometric,
    graph_from_json,
    graph_to_json,
    lazy_metropolis,
    second_largest_singular_value,
    validate_mixing,
)


def path_topology(n):
    coords = np.column_stack([np.linspace(0.1, 0.9, n), np.full(n, 0.5)])
    edges = frozenset((i, i + 1) for i in range(n - 1))
    return Topology(n=n, coords=coords, edges=edges)


def ring_topology(n):
    angles = 2 * np.pi * np.arange(n) / n
    coords = 0.5 + 0.4 * np.column_stack([np.cos(angles), np.sin(angles)])
    edges = frozenset((i, (i + 1) % n) if i < (i + 1) % n else ((i + 1) % n, i) for i in range(n))
    return Topology(n=n, coords=coords, edges=edges)


def complete_topology(n):
    rng = np.random.default_rng(7)
    coords = rng.uniform(size=(n, 2))
    edges = frozenset((i, j) for i in range(n) for j in range(i + 1, n))
    return Topology(n=n, coords=coords, edges=edges)


class TestGenerateRandomGeometric:
    def test_two_nodes_large_radius_single_edge(self):
        # any two points in the unit square are within sqrt(2) < 1.5
        top = generate_random_geometric(2, 1.5, seed=0)
        assert top.edges == frozenset({(0, 1)})

    def test_reference_size_is_connected(self):
        top = generate_random_geometric(30, 0.6, seed=42)
        assert top.n == 30
        assert len(top.edges) > 0

    def test_vanishing_radius_raises(self):
        with pytest.raises(NotConnected):
            generate_random_geometric(3, 1e-9, seed=1, max_attempts=10)

    def test_deterministic_given_seed(self):
        a = generate_random_geometric(20, 0.6, seed=5)
        b = generate_random_geometric(20, 0.6, seed=5)
        assert np.array_equal(a.coords, b.coords)
        assert a.edges == b.edges

    def test_edges_are_exactly_pairs_below_radius(self):
        top = generate_random_geometric(25, 0.6, seed=3)
        for i in range(top.n):
            for j in range(i + 1, top.n):
                d = np.linalg.norm(top.coords[i] - top.coords[j])
                assert ((i, j) in top.edges) == (d < 0.6)

    def test_coords_in_unit_square(self):
        top = generate_random_geometric(40, 0.6, seed=11)
        assert np.all(top.coords >= 0.0) and np.all(top.coords <= 1.0)


class TestLazyMetropolis:
    def test_path_of_three(self):
        # degrees (1, 2, 1): edge weights 1/4, diagonal (3/4, 1/2, 3/4)
        m = lazy_metropolis(path_topology(3))
        expected = np.array([
            [0.75, 0.25, 0.0],
            [0.25, 0.5, 0.25],
            [0.0, 0.25, 0.75],
        ])
        assert np.array_equal(m.entries, expected)

    def test_single_edge(self):
        m = lazy_metropolis(path_topology(2))
        assert np.array_equal(m.entries, np.full((2, 2), 0.5))

    def test_complete_three(self):
        m = lazy_metropolis(complete_topology(3))
        expected = np.full((3, 3), 0.25)
        np.fill_diagonal(expected, 0.5)
        assert np.array_equal(m.entries, expected)

    def test_exactly_symmetric(self):
        m = lazy_metropolis(generate_random_geometric(30, 0.6, seed=9))
        assert np.array_equal(m.entries, m.entries.T)

    def test_stochasticity_tolerance(self):
        for seed in range(20):
            m = lazy_metropolis(generate_random_geometric(15, 0.7, seed=seed))
            assert np.max(np.abs(m.entries.sum(axis=0) - 1.0)) <= 1e-12
            assert np.max(np.abs(m.entries.sum(axis=1) - 1.0)) <= 1e-12


class TestSecondLargestSingularValue:
    def test_rank_one_matrix(self):
        assert second_largest_singular_value(np.full((2, 2), 0.5)) == 0.0

    def test_path_of_three(self):
        # eigenvalues of the path-3 matrix are {1, 3/4, 1/4}
        m = lazy_metropolis(path_topology(3))
        assert m.sigma2 == pytest.approx(0.75, abs=1e-12)

    def test_ring_of_four_against_svd_oracle(self):
        m = lazy_metropolis(ring_topology(4))
        oracle = np.linalg.svd(m.entries, compute_uv=False)[1]
        assert abs(m.sigma2 - oracle) <= 1e-10

    def test_power_iteration_matches_dense(self):
        m = lazy_metropolis(generate_random_geometric(24, 0.6, seed=2))
        dense = second_largest_singular_value(m.entries)
        iterative = second_largest_singular_value(m.entries, dense_cutoff=1)
        assert abs(dense - iterative) <= 1e-9

    def test_contraction_on_zero_mean_vectors(self):
        m = lazy_metropolis(generate_random_geometric(20, 0.6, seed=13))
        rng = np.random.default_rng(1)
        for _ in range(100):
            y = rng.standard_normal(m.n)
            y -= y.mean()
            assert np.linalg.norm(m.entries @ y) <= m.sigma2 * np.linalg.norm(y) + 1e-10


class TestValidateMixing:
    def test_lazy_metropolis_passes(self):
        top = generate_random_geometric(12, 0.7, seed=4)
        report = validate_mixing(lazy_metropolis(top), top)
        assert report.ok
        assert not report.failures()

    def test_identity_fails_irreducibility(self):
        top = path_topology(3)
        m = MixingMatrix(entries=np.eye(3), sigma2=1.0)
        report = validate_mixing(m, top)
        assert not report.ok
        assert not report.clause("irreducible").passed

    def test_row_sum_off_by_1e6_fails_stochasticity(self):
        top = path_topology(3)
        entries = lazy_metropolis(top).entries.copy()
        entries[0, 0] += 1e-6
        report = validate_mixing(MixingMatrix(entries=entries, sigma2=0.75), top)
        assert not report.clause("row_stochastic").passed

    def test_negative_entry_fails(self):
        top = path_topology(2)
        entries = np.array([[1.5, -0.5], [-0.5, 1.5]])
        report = validate_mixing(MixingMatrix(entries=entries, sigma2=0.0), top)
        assert not report.clause("nonnegative").passed


class TestTopologyInvariants:
    def test_self_loop_rejected(self):
        with pytest.raises(ValueError):
            Topology(n=2, coords=np.zeros((2, 2)), edges=frozenset({(0, 0)}))

    def test_disconnected_rejected(self):
        with pytest.raises(NotConnected):
            Topology(n=3, coords=np.zeros((3, 2)), edges=frozenset({(0, 1)}))

    def test_single_node_is_connected(self):
        top = Topology(n=1, coords=np.array([[0.5, 0.5]]), edges=frozenset())
        assert top.n == 1
        assert lazy_metropolis(top).entries == pytest.approx(np.array([[1.0]]))


class TestSerialization:
    def test_round_trip(self):
        top = generate_random_geometric(10, 0.7, seed=21)
        mix = lazy_metropolis(top)
        text = graph_to_json(top, mix)
        top2, mix2 = graph_from_json(text)
        assert top2.n == top.n
        assert top2.edges == top.edges
        assert np.array_equal(top2.coords, top.coords)
        assert np.array_equal(mix2.entries, mix.entries)
        assert mix2.sigma2 == mix.sigma2

    def test_document_keys(self):
        top = generate_random_geometric(5, 0.9, seed=2)
        doc = json.loads(graph_to_json(top, lazy_metropolis(top)))
        assert set(doc) == {"n", "coords", "edges", "A", "sigma2"}
