"""Threshold graph components: union-find vs the exhaustive BFS oracle."""

import numpy as np
import pytest

from sphereal.errors import ParameterError
from sphereal.graph import build_components, components_oracle
from sphereal.preprocess import angle_matrix


def toy_angles():
    """Three points with pairwise angles a12=0.1, a23=0.15, a13=0.25."""
    a = np.zeros((3, 3))
    a[0, 1] = a[1, 0] = 0.1
    a[1, 2] = a[2, 1] = 0.15
    a[0, 2] = a[2, 0] = 0.25
    return a


def random_instance(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 101))
    points = rng.standard_normal((m, 3))
    points /= np.linalg.norm(points, axis=1)[:, None]
    angles = angle_matrix(points)
    kept = rng.random(m) < 0.8
    if not kept.any():
        kept[int(rng.integers(0, m))] = True
    eta = float(rng.uniform(1e-6, np.pi - 1e-6))
    return angles, kept, eta


class TestBuildComponents:
    def test_path_through_middle(self):
        graph = build_components(toy_angles(), np.ones(3, bool), 0.2)
        assert graph.component_count == 1

    def test_middle_edge_only(self):
        graph = build_components(toy_angles(), np.ones(3, bool), 0.12)
        assert graph.component_count == 2
        assert graph.partition() == [frozenset({0, 1}), frozenset({2})]

    def test_complete_graph_near_pi(self):
        rng = np.random.default_rng(0)
        pts = rng.standard_normal((12, 3))
        pts /= np.linalg.norm(pts, axis=1)[:, None]
        graph = build_components(angle_matrix(pts), np.ones(12, bool), np.pi - 1e-9)
        assert graph.component_count == 1

    def test_boundary_angle_is_not_an_edge(self):
        a = np.zeros((2, 2))
        a[0, 1] = a[1, 0] = 0.3
        assert build_components(a, np.ones(2, bool), 0.3).component_count == 2
        assert build_components(a, np.ones(2, bool), 0.3 + 1e-12).component_count == 1

    def test_duplicates_always_share_component(self):
        a = np.zeros((2, 2))  # angle 0 between duplicates
        for eta in (1e-9, 0.5, 3.0):
            assert build_components(a, np.ones(2, bool), eta).component_count == 1

    def test_kept_mask_restricts_nodes(self):
        graph = build_components(toy_angles(), np.array([True, False, True]), 0.2)
        # without the middle node, 0 and 2 are disconnected at 0.2
        assert graph.component_count == 2
        assert graph.node_ids.tolist() == [0, 2]

    def test_component_ids_ordered_by_smallest_member(self):
        angles, kept, eta = random_instance(1)
        graph = build_components(angles, kept, eta)
        firsts = [int(graph.members(c).min()) for c in range(graph.component_count)]
        assert firsts == sorted(firsts)

    def test_errors(self):
        with pytest.raises(ParameterError):
            build_components(toy_angles(), np.zeros(3, bool), 0.2)
        with pytest.raises(ParameterError):
            build_components(toy_angles(), np.ones(3, bool), 0.0)
        with pytest.raises(ParameterError):
            build_components(toy_angles(), np.ones(3, bool), np.pi)


class TestOracleEquivalence:
    def test_oracle_on_empty_edge_set(self):
        angles, _, _ = random_instance(2)
        eta = float(angles[angles > 0].min()) / 2.0
        graph = components_oracle(angles, np.ones(angles.shape[0], bool), eta)
        assert graph.component_count == angles.shape[0]

    def test_matches_on_random_instances(self):
        for seed in range(40):
            angles, kept, eta = random_instance(seed)
            fast = build_components(angles, kept, eta)
            slow = components_oracle(angles, kept, eta)
            assert fast.partition() == slow.partition()
            assert fast.component_count == slow.component_count


class TestPartitionProperties:
    def test_monotone_refinement_in_eta(self):
        for seed in range(10):
            angles, kept, _ = random_instance(seed + 100)
            fine = build_components(angles, kept, 0.2)
            coarse = build_components(angles, kept, 0.8)
            coarse_sets = coarse.partition()
            for block in fine.partition():
                assert any(block <= big for big in coarse_sets)

    def test_separation_between_components(self):
        for seed in range(10):
            angles, kept, eta = random_instance(seed + 200)
            graph = build_components(angles, kept, eta)
            for a in range(graph.component_count):
                for b in range(a + 1, graph.component_count):
                    cross = angles[np.ix_(graph.members(a), graph.members(b))]
                    assert cross.min() >= eta
