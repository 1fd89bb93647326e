"""PCA, sphere projection, and angle matrix contracts."""

import numpy as np
import pytest

from sphereal.errors import DataError, DegeneratePointError, ParameterError
from sphereal.preprocess import angle_matrix, pca_reduce, project_to_sphere


def random_unit_rows(count, dim, seed):
    rng = np.random.default_rng(seed)
    rows = rng.standard_normal((count, dim))
    return rows / np.linalg.norm(rows, axis=1)[:, None]


class TestPcaReduce:
    def test_collinear_data_explains_everything(self):
        data = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        _, fractions = pca_reduce(data, target_dim=1)
        assert fractions[0] == pytest.approx(1.0, abs=1e-12)

    def test_diagonal_covariance(self):
        # mean-zero samples with sample covariance exactly diag(4, 1)
        data = np.array([
            [2.0, 0.0], [-2.0, 0.0], [2.0, 0.0], [-2.0, 0.0],
            [0.0, 1.0], [0.0, -1.0], [0.0, 1.0], [0.0, -1.0],
        ])
        reduced, fractions = pca_reduce(data, target_dim=2)
        cov = data.T @ data / (data.shape[0] - 1)
        expected = np.linalg.eigvalsh(cov)[::-1]
        assert fractions == pytest.approx(expected / expected.sum(), abs=1e-12)
        # first direction is +/- e1; sign convention makes it +e1
        assert reduced[:, 0] == pytest.approx(data[:, 0], abs=1e-12)

    def test_single_point_reduces_to_origin(self):
        reduced, fractions = pca_reduce(np.array([[5.0]]), target_dim=1)
        assert reduced == pytest.approx(np.array([[0.0]]), abs=0)
        assert fractions[0] == 0.0

    def test_round_trip_distances_in_subspace(self):
        rng = np.random.default_rng(5)
        basis, _ = np.linalg.qr(rng.standard_normal((7, 3)))
        coords = rng.standard_normal((40, 3))
        data = coords @ basis.T + rng.standard_normal(7)
        reduced, _ = pca_reduce(data, target_dim=3)
        orig = np.linalg.norm(data[:, None] - data[None, :], axis=2)
        proj = np.linalg.norm(reduced[:, None] - reduced[None, :], axis=2)
        nonzero = orig > 0
        assert np.max(np.abs(orig - proj)[nonzero] / orig[nonzero]) < 1e-9

    def test_variance_fraction_selection(self):
        rng = np.random.default_rng(6)
        data = rng.standard_normal((200, 5)) * np.array([10.0, 3.0, 1.0, 0.1, 0.01])
        reduced, fractions = pca_reduce(data, variance_fraction=0.95)
        cumulative = np.cumsum(fractions)
        assert cumulative[-1] >= 0.95
        assert reduced.shape[1] == fractions.size

    def test_variance_fraction_cap(self):
        rng = np.random.default_rng(7)
        data = rng.standard_normal((50, 10))
        reduced, _ = pca_reduce(data, variance_fraction=1.0, max_dim=4)
        assert reduced.shape[1] == 4

    def test_rejects_non_finite(self):
        data = np.array([[1.0, 2.0], [np.nan, 0.0]])
        with pytest.raises(DataError):
            pca_reduce(data, target_dim=1)

    def test_rejects_oversized_target(self):
        with pytest.raises(ParameterError):
            pca_reduce(np.eye(3), target_dim=4)

    def test_requires_exactly_one_selector(self):
        with pytest.raises(ParameterError):
            pca_reduce(np.eye(3), target_dim=2, variance_fraction=0.9)
        with pytest.raises(ParameterError):
            pca_reduce(np.eye(3))

    def test_bit_stable_across_runs(self):
        rng = np.random.default_rng(8)
        data = rng.standard_normal((30, 6))
        first = pca_reduce(data, target_dim=4)
        second = pca_reduce(data.copy(), target_dim=4)
        assert np.array_equal(first[0], second[0])
        assert np.array_equal(first[1], second[1])


class TestProjectToSphere:
    def test_three_four_five(self):
        out = project_to_sphere(np.array([[3.0, 4.0]]))
        assert out[0] == pytest.approx([0.6, 0.8], abs=1e-15)

    def test_unit_row_unchanged(self):
        out = project_to_sphere(np.array([[0.0, 1.0, 0.0]]))
        assert out[0] == pytest.approx([0.0, 1.0, 0.0], abs=0)

    def test_positive_scalings_collapse(self):
        out = project_to_sphere(np.array([[1.0, 0.0], [2.0, 0.0]]))
        assert np.array_equal(out[0], out[1])

    def test_degenerate_row_named(self):
        with pytest.raises(DegeneratePointError) as err:
            project_to_sphere(np.array([[1.0, 0.0], [0.0, 1e-13]]))
        assert err.value.row_index == 1

    def test_stereographic_lift(self):
        rng = np.random.default_rng(9)
        data = rng.standard_normal((25, 4))
        lifted = project_to_sphere(data, method="stereographic")
        assert lifted.shape == (25, 5)
        assert np.linalg.norm(lifted, axis=1) == pytest.approx(np.ones(25), abs=1e-12)
        # zero rows are fine under the lift (they map to the pole)
        pole = project_to_sphere(np.zeros((1, 4)), method="stereographic")
        assert pole[0] == pytest.approx([0, 0, 0, 0, -1.0], abs=0)

    def test_unknown_method(self):
        with pytest.raises(ParameterError):
            project_to_sphere(np.eye(2), method="azimuthal")


class TestAngleMatrix:
    def test_identical_orthogonal_antipodal(self):
        points = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
        angles = angle_matrix(points)
        assert angles[0, 1] == 0.0
        assert angles[0, 2] == pytest.approx(np.pi / 2, abs=1e-12)
        assert angles[0, 3] == pytest.approx(np.pi, abs=1e-12)

    def test_symmetric_zero_diagonal_bounded(self):
        points = random_unit_rows(60, 4, seed=10)
        angles = angle_matrix(points)
        assert np.array_equal(angles, angles.T)
        assert np.all(np.diag(angles) == 0.0)
        assert angles.min() >= 0.0 and angles.max() <= np.pi

    def test_triangle_inequality_sampled(self):
        points = random_unit_rows(40, 3, seed=11)
        angles = angle_matrix(points)
        rng = np.random.default_rng(12)
        for _ in range(500):
            i, j, k = rng.integers(0, 40, size=3)
            assert angles[i, k] <= angles[i, j] + angles[j, k] + 1e-9

    def test_no_nan_from_clamping(self):
        # duplicated rows make the raw inner product drift past 1.0
        points = random_unit_rows(30, 5, seed=13)
        stacked = np.vstack([points, points])
        assert np.all(np.isfinite(angle_matrix(stacked)))
