import numpy as np
import pytest

from ncentropy.errors import NumericalDegeneracyError, ParameterError
from ncentropy.kernel import (
    bounded_distance_interval, default_width_grid, embedding_coordinates, feature_distances, feature_map_evd,
    gershgorin_bounds, gram_matrix, input_distances_from_feature, kernel_alignment, kernel_space_distances,
    label_kernel, pairwise_feature_distances, select_kernel_width,
)
from ncentropy.models import GramMatrix, KernelKind
from ncentropy.utils import median_pairwise_distance


def test_gram_identical_samples_is_all_ones():
    kernel = gram_matrix(np.array([[0.3, -1.0], [0.3, -1.0]]), sigma=0.7)
    np.testing.assert_allclose(kernel.entries, np.ones((2, 2)))


def test_gaussian_gram_at_distance_sqrt_two_sigma():
    sigma = 1.5
    samples = np.array([[0.0], [np.sqrt(2.0) * sigma]])
    kernel = gram_matrix(samples, KernelKind.GAUSSIAN, sigma)
    assert kernel.entries[0, 1] == pytest.approx(np.exp(-1.0), abs=1e-12)


def test_laplacian_gram_uses_l1_distance():
    kernel = gram_matrix(np.array([[0.0, 0.0], [1.0, 2.0]]), KernelKind.LAPLACIAN, 3.0)
    assert kernel.entries[0, 1] == pytest.approx(np.exp(-1.0))


def test_gram_is_symmetric_psd(rng):
    kernel = gram_matrix(rng.standard_normal((100, 5)), sigma=1.0)
    np.testing.assert_array_equal(kernel.entries, kernel.entries.T)
    assert np.linalg.eigvalsh(kernel.entries).min() >= -1e-10


@pytest.mark.parametrize("sigma", [0.0, -1.0, float("nan")])
def test_gram_rejects_bad_width(sigma):
    with pytest.raises(ParameterError):
        gram_matrix(np.eye(3), sigma=sigma)


def test_feature_map_of_identity_has_unit_spacing():
    features = feature_map_evd(np.eye(4))
    distances = feature_distances(features)
    off_diagonal = distances[~np.eye(4, dtype=bool)]
    np.testing.assert_allclose(off_diagonal, 2.0)
    assert features.rank == 4


def test_feature_map_of_duplicate_points_has_zero_distance():
    features = feature_map_evd(np.ones((2, 2)))
    assert feature_distances(features)[0, 1] == pytest.approx(0.0, abs=1e-12)
    assert features.rank == 1


def test_feature_map_preserves_kernel_distances(rng):
    kernel = gram_matrix(rng.standard_normal((50, 3)), sigma=1.0)
    features = feature_map_evd(kernel)
    assert np.all(np.diff(features.eigenvalues) <= 0.0)
    error = np.abs(feature_distances(features) - kernel_space_distances(kernel))
    assert error.max() < 1e-8


def test_feature_map_rejects_indefinite_matrix():
    with pytest.raises(NumericalDegeneracyError) as excinfo:
        feature_map_evd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert excinfo.value.exit_code == 3
    assert excinfo.value.eigenvalue == pytest.approx(-1.0)


def test_gram_matrix_type_rejects_asymmetry():
    with pytest.raises(ParameterError):
        GramMatrix(np.array([[1.0, 0.2], [0.1, 1.0]]))


def test_gershgorin_bounds():
    identity = gershgorin_bounds(np.eye(3))
    assert (identity.lambda_min_bound, identity.lambda_max_bound) == (1.0, 1.0)

    bounds = gershgorin_bounds(np.array([[1.0, 0.5], [0.5, 1.0]]))
    assert bounds.lambda_min_bound == pytest.approx(0.5)
    assert bounds.lambda_max_bound == pytest.approx(1.5)
    assert not bounds.vacuous


def test_gershgorin_vacuous_for_wide_kernel(rng):
    kernel = gram_matrix(rng.standard_normal((50, 5)), sigma=100.0)
    bounds = gershgorin_bounds(kernel)
    assert bounds.lambda_min_bound <= 0.0
    assert bounds.vacuous
    assert bounded_distance_interval(kernel, bounds, 0, 1).unbounded


def test_interval_is_exact_for_identity():
    kernel = np.eye(3)
    interval = bounded_distance_interval(kernel, gershgorin_bounds(kernel), 0, 2)
    assert interval.lo == pytest.approx(2.0)
    assert interval.hi == pytest.approx(2.0)


def test_interval_contains_evd_distance_two_by_two():
    kernel = np.array([[1.0, 0.5], [0.5, 1.0]])
    interval = bounded_distance_interval(kernel, gershgorin_bounds(kernel), 0, 1)
    exact = feature_distances(feature_map_evd(kernel))[0, 1]
    assert interval.contains(exact)


def test_diagonally_dominant_kernel_uses_gershgorin_path(rng):
    noise = rng.uniform(0.0, 1.0, size=(20, 20))
    kernel = np.eye(20) + 0.02 * (noise + noise.T) / 2.0
    np.fill_diagonal(kernel, 1.0)
    lo, hi, method = pairwise_feature_distances(kernel)
    exact = feature_distances(feature_map_evd(kernel))
    assert method == "gershgorin"
    assert np.all(lo <= exact + 1e-12)
    assert np.all(exact <= hi + 1e-12)


def test_vacuous_kernel_falls_back_to_evd(rng):
    kernel = gram_matrix(rng.standard_normal((30, 2)), sigma=50.0)
    lo, hi, method = pairwise_feature_distances(kernel)
    assert method == "evd"
    np.testing.assert_array_equal(lo, hi)


def test_kernel_alignment():
    assert kernel_alignment(np.eye(2), np.ones((2, 2))) == pytest.approx(1.0 / np.sqrt(2.0))
    kernel = np.array([[2.0, 0.3], [0.3, 1.0]])
    assert kernel_alignment(kernel, kernel) == pytest.approx(1.0)


def test_kernel_alignment_of_random_psd_pairs(rng):
    for _ in range(100):
        a = rng.standard_normal((6, 4))
        b = rng.standard_normal((6, 3))
        value = kernel_alignment(a @ a.T, b @ b.T)
        assert 0.0 < value <= 1.0 + 1e-12


def test_kernel_alignment_errors():
    with pytest.raises(ParameterError):
        kernel_alignment(np.eye(2), np.eye(3))
    with pytest.raises(ParameterError):
        kernel_alignment(np.zeros((2, 2)), np.eye(2))


def test_label_kernel():
    np.testing.assert_array_equal(
        label_kernel(["a", "a", "b"]), [[1, 1, 0], [1, 1, 0], [0, 0, 1]])
    np.testing.assert_array_equal(label_kernel([3, 3, 3]), np.ones((3, 3)))
    np.testing.assert_array_equal(label_kernel([0, 1, 2]), np.eye(3))
    with pytest.raises(ParameterError):
        label_kernel([1])


def test_default_width_grid_spans_median_distance(rng):
    samples = rng.standard_normal((30, 3))
    d_med = median_pairwise_distance(samples)
    grid = default_width_grid(samples)
    assert len(grid) == 20
    assert grid[0] == pytest.approx(0.1 * d_med)
    assert grid[-1] == pytest.approx(10.0 * d_med)


def test_single_width_grid_is_selected(two_blobs):
    selection = select_kernel_width(two_blobs.inputs, two_blobs.labels, grid=[0.8])
    assert selection.sigma == 0.8
    assert len(selection.grid) == 1


def test_zero_beta_maximizes_alignment(two_blobs):
    selection = select_kernel_width(two_blobs.inputs, two_blobs.labels, beta=0.0, grid=[0.05, 0.5, 2.0, 20.0])
    assert selection.alignment == max(candidate.alignment for candidate in selection.grid)


def test_median_width_beats_both_extremes(two_blobs):
    d_med = median_pairwise_distance(two_blobs.inputs)
    selection = select_kernel_width(two_blobs.inputs, two_blobs.labels, beta=0.1, grid=[0.01, d_med, 100.0])
    assert selection.sigma == pytest.approx(d_med)
    extremes = [c.objective for c in selection.grid if c.sigma in (0.01, 100.0)]
    assert all(selection.objective > value for value in extremes)


def test_width_selection_validates_inputs(two_blobs):
    with pytest.raises(ParameterError):
        select_kernel_width(two_blobs.inputs, two_blobs.labels[:-1])
    with pytest.raises(ParameterError):
        select_kernel_width(two_blobs.inputs, two_blobs.labels, beta=1.5)
    with pytest.raises(ParameterError):
        select_kernel_width(two_blobs.inputs, two_blobs.labels, grid=[])


def test_gershgorin_bounds_contain_the_spectrum(rng):
    for _ in range(100):
        n = int(rng.integers(2, 25))
        samples = rng.standard_normal((n, int(rng.integers(1, 6))))
        kind = KernelKind.GAUSSIAN if rng.uniform() < 0.5 else KernelKind.LAPLACIAN
        kernel = gram_matrix(samples, kind, float(rng.uniform(0.05, 5.0)))
        bounds = gershgorin_bounds(kernel)
        eigenvalues = np.linalg.eigvalsh(kernel.entries)
        assert eigenvalues.min() >= bounds.lambda_min_bound - 1e-9
        assert eigenvalues.max() <= bounds.lambda_max_bound + 1e-9


def test_feature_map_preserves_distances_on_random_grams(rng):
    for _ in range(100):
        samples = rng.standard_normal((12, 3))
        kernel = gram_matrix(samples, sigma=float(rng.uniform(0.3, 3.0)))
        error = np.abs(feature_distances(feature_map_evd(kernel)) - kernel_space_distances(kernel))
        assert error.max() < 1e-8


def test_kernel_alignment_is_symmetric_and_scale_free(rng):
    for _ in range(50):
        a = rng.standard_normal((8, 3))
        b = rng.standard_normal((8, 5))
        ka, kb = a @ a.T, b @ b.T
        scale = float(rng.uniform(0.01, 100.0))
        assert kernel_alignment(ka, kb) == pytest.approx(kernel_alignment(kb, ka), abs=1e-12)
        assert kernel_alignment(scale * ka, kb) == pytest.approx(kernel_alignment(ka, kb), abs=1e-12)


def test_gram_entries_increase_with_width(rng):
    samples = rng.standard_normal((10, 2))
    distinct = ~np.eye(10, dtype=bool)
    for kind in KernelKind:
        previous = gram_matrix(samples, kind, 0.5).entries
        for sigma in (1.0, 2.0, 4.0):
            current = gram_matrix(samples, kind, sigma).entries
            assert np.all(current[distinct] > previous[distinct])
            previous = current


def test_width_selection_ignores_sample_order(two_blobs, rng):
    grid = [0.3, 1.0, 3.0, 10.0]
    order = rng.permutation(len(two_blobs.labels))
    first = select_kernel_width(two_blobs.inputs, two_blobs.labels, grid=grid)
    second = select_kernel_width(two_blobs.inputs[order], two_blobs.labels[order], grid=grid)
    assert second.sigma == first.sigma
    assert second.alignment == pytest.approx(first.alignment, abs=1e-12)


def test_embedding_coordinates_are_a_rotation(rng):
    samples = rng.standard_normal((60, 3)) @ rng.standard_normal((3, 3))
    coordinates = embedding_coordinates(samples)
    assert coordinates.rank == 3
    embedded = coordinates.columns.T
    centered = samples - samples.mean(axis=0)
    np.testing.assert_allclose(
        feature_distances(coordinates), kernel_space_distances(centered @ centered.T), atol=1e-8)
    np.testing.assert_allclose(np.abs(np.linalg.det(embedded.T @ embedded)),
                               np.abs(np.linalg.det(centered.T @ centered)), rtol=1e-8)
    covariance = np.cov(embedded.T)
    np.testing.assert_allclose(covariance - np.diag(np.diag(covariance)), 0.0, atol=1e-9)


def test_embedding_coordinates_of_a_line(rng):
    t = rng.standard_normal(40)
    coordinates = embedding_coordinates(np.column_stack([t, 2.0 * t, -t]))
    assert coordinates.rank == 1


def test_input_distances_invert_the_kernel_profile():
    r = np.array([0.0, 0.5, 1.0, 3.0])
    sigma = 1.3
    gaussian = 2.0 - 2.0 * np.exp(-r ** 2 / (2.0 * sigma ** 2))
    laplacian = 2.0 - 2.0 * np.exp(-r / sigma)
    np.testing.assert_allclose(input_distances_from_feature(gaussian, KernelKind.GAUSSIAN, sigma), r, atol=1e-7)
    np.testing.assert_allclose(input_distances_from_feature(laplacian, KernelKind.LAPLACIAN, sigma), r, atol=1e-7)
