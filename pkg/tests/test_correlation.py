import numpy as np
import pytest

from ncentropy.correlation import (
    empirical_covariance, epsilon_gap, neuronal_correlation, pairwise_weight_cosines, pearson,
    preactivation_correlation, preactivation_covariance, structure_correlation_coefficient, weight_correlation,
)
from ncentropy.errors import DegenerateColumnError, ParameterError
from ncentropy.models import ActivationMatrix, ConnectivityPattern, Measure, WeightMatrix


def test_pearson_examples():
    x = np.array([1.0, 2.0, 3.0])
    assert pearson(x, x) == pytest.approx(1.0)
    assert pearson(x, -x) == pytest.approx(-1.0)
    assert pearson(x, [1.0, 2.0, 4.0]) == pytest.approx(0.9819805060619657)


def test_pearson_degenerate_and_invalid():
    assert pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]) is None
    with pytest.raises(ParameterError):
        pearson([1.0, 2.0], [1.0, 2.0, 3.0])


def test_nc_of_independent_neurons_is_small(rng):
    report = neuronal_correlation(rng.standard_normal((10000, 5)))
    assert report.value < 0.05
    assert report.pair_count == 20
    assert report.measure == Measure.NC


def test_nc_of_scaled_copy_is_one(rng):
    first = rng.standard_normal(100)
    report = neuronal_correlation(np.column_stack([first, 3.0 * first]))
    assert report.value == pytest.approx(1.0)


def test_nc_is_invariant_to_affine_maps(rng):
    values = rng.standard_normal((200, 4))
    values[:, 1] += 0.8 * values[:, 0]
    mapped = values * np.array([2.0, -0.5, 7.0, -3.0]) + np.array([1.0, 2.0, -3.0, 0.5])
    assert neuronal_correlation(mapped).value == pytest.approx(neuronal_correlation(values).value, abs=1e-12)


def test_nc_skips_dead_neurons(rng):
    values = rng.standard_normal((50, 3))
    values[:, 2] = 0.0
    report = neuronal_correlation(ActivationMatrix(values))
    assert report.pair_count == 6
    assert report.skipped_pairs == 4
    alive = neuronal_correlation(values[:, :2]).value
    assert report.value == pytest.approx(alive * 2 / 6)


def test_nc_needs_two_neurons_and_samples():
    with pytest.raises(ParameterError):
        neuronal_correlation(np.ones((10, 1)))
    with pytest.raises(ParameterError):
        neuronal_correlation(np.ones((1, 3)))


def test_weight_correlation_examples():
    assert weight_correlation(np.eye(3)).value == pytest.approx(0.0)
    assert weight_correlation(np.array([[1.0, 0.0], [0.0, -1.0]])).value == pytest.approx(0.0)
    identical = np.tile(np.array([[1.0], [2.0], [-1.0]]), (1, 4))
    assert weight_correlation(WeightMatrix(identical)).value == pytest.approx(1.0)


def test_weight_correlation_signed_and_absolute():
    weights = np.array([[1.0, -1.0], [1.0, -1.0]])
    assert weight_correlation(weights).value == pytest.approx(-1.0)
    assert weight_correlation(weights, absolute=True).value == pytest.approx(1.0)


def test_weight_correlation_zero_column():
    with pytest.raises(DegenerateColumnError) as excinfo:
        weight_correlation(np.array([[1.0, 0.0], [2.0, 0.0]]))
    assert excinfo.value.column == 1
    assert excinfo.value.exit_code == 3


def test_pairwise_cosines_average_to_wc(rng):
    weights = rng.standard_normal((10, 6))
    cosines = pairwise_weight_cosines(weights)
    assert cosines.shape == (15,)
    assert cosines.mean() == pytest.approx(weight_correlation(weights).value)


def test_preactivation_covariance_special_cases(rng):
    w_i = rng.standard_normal(4)
    w_j = rng.standard_normal(4)
    assert preactivation_covariance(w_i, w_j, np.eye(4)) == pytest.approx(w_i @ w_j)
    assert preactivation_covariance(w_i, w_j, np.zeros((4, 4))) == 0.0
    with pytest.raises(ParameterError):
        preactivation_covariance(w_i, w_j, np.eye(3))


def test_preactivation_covariance_matches_monte_carlo(rng):
    for _ in range(20):
        factor = rng.standard_normal((5, 5))
        sigma = factor @ factor.T + 0.5 * np.eye(5)
        w_i = rng.standard_normal(5)
        w_j = w_i + 0.2 * rng.standard_normal(5)
        x = rng.multivariate_normal(np.zeros(5), sigma, size=1_000_000)
        sampled = np.cov(x @ w_i, x @ w_j)[0, 1]
        expected = preactivation_covariance(w_i, w_j, sigma)
        assert abs(expected - sampled) < 0.01 * abs(expected)


def test_preactivation_correlation_examples():
    assert preactivation_correlation(np.eye(3), np.eye(3)).value == pytest.approx(0.0)
    identical = np.tile(np.array([[1.0], [0.5], [2.0]]), (1, 3))
    assert preactivation_correlation(identical, np.eye(3)).value == pytest.approx(1.0)


def test_preactivation_nc_matches_linear_layer(rng):
    inputs = rng.standard_normal((5000, 6)) @ rng.standard_normal((6, 6))
    weights = rng.standard_normal((6, 4))
    outputs = inputs @ weights + rng.standard_normal(4)
    sigma = empirical_covariance(inputs)
    assert preactivation_correlation(weights, sigma).value == pytest.approx(
        neuronal_correlation(outputs).value, abs=1e-9)
    assert epsilon_gap(outputs, weights, sigma).value < 1e-9


def test_epsilon_with_dying_relu_layer(rng):
    inputs = rng.uniform(0.0, 1.0, size=(100, 3))
    weights = -rng.uniform(0.1, 1.0, size=(3, 4))
    outputs = np.maximum(inputs @ weights - 0.1, 0.0)
    report = epsilon_gap(outputs, weights, empirical_covariance(inputs))
    assert report.skipped_pairs == report.pair_count
    assert report.value == pytest.approx(preactivation_correlation(weights, empirical_covariance(inputs)).value)


def test_epsilon_shape_mismatch(rng):
    with pytest.raises(ParameterError):
        epsilon_gap(rng.standard_normal((10, 3)), rng.standard_normal((2, 4)), np.eye(2))


def test_gamma_fully_connected():
    for m, n in [(784, 30), (5, 2), (10, 100)]:
        assert structure_correlation_coefficient(ConnectivityPattern.fully_connected(m, n)).value == pytest.approx(m)
    pattern = ConnectivityPattern.fully_connected(784, 30, gamma=2.0)
    assert structure_correlation_coefficient(pattern).value == pytest.approx(392.0)


def test_gamma_conv1d_matches_enumeration():
    pattern = ConnectivityPattern.conv1d(8, 3, 1)
    assert pattern.n == 6
    parents = [set(range(s, s + 3)) for s in range(6)]
    ratios = []
    for i in range(6):
        shared = sum(len(parents[i] & parents[j]) for j in range(6))
        linked = sum(1 for j in range(6) if parents[i] & parents[j])
        ratios.append(shared / linked)
    expected = float(np.mean(ratios))
    assert structure_correlation_coefficient(pattern).value == pytest.approx(expected)


def test_gamma_disjoint_parents():
    pattern = ConnectivityPattern.from_parent_lists([[0, 1], [2, 3], [4, 5]], gamma=2.0)
    assert structure_correlation_coefficient(pattern).value == pytest.approx(1.0)


def test_gamma_conv2d_below_fully_connected():
    conv = structure_correlation_coefficient(ConnectivityPattern.conv2d(8, 8, 3, 1)).value
    dense = structure_correlation_coefficient(ConnectivityPattern.fully_connected(64, 36)).value
    assert conv < dense


def test_gamma_rejects_orphan_neuron():
    with pytest.raises(ParameterError):
        structure_correlation_coefficient(ConnectivityPattern.from_parent_lists([[0], []], m=2))
    with pytest.raises(ParameterError):
        structure_correlation_coefficient(ConnectivityPattern.fully_connected(3, 2, gamma=0.0))


def test_empirical_covariance_is_unbiased(rng):
    values = rng.standard_normal((20, 3))
    np.testing.assert_allclose(empirical_covariance(values), np.cov(values.T))
    assert empirical_covariance(values[:, :1]).shape == (1, 1)


def test_weight_correlation_ignores_positive_column_scaling(rng):
    for _ in range(20):
        weights = rng.standard_normal((6, 5))
        scaled = weights * rng.uniform(0.01, 50.0, size=5)
        for absolute in (False, True):
            assert weight_correlation(scaled, absolute).value == pytest.approx(
                weight_correlation(weights, absolute).value, abs=1e-12)


def test_measures_ignore_neuron_order(rng):
    activations = rng.standard_normal((100, 5))
    activations[:, 3] += activations[:, 0]
    weights = rng.standard_normal((7, 5))
    order = rng.permutation(5)
    assert neuronal_correlation(activations[:, order]).value == pytest.approx(
        neuronal_correlation(activations).value, abs=1e-12)
    assert neuronal_correlation(activations[rng.permutation(100)]).value == pytest.approx(
        neuronal_correlation(activations).value, abs=1e-12)
    assert weight_correlation(weights[:, order]).value == pytest.approx(weight_correlation(weights).value, abs=1e-12)

    parents = [[0, 1, 2], [2, 3], [4, 5, 6], [1, 6]]
    relabel = rng.permutation(7)
    shuffled = [[int(relabel[p]) for p in parents[i]] for i in rng.permutation(4)]
    assert structure_correlation_coefficient(ConnectivityPattern.from_parent_lists(shuffled, m=7)).value == \
        pytest.approx(structure_correlation_coefficient(ConnectivityPattern.from_parent_lists(parents, m=7)).value)


def _gamma_by_enumeration(parents, gamma):
    ratios = []
    for mine in parents:
        shared = sum(len(mine & other) for other in parents)
        linked = sum(1 for other in parents if mine & other)
        ratios.append(shared / (gamma * linked))
    return float(np.mean(ratios))


def test_gamma_matches_enumeration_on_random_sparse_patterns(rng):
    for _ in range(50):
        m = int(rng.integers(3, 16))
        n = int(rng.integers(2, 11))
        parents = []
        for _ in range(n):
            chosen = set(np.flatnonzero(rng.uniform(size=m) < 0.3).tolist()) or {int(rng.integers(m))}
            parents.append(chosen)
        gamma = float(rng.uniform(0.5, 2.0))
        pattern = ConnectivityPattern.from_parent_lists([sorted(p) for p in parents], gamma=gamma, m=m)
        assert structure_correlation_coefficient(pattern).value == pytest.approx(
            _gamma_by_enumeration(parents, gamma))


def test_connectivity_rejects_parents_outside_the_layer():
    with pytest.raises(ParameterError) as excinfo:
        ConnectivityPattern.from_parent_lists([[0, 1], [2, 5]], m=3)
    assert excinfo.value.exit_code == 2
    with pytest.raises(ParameterError):
        ConnectivityPattern.from_parent_lists([[-1, 0]], m=3)
    assert ConnectivityPattern.from_parent_lists([[0, 2]], m=3).incidence().shape == (1, 3)
