#!/usr/bin/env python3
"""
Neuronal correlation, weight correlation and related layer statistics

NC averages |Pearson| over ordered neuron pairs, WC averages the (signed)
cosine between weight columns, PreNC evaluates NC of the pre-activations in
closed form from W and the previous layer's covariance, epsilon is the gap
between NC and PreNC, and Gamma summarizes shared-parent connectivity.
"""

import logging

import numpy as np

from ncentropy.config import DEGENERATE_STD
from ncentropy.errors import DegenerateColumnError, ParameterError
from ncentropy.models import ConnectivityPattern, CorrelationReport, Measure
from ncentropy.utils import as_matrix, as_vector, correlation_matrix, mean_abs_offdiagonal

# Get logger
logger = logging.getLogger("ncentropy")


def pearson(x, y):
    """
    Pearson correlation of two equally long vectors

    Returns:
        float in [-1, 1], or None when either standard deviation is below
        the degeneracy threshold
    """
    x = as_vector(x, "pearson")
    y = as_vector(y, "pearson")
    if x.shape != y.shape:
        raise ParameterError(f"length mismatch {x.size} vs {y.size}", "pearson")
    if x.size < 2:
        raise ParameterError("at least 2 observations are required", "pearson")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = np.sqrt(np.mean(dx * dx))
    sy = np.sqrt(np.mean(dy * dy))
    if sx < DEGENERATE_STD or sy < DEGENERATE_STD:
        return None
    r = np.mean(dx * dy) / (sx * sy)
    return float(np.clip(r, -1.0, 1.0))


def neuronal_correlation(activations):
    """Mean |Pearson| over ordered neuron pairs; degenerate neurons contribute 0"""
    values = as_matrix(activations, "neuronal_correlation")
    if values.shape[0] < 2:
        raise ParameterError(f"at least 2 samples are required, got {values.shape[0]}", "neuronal_correlation")
    if values.shape[1] < 2:
        raise ParameterError(f"at least 2 neurons are required, got {values.shape[1]}", "neuronal_correlation")
    corr, valid = correlation_matrix(values)
    value, pair_count, skipped = mean_abs_offdiagonal(corr, valid)
    if skipped:
        logger.debug(f"NC skipped {skipped} of {pair_count} pairs with zero-variance neurons")
    return CorrelationReport(value=value, measure=Measure.NC, pair_count=pair_count, skipped_pairs=skipped)


def _unit_columns(weights, operation):
    norms = np.linalg.norm(weights, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateColumnError(int(zero[0]), operation)
    return weights / norms


def pairwise_weight_cosines(weights, absolute=False):
    """Cosines between all column pairs i < j, in row-major order"""
    values = as_matrix(weights, "pairwise_weight_cosines")
    if values.shape[1] < 2:
        raise ParameterError("at least 2 columns are required", "pairwise_weight_cosines")
    unit = _unit_columns(values, "pairwise_weight_cosines")
    cosines = np.clip(unit.T @ unit, -1.0, 1.0)
    upper = cosines[np.triu_indices(values.shape[1], k=1)]
    return np.abs(upper) if absolute else upper


def weight_correlation(weights, absolute=False):
    """
    Mean cosine between weight columns over ordered pairs i != j

    Args:
        weights: m x n WeightMatrix or array
        absolute: average |cos| instead of the signed cosine
    """
    values = as_matrix(weights, "weight_correlation")
    n = values.shape[1]
    if n < 2:
        raise ParameterError(f"at least 2 columns are required, got {n}", "weight_correlation")
    unit = _unit_columns(values, "weight_correlation")
    cosines = np.clip(unit.T @ unit, -1.0, 1.0)
    value, pair_count, _ = mean_abs_offdiagonal(cosines, signed=not absolute)
    return CorrelationReport(value=value, measure=Measure.WC, pair_count=pair_count, skipped_pairs=0)


def empirical_covariance(activations):
    """Unbiased (s - 1) covariance of the columns"""
    values = as_matrix(activations, "empirical_covariance", min_rows=2)
    return np.atleast_2d(np.cov(values, rowvar=False, ddof=1))


def _check_covariance(sigma, m, operation):
    sigma = np.atleast_2d(np.asarray(sigma, dtype=np.float64))
    if sigma.shape != (m, m):
        raise ParameterError(f"covariance shape {sigma.shape} does not match {m} inputs", operation)
    return sigma


def preactivation_covariance(w_i, w_j, sigma_prev):
    """cov(U_i, U_j) = tr(W_i W_j^T Sigma) = W_j^T Sigma W_i"""
    w_i = as_vector(w_i, "preactivation_covariance")
    w_j = as_vector(w_j, "preactivation_covariance")
    if w_i.shape != w_j.shape:
        raise ParameterError(f"column lengths differ: {w_i.size} vs {w_j.size}", "preactivation_covariance")
    sigma = _check_covariance(sigma_prev, w_i.size, "preactivation_covariance")
    return float(w_j @ sigma @ w_i)


def preactivation_covariance_matrix(weights, sigma_prev):
    """Full n x n covariance of U = W^T T_{l-1}, i.e. W^T Sigma W"""
    values = as_matrix(weights, "preactivation_covariance_matrix")
    sigma = _check_covariance(sigma_prev, values.shape[0], "preactivation_covariance_matrix")
    cov = values.T @ sigma @ values
    return 0.5 * (cov + cov.T)


def preactivation_correlation(weights, sigma_prev):
    """NC of the pre-activations, evaluated from W and the previous layer's covariance"""
    values = as_matrix(weights, "preactivation_correlation")
    if values.shape[1] < 2:
        raise ParameterError("at least 2 neurons are required", "preactivation_correlation")
    cov = preactivation_covariance_matrix(values, sigma_prev)
    std = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    valid = std >= DEGENERATE_STD
    safe = np.where(valid, std, 1.0)
    corr = np.clip(cov / np.outer(safe, safe), -1.0, 1.0)
    value, pair_count, skipped = mean_abs_offdiagonal(corr, valid)
    return CorrelationReport(value=value, measure=Measure.PRE_NC, pair_count=pair_count, skipped_pairs=skipped)


def epsilon_gap(activations, weights, sigma_prev):
    """|NC(T_l) - PreNC(W_l, Sigma_{l-1})|"""
    values = as_matrix(activations, "epsilon_gap")
    w = as_matrix(weights, "epsilon_gap")
    if values.shape[1] != w.shape[1]:
        raise ParameterError(
            f"{values.shape[1]} activation columns for a weight matrix with {w.shape[1]} columns", "epsilon_gap")
    nc = neuronal_correlation(values)
    pre = preactivation_correlation(w, sigma_prev)
    return CorrelationReport(
        value=abs(nc.value - pre.value),
        measure=Measure.EPSILON,
        pair_count=nc.pair_count,
        skipped_pairs=nc.skipped_pairs,
    )


def structure_correlation_coefficient(pattern: ConnectivityPattern):
    """
    Gamma_l = (1/n) sum_i [sum_j g(i, j)] / [gamma sum_j f(i, j)]

    g counts shared parents and f flags any shared parent; both sums run over
    every j including j = i.
    """
    if pattern.gamma <= 0:
        raise ParameterError(f"gamma must be positive, got {pattern.gamma}", "structure_correlation_coefficient")
    if pattern.n == 0:
        raise ParameterError("pattern has no neurons", "structure_correlation_coefficient")
    for i, parents in enumerate(pattern.parent_sets):
        if not parents:
            raise ParameterError(f"neuron {i} has no parents", "structure_correlation_coefficient")
    incidence = pattern.incidence()
    shared = incidence @ incidence.T
    linked = shared > 0
    ratios = shared.sum(axis=1) / (pattern.gamma * linked.sum(axis=1))
    return CorrelationReport(
        value=float(np.mean(ratios)),
        measure=Measure.GAMMA,
        pair_count=pattern.n * pattern.n,
        skipped_pairs=0,
    )
