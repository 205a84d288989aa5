#!/usr/bin/env python3
"""
Entropy estimators for hidden-layer representations

Two routes are provided: the independence bound on the original space (sum
of per-neuron marginal entropies) and kernel-embedding estimation, which sums
per-dimension entropies over uncorrelated coordinates recovered from the
kernel geometry. All values are in nats.
"""

import logging

import numpy as np
from scipy.special import digamma, gammaln
from sklearn.neighbors import KDTree

from ncentropy.config import KNN_JITTER
from ncentropy.correlation import neuronal_correlation
from ncentropy.errors import DegenerateInputError, ParameterError
from ncentropy.kernel import (
    dimensional_correlation, embedding_coordinates, feature_map_evd, gram_matrix,
    input_distances_from_feature, pairwise_feature_distances, select_kernel_width,
)
from ncentropy.models import (
    EntropyEstimate, EntropyMethod, EstimatorConfig, EstimatorKind, GaussianSpec, KernelConfig,
    KernelKind, Space,
)
from ncentropy.utils import as_matrix, as_vector, median_pairwise_distance, subsample_rows

# Get logger
logger = logging.getLogger("ncentropy")


def binned_entropy_1d(x, bins):
    """Discrete entropy of an equal-width histogram over [min(x), max(x)]"""
    if bins < 2:
        raise ParameterError(f"bins must be at least 2, got {bins}", "binned_entropy_1d")
    x = as_vector(x, "binned_entropy_1d")
    if x.size < 2:
        raise ParameterError("at least 2 samples are required", "binned_entropy_1d")
    lo, hi = float(x.min()), float(x.max())
    if hi <= lo:
        return 0.0
    counts, _ = np.histogram(x, bins=bins, range=(lo, hi))
    p = counts[counts > 0] / x.size
    return float(-np.sum(p * np.log(p)))


def _unit_ball_log_volume(d):
    return 0.5 * d * np.log(np.pi) - gammaln(0.5 * d + 1.0)


def _kth_neighbor_distances(x, k):
    tree = KDTree(x, metric="euclidean")
    distances, _ = tree.query(x, k=k + 1)
    return distances[:, k]


def knn_entropy(samples, k, seed=0):
    """
    Kozachenko-Leonenko differential entropy estimate

    H = psi(n) - psi(k) + ln V_d + (d / n) sum_i ln eps_i, eps_i the distance
    from sample i to its k-th neighbour. Zero distances (duplicate samples)
    are broken by a seeded jitter of 1e-10 times the data range.
    """
    x = as_matrix(samples, "knn_entropy")
    n, d = x.shape
    if k < 1:
        raise ParameterError(f"k must be at least 1, got {k}", "knn_entropy")
    if n < k + 1:
        raise ParameterError(f"{n} samples are not enough for k={k}", "knn_entropy")

    eps = _kth_neighbor_distances(x, k)
    if np.any(eps <= 0.0):
        span = float(np.max(np.ptp(x, axis=0)))
        scale = KNN_JITTER * (span if span > 0 else 1.0)
        rng = np.random.default_rng(seed)
        logger.debug(f"kNN entropy: jittering duplicate samples with scale {scale:.3g}")
        x = x + scale * rng.standard_normal(x.shape)
        eps = _kth_neighbor_distances(x, k)

    return float(digamma(n) - digamma(k) + _unit_ball_log_volume(d) + d * np.mean(np.log(eps)))


def estimate_1d(x, estimator: EstimatorConfig):
    """Apply the configured estimator to a single variable"""
    if estimator.kind == EstimatorKind.BINNING:
        return binned_entropy_1d(x, estimator.bins)
    return knn_entropy(np.asarray(x, dtype=np.float64)[:, None], estimator.k, estimator.seed)


def entropy_original(activations, estimator: EstimatorConfig = None):
    """Independence bound: per-neuron entropies summed as if NC were 0"""
    estimator = estimator or EstimatorConfig()
    x = as_matrix(activations, "entropy_original", min_rows=2)
    per_dimension = np.array([estimate_1d(x[:, i], estimator) for i in range(x.shape[1])])
    return EntropyEstimate(
        value=float(np.sum(per_dimension)),
        estimator=estimator.kind,
        space=Space.ORIGINAL,
        per_dimension=per_dimension,
        config=estimator.to_dict(),
        diagnostics={"samples": x.shape[0], "dimensions": x.shape[1]},
    )


def _resolve_width(x, labels, kernel_cfg: KernelConfig):
    if kernel_cfg.sigma is not None:
        return float(kernel_cfg.sigma), None
    if labels is not None:
        selection = select_kernel_width(x, labels, kernel_cfg.beta, kernel_cfg.grid, kernel_cfg.kind)
        logger.info(f"Selected kernel width sigma={selection.sigma:.4g} (objective {selection.objective:.4f})")
        return selection.sigma, selection
    sigma = median_pairwise_distance(x)
    logger.info(f"No sigma or labels given; using the median pairwise distance {sigma:.4g}")
    return sigma, None


def _projected_evd(x, kind, sigma, estimator: EstimatorConfig):
    coordinates = embedding_coordinates(x, kind)
    per_dimension = np.array([estimate_1d(row, estimator) for row in coordinates.columns])
    features = feature_map_evd(gram_matrix(x, kind, sigma))
    diagnostics = {
        "retained_rank": coordinates.rank,
        "feature_rank": features.rank,
        "eigenvalue_mass": features.eigenvalue_mass,
        "dim_correlation_projected": (
            neuronal_correlation(coordinates.columns.T).value if coordinates.rank >= 2 else 0.0),
        "dim_correlation_feature_map": dimensional_correlation(features),
    }
    return per_dimension, diagnostics


def _projected_gram(x, kind, sigma, estimator: EstimatorConfig):
    """
    Kozachenko-Leonenko estimate from the Gram matrix alone

    Neighbour distances come from the feature-space distances (Gershgorin
    interval midpoint when informative, exact EVD distances otherwise) mapped
    back through the kernel profile, in the intrinsic dimension of the samples.
    """
    if estimator.kind != EstimatorKind.KNN:
        raise ParameterError("the gram method needs the knn estimator", "entropy_kernel_embedding")
    n = x.shape[0]
    if n < estimator.k + 1:
        raise ParameterError(f"{n} samples are not enough for k={estimator.k}", "entropy_kernel_embedding")
    lo, hi, distance_method = pairwise_feature_distances(gram_matrix(x, kind, sigma))
    distances = input_distances_from_feature(np.sqrt(lo * hi), kind, sigma)
    np.fill_diagonal(distances, np.inf)
    eps = np.partition(distances, estimator.k - 1, axis=1)[:, estimator.k - 1]
    positive = eps[eps > 0.0]
    if positive.size == 0:
        raise DegenerateInputError("every sample has a duplicate neighbour", "entropy_kernel_embedding")
    if positive.size < eps.size:
        logger.debug(f"Gram method: {eps.size - positive.size} zero neighbour distances floored")
        eps = np.maximum(eps, positive.min())

    dimension = int(np.linalg.matrix_rank(x - x.mean(axis=0)))
    if KernelKind(kind) == KernelKind.GAUSSIAN:
        log_volume = _unit_ball_log_volume(dimension)
    else:
        log_volume = dimension * np.log(2.0) - gammaln(dimension + 1.0)
    value = digamma(n) - digamma(estimator.k) + log_volume + dimension * np.mean(np.log(eps))
    diagnostics = {
        "retained_rank": dimension,
        "distance_method": distance_method,
    }
    return np.array([float(value)]), diagnostics


def entropy_kernel_embedding(activations, kernel_cfg: KernelConfig = None, estimator: EstimatorConfig = None):
    """
    Entropy in the projected space

    method "evd": classical scaling of the kernel metric gives uncorrelated
    coordinates, the configured estimator runs on each and the results are
    summed. The Gram feature map at the resolved width supplies the spectrum
    diagnostics. method "gram": a joint kNN estimate from Gram distances
    without an eigendecomposition whenever the Gershgorin bounds allow it.
    """
    kernel_cfg = kernel_cfg or KernelConfig()
    estimator = estimator or EstimatorConfig()
    x = as_matrix(activations, "entropy_kernel_embedding", min_rows=2)
    if np.all(np.ptp(x, axis=0) == 0.0):
        raise DegenerateInputError("all samples are identical", "entropy_kernel_embedding")

    labels = kernel_cfg.labels
    if labels is not None and len(labels) != x.shape[0]:
        raise ParameterError(f"{len(labels)} labels for {x.shape[0]} samples", "entropy_kernel_embedding")
    total_samples = x.shape[0]
    x, labels, _ = subsample_rows(x, kernel_cfg.max_samples, kernel_cfg.seed, labels)

    sigma, selection = _resolve_width(x, labels, kernel_cfg)
    if kernel_cfg.method == EntropyMethod.GRAM:
        per_dimension, method_diagnostics = _projected_gram(x, kernel_cfg.kind, sigma, estimator)
    else:
        per_dimension, method_diagnostics = _projected_evd(x, kernel_cfg.kind, sigma, estimator)

    diagnostics = {
        "sigma": sigma,
        "method": kernel_cfg.method.value,
        "samples": x.shape[0],
        "subsampled_from": total_samples if total_samples != x.shape[0] else None,
        "dim_correlation_original": (
            neuronal_correlation(x).value if x.shape[1] >= 2 else 0.0),
    }
    diagnostics.update(method_diagnostics)
    if selection is not None:
        diagnostics["width_selection"] = selection.to_dict()

    config = estimator.to_dict()
    config["kernel"] = kernel_cfg.to_dict()
    return EntropyEstimate(
        value=float(np.sum(per_dimension)),
        estimator=estimator.kind,
        space=Space.PROJECTED,
        per_dimension=per_dimension,
        config=config,
        diagnostics=diagnostics,
    )


def estimate_entropy(activations, space, kernel_cfg=None, estimator=None):
    """Dispatch on the target space"""
    if Space(space) == Space.ORIGINAL:
        return entropy_original(activations, estimator)
    return entropy_kernel_embedding(activations, kernel_cfg, estimator)


def gaussian_entropy_analytic(spec: GaussianSpec):
    """H = 1/2 ln((2 pi e)^d det Sigma), in nats"""
    sign, logdet = np.linalg.slogdet(spec.covariance)
    if sign <= 0:
        raise ParameterError("covariance is singular or not positive definite", "gaussian_entropy_analytic")
    return float(0.5 * (spec.dimension * np.log(2.0 * np.pi * np.e) + logdet))
