#!/usr/bin/env python3
"""
Gram matrices, the EVD feature map and kernel-width selection
"""

import logging

import numpy as np
from scipy.linalg import eigh
from scipy.spatial.distance import pdist, squareform

from ncentropy.config import (
    DEFAULT_BETA, DEFAULT_GRID_SIZE, EIGENVALUE_TOLERANCE, GRID_HIGH_FACTOR, GRID_LOW_FACTOR,
)
from ncentropy.correlation import neuronal_correlation
from ncentropy.errors import DegenerateInputError, NumericalDegeneracyError, ParameterError
from ncentropy.models import (
    DistanceInterval, FeatureMatrix, GramMatrix, KernelKind, SpectrumBounds,
    WidthCandidate, WidthSelection,
)
from ncentropy.utils import as_matrix, median_pairwise_distance

# Get logger
logger = logging.getLogger("ncentropy")


def _entries(kernel):
    if isinstance(kernel, GramMatrix):
        return kernel.entries
    return np.asarray(kernel, dtype=np.float64)


def gram_matrix(samples, kind=KernelKind.GAUSSIAN, sigma=1.0):
    """
    Kernel matrix over the rows of `samples`

    Gaussian: exp(-|x_i - x_j|_2^2 / (2 sigma^2)); Laplacian: exp(-|x_i - x_j|_1 / sigma)
    """
    kind = KernelKind(kind)
    if not np.isfinite(sigma) or sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}", "gram_matrix")
    x = as_matrix(samples, "gram_matrix")
    if x.shape[0] < 2:
        raise ParameterError(f"at least 2 samples are required, got {x.shape[0]}", "gram_matrix")

    if kind == KernelKind.GAUSSIAN:
        distances = squareform(pdist(x, metric="sqeuclidean"))
        entries = np.exp(-distances / (2.0 * sigma * sigma))
    else:
        distances = squareform(pdist(x, metric="cityblock"))
        entries = np.exp(-distances / sigma)
    np.fill_diagonal(entries, 1.0)
    return GramMatrix(entries=entries, kernel_kind=kind, width=float(sigma))


def feature_map_evd(kernel):
    """
    K = V Lambda V^T; the feature vectors are the columns of Lambda^(1/2) V^T

    Eigenvalues come back sorted descending. Values in [-tol, 0) are clamped
    to 0; anything below -tol means the input is not a Gram matrix.
    """
    entries = _entries(kernel)
    eigenvalues, vectors = eigh(entries)
    eigenvalues = eigenvalues[::-1]
    vectors = vectors[:, ::-1]
    smallest = float(eigenvalues[-1])
    if smallest < -EIGENVALUE_TOLERANCE:
        raise NumericalDegeneracyError(smallest)
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    columns = np.sqrt(eigenvalues)[:, None] * vectors.T
    rank = int(np.count_nonzero(eigenvalues > EIGENVALUE_TOLERANCE))
    return FeatureMatrix(columns=columns, eigenvalues=eigenvalues, rank=rank)


def kernel_metric(samples, kind=KernelKind.GAUSSIAN):
    """Squared input distances the kernel profile is a function of (Euclidean or L1)"""
    x = as_matrix(samples, "kernel_metric")
    if KernelKind(kind) == KernelKind.GAUSSIAN:
        return squareform(pdist(x, metric="sqeuclidean"))
    return squareform(pdist(x, metric="cityblock")) ** 2


def embedding_coordinates(samples, kind=KernelKind.GAUSSIAN):
    """
    Uncorrelated coordinates of the samples by classical scaling of the kernel metric

    B = -1/2 J D^2 J with J the centering matrix; the leading eigenpairs of B,
    at most one per input dimension, give the coordinates Lambda^(1/2) V^T.
    For the Gaussian kernel B is the centered linear Gram matrix, so the
    coordinates are a rotation of the centered samples and volumes are kept.

    Returns:
        FeatureMatrix: one row per coordinate, one column per sample
    """
    x = as_matrix(samples, "embedding_coordinates", min_rows=2)
    n, d = x.shape
    squared = kernel_metric(x, kind)
    row_means = squared.mean(axis=1)
    inner = -0.5 * (squared - row_means[:, None] - row_means[None, :] + squared.mean())
    inner = 0.5 * (inner + inner.T)

    rank = min(d, n - 1)
    eigenvalues, vectors = eigh(inner, subset_by_index=[n - rank, n - 1])
    eigenvalues = eigenvalues[::-1]
    vectors = vectors[:, ::-1]
    keep = eigenvalues > EIGENVALUE_TOLERANCE * max(1.0, float(eigenvalues[0]))
    if not np.any(keep):
        raise DegenerateInputError("the samples span no direction", "embedding_coordinates")
    eigenvalues = eigenvalues[keep]
    columns = np.sqrt(eigenvalues)[:, None] * vectors[:, keep].T
    return FeatureMatrix(columns=columns, eigenvalues=eigenvalues, rank=int(eigenvalues.size))


def input_distances_from_feature(squared_feature, kind=KernelKind.GAUSSIAN, sigma=1.0):
    """
    Invert the kernel profile: input-space distance from a squared feature distance

    For a unit-diagonal kernel |k_i - k_j|^2 = 2 - 2 kappa(r). Gaussian gives
    r = sigma sqrt(-2 ln kappa) (Euclidean), Laplacian r = -sigma ln kappa (L1).
    Values of kappa are clamped to [tiny, 1].
    """
    kappa = 1.0 - 0.5 * np.asarray(squared_feature, dtype=np.float64)
    kappa = np.clip(kappa, np.finfo(np.float64).tiny, 1.0)
    if KernelKind(kind) == KernelKind.GAUSSIAN:
        return sigma * np.sqrt(-2.0 * np.log(kappa))
    return -sigma * np.log(kappa)


def kernel_space_distances(kernel):
    """Squared feature-space distances K_ii + K_jj - 2 K_ij for every pair"""
    entries = _entries(kernel)
    diagonal = np.diag(entries)
    distances = diagonal[:, None] + diagonal[None, :] - 2.0 * entries
    return np.clip(distances, 0.0, None)


def feature_distances(features: FeatureMatrix):
    """Squared Euclidean distances between feature columns"""
    return squareform(pdist(features.columns.T, metric="sqeuclidean"))


def gershgorin_bounds(kernel):
    """
    Eigenvalue bounds from the Gershgorin discs; for a unit diagonal these are
    1 -/+ the largest off-diagonal row sum
    """
    entries = _entries(kernel)
    diagonal = np.diag(entries)
    radii = np.sum(np.abs(entries), axis=1) - np.abs(diagonal)
    bounds = SpectrumBounds(
        lambda_min_bound=float(np.min(diagonal - radii)),
        lambda_max_bound=float(np.max(diagonal + radii)),
    )
    if bounds.vacuous:
        logger.debug(f"Gershgorin lower bound {bounds.lambda_min_bound:.4g} is vacuous")
    return bounds


def gram_column_distance(kernel, i, j):
    """|K_i - K_j|_2^2 between two Gram columns"""
    entries = _entries(kernel)
    diff = entries[:, i] - entries[:, j]
    return float(diff @ diff)


def bounded_distance_interval(kernel, bounds: SpectrumBounds, i, j):
    """
    Interval for |k_i - k_j|^2 from the Gram-column distance, without an EVD

    Inverts lmin^2/lmax * d_k <= |K_i - K_j|^2 <= lmax^2/lmin * d_k.
    """
    entries = _entries(kernel)
    n = entries.shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise ParameterError(f"index pair ({i}, {j}) out of range for n={n}", "bounded_distance_interval")
    if bounds.vacuous:
        return DistanceInterval.unbounded_interval()
    lo_bound = bounds.lambda_min_bound
    hi_bound = bounds.lambda_max_bound
    column_distance = gram_column_distance(entries, i, j)
    return DistanceInterval(
        lo=column_distance * lo_bound / (hi_bound * hi_bound),
        hi=column_distance * hi_bound / (lo_bound * lo_bound),
    )


def pairwise_feature_distances(kernel):
    """
    Lower/upper squared feature distances for all pairs

    Uses the Gershgorin sandwich when it is informative and falls back to the
    exact EVD distances otherwise.

    Returns:
        tuple: (lo, hi, method) with n x n matrices and method "gershgorin" or "evd"
    """
    entries = _entries(kernel)
    bounds = gershgorin_bounds(entries)
    if bounds.vacuous:
        logger.warning(
            f"Gershgorin bounds are vacuous (lower bound {bounds.lambda_min_bound:.4g}); using the EVD path")
        exact = feature_distances(feature_map_evd(entries))
        return exact, exact.copy(), "evd"
    column_distances = squareform(pdist(entries.T, metric="sqeuclidean"))
    lo_bound = bounds.lambda_min_bound
    hi_bound = bounds.lambda_max_bound
    lo = column_distances * lo_bound / (hi_bound * hi_bound)
    hi = column_distances * hi_bound / (lo_bound * lo_bound)
    return lo, hi, "gershgorin"


def kernel_alignment(kernel_a, kernel_b):
    """A(Ka, Kb) = tr(Ka Kb^T) / (|Ka|_F |Kb|_F)"""
    a = _entries(kernel_a)
    b = _entries(kernel_b)
    if a.shape != b.shape:
        raise ParameterError(f"shape mismatch {a.shape} vs {b.shape}", "kernel_alignment")
    norm_a = np.linalg.norm(a, "fro")
    norm_b = np.linalg.norm(b, "fro")
    if norm_a == 0.0 or norm_b == 0.0:
        raise ParameterError("kernel with zero Frobenius norm", "kernel_alignment")
    return float(np.sum(a * b) / (norm_a * norm_b))


def label_kernel(labels):
    """0/1 class-indicator matrix: K_y[i, j] = 1 iff labels match"""
    labels = np.asarray(labels).ravel()
    if labels.size < 2:
        raise ParameterError("at least 2 labels are required", "label_kernel")
    return (labels[:, None] == labels[None, :]).astype(np.float64)


def dimensional_correlation(features: FeatureMatrix):
    """NC of the feature matrix, retained eigen-dimensions treated as neurons"""
    activations = features.as_activations()
    if activations.shape[1] < 2:
        return 0.0
    return neuronal_correlation(activations).value


def default_width_grid(samples, size=DEFAULT_GRID_SIZE):
    """Log grid over [0.1 d_med, 10 d_med], d_med the median pairwise distance"""
    x = as_matrix(samples, "default_width_grid")
    d_med = median_pairwise_distance(x)
    if d_med <= 0.0:
        raise DegenerateInputError("median pairwise distance is zero", "default_width_grid")
    return np.geomspace(GRID_LOW_FACTOR * d_med, GRID_HIGH_FACTOR * d_med, size).tolist()


def select_kernel_width(samples, labels, beta=DEFAULT_BETA, grid=None, kind=KernelKind.GAUSSIAN):
    """
    sigma' = argmax_sigma A(K_sigma, K_y) - beta * rho(k_sigma)

    Candidates are scanned in increasing order and only a strictly better
    objective replaces the incumbent, so ties go to the smallest sigma.
    """
    x = as_matrix(samples, "select_kernel_width")
    labels = np.asarray(labels).ravel()
    if labels.size != x.shape[0]:
        raise ParameterError(f"{labels.size} labels for {x.shape[0]} samples", "select_kernel_width")
    if not 0.0 <= beta <= 1.0:
        raise ParameterError(f"beta must lie in [0, 1], got {beta}", "select_kernel_width")
    if grid is None:
        grid = default_width_grid(x)
    grid = sorted(set(float(sigma) for sigma in grid))
    if not grid:
        raise ParameterError("the sigma grid is empty", "select_kernel_width")

    target = label_kernel(labels)
    candidates = []
    best = None
    for sigma in grid:
        gram = gram_matrix(x, kind, sigma)
        alignment = kernel_alignment(gram, target)
        rho = dimensional_correlation(feature_map_evd(gram))
        candidate = WidthCandidate(
            sigma=sigma, alignment=alignment, dim_correlation=rho, objective=alignment - beta * rho)
        logger.debug(f"sigma={sigma:.4g} alignment={alignment:.4f} rho={rho:.4f} objective={candidate.objective:.4f}")
        candidates.append(candidate)
        if best is None or candidate.objective > best.objective:
            best = candidate

    return WidthSelection(
        sigma=best.sigma,
        alignment=best.alignment,
        dim_correlation=best.dim_correlation,
        objective=best.objective,
        beta=beta,
        grid=candidates,
    )
