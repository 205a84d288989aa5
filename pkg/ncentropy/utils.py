#!/usr/bin/env python3
"""
Utility functions shared by the measure modules
"""

import logging
import sys

import numpy as np
from scipy.spatial.distance import pdist
from scipy.stats import spearmanr

from ncentropy.config import DEGENERATE_STD
from ncentropy.errors import InputError, ParameterError
from ncentropy.models import ActivationMatrix, WeightMatrix

# Get logger
logger = logging.getLogger("ncentropy")


def as_matrix(data, operation, min_rows=1):
    """Return a finite float64 2-D array from an ActivationMatrix, WeightMatrix or array-like"""
    if isinstance(data, (ActivationMatrix, WeightMatrix)):
        matrix = data.values
    else:
        matrix = np.asarray(data, dtype=np.float64)
        if matrix.ndim == 1:
            matrix = matrix[:, None]
    if matrix.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got shape {matrix.shape}", operation)
    if not np.all(np.isfinite(matrix)):
        raise InputError("matrix contains non-finite entries", operation)
    if matrix.shape[0] < min_rows:
        raise ParameterError(f"at least {min_rows} rows are required, got {matrix.shape[0]}", operation)
    return matrix


def as_vector(data, operation):
    vector = np.asarray(data, dtype=np.float64).ravel()
    if not np.all(np.isfinite(vector)):
        raise InputError("vector contains non-finite entries", operation)
    return vector


def mean_abs_offdiagonal(matrix, valid=None, signed=False):
    """
    Average of the off-diagonal entries over ordered pairs i != j

    Entries of invalid rows/columns contribute 0 but still count towards the
    n(n-1) denominator. Summation is row by row in index order.

    Returns:
        tuple: (value, pair_count, skipped_pairs)
    """
    n = matrix.shape[0]
    pair_count = n * (n - 1)
    if pair_count == 0:
        return 0.0, 0, 0
    values = matrix if signed else np.abs(matrix)
    if valid is None:
        valid = np.ones(n, dtype=bool)
    usable = np.outer(valid, valid)
    np.fill_diagonal(usable, False)
    skipped = pair_count - int(np.count_nonzero(usable))
    total = 0.0
    for i in range(n):
        total += float(np.sum(values[i][usable[i]]))
    return total / pair_count, pair_count, skipped


def standardized_columns(matrix):
    """
    Center and scale every column to unit (population) variance

    Returns:
        tuple: (z, valid) where valid marks columns with std >= DEGENERATE_STD;
        degenerate columns are left as zeros in z
    """
    centered = matrix - matrix.mean(axis=0)
    std = centered.std(axis=0)
    valid = std >= DEGENERATE_STD
    z = np.zeros_like(centered)
    z[:, valid] = centered[:, valid] / std[valid]
    return z, valid


def correlation_matrix(matrix):
    """Pearson correlation between columns, with a mask of non-degenerate columns"""
    z, valid = standardized_columns(matrix)
    corr = (z.T @ z) / matrix.shape[0]
    np.clip(corr, -1.0, 1.0, out=corr)
    return corr, valid


def median_pairwise_distance(samples):
    """Median Euclidean distance over all distinct sample pairs"""
    distances = pdist(samples, metric="euclidean")
    if distances.size == 0:
        return 0.0
    return float(np.median(distances))


def subsample_rows(matrix, max_rows, seed, labels=None):
    """Deterministic row subsample; returns (matrix, labels, index) unchanged when small enough"""
    n = matrix.shape[0]
    if n <= max_rows:
        return matrix, labels, np.arange(n)
    rng = np.random.default_rng(seed)
    index = np.sort(rng.choice(n, size=max_rows, replace=False))
    logger.warning(f"Subsampling {n} rows down to {max_rows} for the kernel path (seed {seed})")
    return matrix[index], None if labels is None else np.asarray(labels)[index], index


def spearman(x, y):
    """Spearman rank correlation; 0 when either input is constant"""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return 0.0
    rho, _ = spearmanr(x, y)
    return float(rho)


def iqr(values):
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return float("nan")
    q1, q3 = np.percentile(values, [25, 75])
    return float(q3 - q1)


def nats_to_bits(value):
    return value / np.log(2.0)


def print_progress_bar(current, total, prefix="Training", suffix="", length=30, quiet=False):
    """Print a progress bar on stderr, overwriting the same line"""
    if quiet or total <= 0:
        return
    percent = f"{100 * (current / float(total)):.1f}"
    filled_length = int(length * current // total)
    bar = '█' * filled_length + '-' * (length - filled_length)

    # Print with carriage return to overwrite the same line
    print(f'\r{prefix} |{bar}| {percent}% ({current}/{total}) {suffix}', end='', flush=True, file=sys.stderr)

    # Print newline when complete
    if current == total:
        print(file=sys.stderr)
