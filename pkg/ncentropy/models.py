#!/usr/bin/env python3
"""
Models for the neuronal-correlation / entropy toolkit
"""

import json
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, validator

from ncentropy.config import (
    DEFAULT_BETA, DEFAULT_BINS, DEFAULT_GAMMA, DEFAULT_K, DEFAULT_KERNEL,
    EIGENVALUE_TOLERANCE, KERNEL_MAX_SAMPLES, REPORT_SCHEMA_VERSION,
    SYMMETRY_TOLERANCE, TOOL_VERSION,
)
from ncentropy.errors import InputError, ParameterError


class ReportEncoder(json.JSONEncoder):
    """
    JSON encoder that understands datetimes, enums and numpy values
    """
    def default(self, obj):
        if isinstance(obj, datetime):
            return obj.isoformat()
        if isinstance(obj, Enum):
            return obj.value
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if hasattr(obj, "to_dict"):
            return obj.to_dict()
        return super(ReportEncoder, self).default(obj)


class KernelKind(str, Enum):
    GAUSSIAN = "gaussian"
    LAPLACIAN = "laplacian"


class EntropyMethod(str, Enum):
    EVD = "evd"
    GRAM = "gram"


class Measure(str, Enum):
    NC = "NC"
    WC = "WC"
    PRE_NC = "PreNC"
    EPSILON = "Epsilon"
    GAMMA = "Gamma"


class EstimatorKind(str, Enum):
    BINNING = "binning"
    KNN = "knn"


class Space(str, Enum):
    ORIGINAL = "original"
    PROJECTED = "projected"


class Activation(str, Enum):
    IDENTITY = "identity"
    RELU = "relu"
    TANH = "tanh"


class Init(str, Enum):
    RANDOM = "random"
    TRUNCATED_NORMAL = "truncated_normal"
    XAVIER = "xavier"
    HE_NORMAL = "he_normal"


class Source(str, Enum):
    IDX = "idx"
    CSV = "csv"
    SYNTHETIC = "synthetic"


def _finite_matrix(values, operation):
    matrix = np.asarray(values, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if matrix.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got shape {matrix.shape}", operation)
    if not np.all(np.isfinite(matrix)):
        raise InputError("matrix contains non-finite entries", operation)
    return matrix


@dataclass
class ActivationMatrix:
    """Samples x neurons outputs of one layer"""
    values: np.ndarray
    layer_id: int = 0
    epoch: int = 0

    def __post_init__(self):
        self.values = _finite_matrix(self.values, "ActivationMatrix")
        if self.values.shape[0] < 2:
            raise ParameterError("at least 2 samples are required", "ActivationMatrix")

    @property
    def n_samples(self):
        return self.values.shape[0]

    @property
    def n_neurons(self):
        return self.values.shape[1]

    def to_dict(self):
        return {
            "layer_id": self.layer_id,
            "epoch": self.epoch,
            "shape": list(self.values.shape),
        }


@dataclass
class WeightMatrix:
    """m x n weights between layer l-1 (rows) and layer l (columns); bias is unused by WC"""
    values: np.ndarray
    layer_id: int = 0
    bias: Optional[np.ndarray] = None

    def __post_init__(self):
        self.values = _finite_matrix(self.values, "WeightMatrix")

    @property
    def shape(self):
        return self.values.shape

    def to_dict(self):
        return {"layer_id": self.layer_id, "shape": list(self.values.shape)}


@dataclass
class GramMatrix:
    entries: np.ndarray
    kernel_kind: KernelKind = KernelKind.GAUSSIAN
    width: float = 1.0

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.float64)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ParameterError(f"Gram matrix must be square, got {self.entries.shape}", "GramMatrix")
        if np.max(np.abs(self.entries - self.entries.T), initial=0.0) > SYMMETRY_TOLERANCE:
            raise ParameterError("Gram matrix is not symmetric", "GramMatrix")

    @property
    def n(self):
        return self.entries.shape[0]


@dataclass
class FeatureMatrix:
    """Columns of Lambda^(1/2) V^T; column i is the feature vector of sample i"""
    columns: np.ndarray
    eigenvalues: np.ndarray
    rank: int

    @property
    def retained(self):
        """Mask of eigen-dimensions above the eigenvalue tolerance"""
        return self.eigenvalues > EIGENVALUE_TOLERANCE

    @property
    def eigenvalue_mass(self):
        """Fraction of the spectrum carried by the retained dimensions"""
        total = float(np.sum(self.eigenvalues))
        if total <= 0.0:
            return 0.0
        return float(np.sum(self.eigenvalues[self.retained])) / total

    def as_activations(self):
        """Samples x retained-dimensions view, for reuse of the NC machinery"""
        return self.columns[self.retained, :].T


@dataclass
class SpectrumBounds:
    lambda_min_bound: float
    lambda_max_bound: float

    @property
    def vacuous(self):
        return self.lambda_min_bound <= 0.0

    def to_dict(self):
        return {
            "lambda_min_bound": self.lambda_min_bound,
            "lambda_max_bound": self.lambda_max_bound,
            "vacuous": self.vacuous,
        }


@dataclass
class DistanceInterval:
    """Interval for a squared feature-space distance; unbounded when the bounds are vacuous"""
    lo: float
    hi: float
    unbounded: bool = False

    @classmethod
    def unbounded_interval(cls):
        return cls(lo=0.0, hi=float("inf"), unbounded=True)

    def contains(self, value, tol=1e-12):
        return self.lo - tol <= value <= self.hi + tol


@dataclass
class WidthCandidate:
    sigma: float
    alignment: float
    dim_correlation: float
    objective: float

    def to_dict(self):
        return {
            "sigma": self.sigma,
            "alignment": self.alignment,
            "dim_correlation": self.dim_correlation,
            "objective": self.objective,
        }


@dataclass
class WidthSelection:
    sigma: float
    alignment: float
    dim_correlation: float
    objective: float
    beta: float
    grid: List[WidthCandidate] = field(default_factory=list)

    def to_dict(self):
        return {
            "sigma": self.sigma,
            "alignment": self.alignment,
            "dim_correlation": self.dim_correlation,
            "objective": self.objective,
            "beta": self.beta,
            "grid": [candidate.to_dict() for candidate in self.grid],
        }


@dataclass
class CorrelationReport:
    value: float
    measure: Measure
    pair_count: int = 0
    skipped_pairs: int = 0

    def to_dict(self):
        return {
            "measure": self.measure.value,
            "value": self.value,
            "pair_count": self.pair_count,
            "skipped_pairs": self.skipped_pairs,
        }


@dataclass
class ConnectivityPattern:
    """Parent sets on layer l-1 (0-based indices) for every neuron of layer l"""
    parent_sets: List[frozenset]
    gamma: float = DEFAULT_GAMMA
    m: Optional[int] = None

    def __post_init__(self):
        self.parent_sets = [frozenset(int(p) for p in parents) for parents in self.parent_sets]
        largest = max((max(p) for p in self.parent_sets if p), default=-1)
        smallest = min((min(p) for p in self.parent_sets if p), default=0)
        if smallest < 0:
            raise ParameterError(f"negative parent index {smallest}", "ConnectivityPattern")
        if self.m is None:
            self.m = 1 + largest
        elif largest >= self.m:
            raise ParameterError(f"parent index {largest} out of range for m={self.m}", "ConnectivityPattern")

    @property
    def n(self):
        return len(self.parent_sets)

    def incidence(self):
        """n x m 0/1 matrix, row i marks the parents of neuron i"""
        matrix = np.zeros((self.n, self.m), dtype=np.float64)
        for i, parents in enumerate(self.parent_sets):
            if parents:
                matrix[i, sorted(parents)] = 1.0
        return matrix

    @classmethod
    def fully_connected(cls, m, n, gamma=DEFAULT_GAMMA):
        parents = frozenset(range(m))
        return cls([parents] * n, gamma=gamma, m=m)

    @classmethod
    def conv1d(cls, length, width, stride=1, gamma=DEFAULT_GAMMA):
        if width < 1 or stride < 1 or width > length:
            raise ParameterError(f"invalid 1-D convolution length={length} width={width} stride={stride}", "conv1d")
        starts = range(0, length - width + 1, stride)
        return cls([frozenset(range(s, s + width)) for s in starts], gamma=gamma, m=length)

    @classmethod
    def conv2d(cls, height, width, filter_size, stride=1, gamma=DEFAULT_GAMMA):
        if filter_size < 1 or stride < 1 or filter_size > min(height, width):
            raise ParameterError(
                f"invalid 2-D convolution {height}x{width} filter={filter_size} stride={stride}", "conv2d")
        parent_sets = []
        for top in range(0, height - filter_size + 1, stride):
            for left in range(0, width - filter_size + 1, stride):
                parent_sets.append(frozenset(
                    r * width + c
                    for r in range(top, top + filter_size)
                    for c in range(left, left + filter_size)
                ))
        return cls(parent_sets, gamma=gamma, m=height * width)

    @classmethod
    def from_parent_lists(cls, lists: Sequence[Sequence[int]], gamma=DEFAULT_GAMMA, m=None):
        return cls([frozenset(parents) for parents in lists], gamma=gamma, m=m)


@dataclass
class EstimatorConfig:
    kind: EstimatorKind = EstimatorKind.KNN
    bins: int = DEFAULT_BINS
    k: int = DEFAULT_K
    seed: int = 0

    def __post_init__(self):
        self.kind = EstimatorKind(self.kind)

    def to_dict(self):
        if self.kind == EstimatorKind.BINNING:
            return {"kind": self.kind.value, "bins": self.bins}
        return {"kind": self.kind.value, "k": self.k, "seed": self.seed}


@dataclass
class KernelConfig:
    """Either a fixed sigma, or labels (plus beta/grid) for width selection"""
    kind: KernelKind = KernelKind(DEFAULT_KERNEL)
    sigma: Optional[float] = None
    labels: Optional[np.ndarray] = None
    beta: float = DEFAULT_BETA
    grid: Optional[List[float]] = None
    max_samples: int = KERNEL_MAX_SAMPLES
    seed: int = 0
    method: EntropyMethod = EntropyMethod.EVD

    def __post_init__(self):
        self.kind = KernelKind(self.kind)
        self.method = EntropyMethod(self.method)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "method": self.method.value,
            "sigma": self.sigma,
            "select_width": self.sigma is None and self.labels is not None,
            "beta": self.beta,
            "grid": self.grid,
            "max_samples": self.max_samples,
            "seed": self.seed,
        }


@dataclass
class EntropyEstimate:
    value: float
    estimator: EstimatorKind
    space: Space
    per_dimension: np.ndarray
    config: Dict[str, Any] = field(default_factory=dict)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self):
        return {
            "value": self.value,
            "estimator": self.estimator.value,
            "space": self.space.value,
            "dimensions": int(len(self.per_dimension)),
            "per_dimension": self.per_dimension.tolist(),
            "config": self.config,
            "diagnostics": self.diagnostics,
        }


@dataclass
class GaussianSpec:
    dimension: int
    covariance: np.ndarray
    mean: Optional[np.ndarray] = None

    def __post_init__(self):
        self.covariance = np.atleast_2d(np.asarray(self.covariance, dtype=np.float64))
        if self.dimension < 1 or self.covariance.shape != (self.dimension, self.dimension):
            raise ParameterError(
                f"covariance shape {self.covariance.shape} does not match dimension {self.dimension}",
                "GaussianSpec")
        if not np.allclose(self.covariance, self.covariance.T):
            raise ParameterError("covariance is not symmetric", "GaussianSpec")
        if self.mean is None:
            self.mean = np.zeros(self.dimension)

    @classmethod
    def isotropic(cls, dimension, variance):
        return cls(dimension, variance * np.eye(dimension))


@dataclass
class NetworkSpec:
    """Fully connected network; layer_sizes is [I, h1 .. hk, O]"""
    layer_sizes: List[int]
    activation: Activation = Activation.RELU
    init: Init = Init.XAVIER
    seed: int = 0
    notation: Optional[str] = None

    def __post_init__(self):
        self.layer_sizes = [int(size) for size in self.layer_sizes]
        if len(self.layer_sizes) < 2 or min(self.layer_sizes) < 1:
            raise ParameterError(f"invalid layer sizes {self.layer_sizes}", "NetworkSpec")
        self.activation = Activation(self.activation)
        self.init = Init(self.init)

    @property
    def depth(self):
        """Number of weight layers (k hidden + 1 output)"""
        return len(self.layer_sizes) - 1

    @property
    def hidden_layers(self):
        return len(self.layer_sizes) - 2

    def to_dict(self):
        return {
            "layer_sizes": self.layer_sizes,
            "activation": self.activation.value,
            "init": self.init.value,
            "seed": self.seed,
            "notation": self.notation,
        }


@dataclass
class NetworkSnapshot:
    spec: NetworkSpec
    epoch: int
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    train_accuracy: float = float("nan")
    test_accuracy: float = float("nan")
    loss: float = float("nan")

    def weight_matrix(self, layer):
        """WeightMatrix of layer `layer` (1-based, as in T_l = a(W_l^T T_{l-1} + b_l))"""
        return WeightMatrix(self.weights[layer - 1], layer_id=layer, bias=self.biases[layer - 1])

    def copy(self, epoch=None):
        return NetworkSnapshot(
            spec=self.spec,
            epoch=self.epoch if epoch is None else epoch,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            train_accuracy=self.train_accuracy,
            test_accuracy=self.test_accuracy,
            loss=self.loss,
        )

    def to_dict(self):
        return {
            "epoch": self.epoch,
            "train_accuracy": self.train_accuracy,
            "test_accuracy": self.test_accuracy,
            "loss": self.loss,
        }


@dataclass
class GeneralizationRecord:
    epoch: int
    gap: float
    nc_penultimate: float
    wc_penultimate: float
    train_accuracy: float
    test_accuracy: float

    def to_dict(self):
        return {
            "epoch": self.epoch,
            "gap": self.gap,
            "nc_penultimate": self.nc_penultimate,
            "wc_penultimate": self.wc_penultimate,
            "train_accuracy": self.train_accuracy,
            "test_accuracy": self.test_accuracy,
        }


@dataclass
class Dataset:
    inputs: np.ndarray
    labels: Optional[np.ndarray] = None
    source: Source = Source.SYNTHETIC
    seed: Optional[int] = None
    columns: Optional[List[str]] = None

    def __post_init__(self):
        self.inputs = _finite_matrix(self.inputs, "Dataset")
        if self.inputs.shape[0] < 1:
            raise ParameterError("dataset is empty", "Dataset")
        if self.labels is not None:
            self.labels = np.asarray(self.labels).astype(np.int64)
            if self.labels.shape != (self.inputs.shape[0],):
                raise ParameterError(
                    f"{self.labels.shape[0]} labels for {self.inputs.shape[0]} samples", "Dataset")

    def __len__(self):
        return self.inputs.shape[0]

    @property
    def n_classes(self):
        if self.labels is None:
            return 0
        return int(self.labels.max()) + 1

    def take(self, index):
        labels = None if self.labels is None else self.labels[index]
        return Dataset(self.inputs[index], labels, self.source, self.seed, self.columns)


class SyntheticManifest(BaseModel):
    """Describes how a synthetic Gaussian dataset was generated"""
    n: int
    d: int
    variance: float
    seed: int
    algorithm: str

    @validator("variance")
    def variance_positive(cls, value):
        if value <= 0:
            raise ValueError("variance must be positive")
        return value


class ExperimentReport(BaseModel):
    """Schema-versioned experiment output; config echoes every flag and seed"""
    schema_version: int = REPORT_SCHEMA_VERSION
    experiment: str
    tool_version: str = TOOL_VERSION
    created_at: datetime
    config: Dict[str, Any]
    tables: Dict[str, List[Dict[str, Any]]] = {}
    summary: Dict[str, Any] = {}
    claims: Dict[str, bool] = {}
    notes: List[str] = []

    def to_json(self):
        return json.dumps(self.dict(), cls=ReportEncoder, indent=2)
