#!/usr/bin/env python3
"""
Dataset ingestion and synthesis: MNIST IDX files, CSV matrices and seeded
Gaussian / class-blob generators
"""

import csv
import json
import logging
import struct
from pathlib import Path

import numpy as np
from sklearn.datasets import make_blobs as sklearn_make_blobs
from sklearn.model_selection import train_test_split as sklearn_train_test_split

from ncentropy.errors import CsvParseError, IdxParseError, InputError, ParameterError
from ncentropy.models import Dataset, GaussianSpec, Source, SyntheticManifest

# Get logger
logger = logging.getLogger("ncentropy")

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
GAUSSIAN_ALGORITHM = "pcg64-box-muller-v1"


def _read_bytes(path, operation):
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}", operation)


def parse_idx(buffer, expected_magic):
    """
    Parse an unsigned-byte IDX payload

    Layout (big endian): u32 magic (0x0000 08 <ndim>), ndim x u32 sizes, u8 payload.
    The declared sizes must account for every byte of the file.
    """
    if len(buffer) < 4:
        raise IdxParseError("file too short for the magic number", len(buffer))
    magic, = struct.unpack(">I", buffer[:4])
    if magic != expected_magic:
        raise IdxParseError(f"bad magic 0x{magic:08x}, expected 0x{expected_magic:08x}", 0)
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(buffer) < header:
        raise IdxParseError(f"truncated header: {ndim} dimension sizes declared", len(buffer))
    dims = struct.unpack(f">{ndim}I", buffer[4:header])
    expected = int(np.prod(dims))
    actual = len(buffer) - header
    if actual < expected:
        raise IdxParseError(f"truncated payload: {expected} bytes declared, {actual} present", len(buffer))
    if actual > expected:
        raise IdxParseError(f"{actual - expected} trailing bytes after the declared payload", header + expected)
    return np.frombuffer(buffer, dtype=np.uint8, count=expected, offset=header).reshape(dims)


def load_idx(images_path, labels_path):
    """MNIST image/label pair; pixels scaled to [0, 1]"""
    images = parse_idx(_read_bytes(images_path, "load_idx"), IDX_IMAGES_MAGIC)
    labels = parse_idx(_read_bytes(labels_path, "load_idx"), IDX_LABELS_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise IdxParseError(f"{images.shape[0]} images but {labels.shape[0]} labels", 4)
    inputs = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    logger.info(f"Loaded {inputs.shape[0]} IDX samples of dimension {inputs.shape[1]}")
    return Dataset(inputs=inputs, labels=labels.astype(np.int64), source=Source.IDX)


def write_idx(array, path, magic):
    """Write a uint8 array in IDX format (fixtures and exports)"""
    array = np.asarray(array, dtype=np.uint8)
    header = struct.pack(">I", magic) + struct.pack(f">{array.ndim}I", *array.shape)
    Path(path).write_bytes(header + array.tobytes())


def _standard_normals(count, seed):
    """Box-Muller transform over PCG64 uniforms"""
    rng = np.random.Generator(np.random.PCG64(seed))
    pairs = (count + 1) // 2
    u1 = rng.random(pairs)
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * np.pi * u2
    z = np.empty(2 * pairs)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return z[:count]


def sample_gaussian(n, d, variance, seed):
    """n i.i.d. samples of N(0, variance * I_d)"""
    if variance <= 0:
        raise ParameterError(f"variance must be positive, got {variance}", "sample_gaussian")
    if n < 2 or d < 1:
        raise ParameterError(f"need n >= 2 and d >= 1, got n={n} d={d}", "sample_gaussian")
    inputs = np.sqrt(variance) * _standard_normals(n * d, seed).reshape(n, d)
    return Dataset(inputs=inputs, source=Source.SYNTHETIC, seed=seed)


def sample_multivariate_gaussian(spec: GaussianSpec, n, seed):
    """n samples of N(mean, covariance) through a Cholesky factor"""
    factor = np.linalg.cholesky(spec.covariance)
    z = _standard_normals(n * spec.dimension, seed).reshape(n, spec.dimension)
    return Dataset(inputs=spec.mean + z @ factor.T, source=Source.SYNTHETIC, seed=seed)


def make_blobs(n, d, classes=2, cluster_std=1.0, seed=0, center_box=(-10.0, 10.0)):
    """Seeded isotropic class blobs"""
    inputs, labels = sklearn_make_blobs(
        n_samples=n, n_features=d, centers=classes, cluster_std=cluster_std,
        center_box=center_box, random_state=seed)
    return Dataset(inputs=inputs, labels=labels, source=Source.SYNTHETIC, seed=seed)


def subset(dataset: Dataset, size, seed):
    """Deterministic random subset, original order preserved"""
    if size >= len(dataset):
        return dataset
    rng = np.random.default_rng(seed)
    return dataset.take(np.sort(rng.choice(len(dataset), size=size, replace=False)))


def train_test_split(dataset: Dataset, test_fraction=0.2, seed=0):
    """Stratified when labels are present"""
    index = np.arange(len(dataset))
    stratify = dataset.labels if dataset.labels is not None else None
    train_index, test_index = sklearn_train_test_split(
        index, test_size=test_fraction, random_state=seed, stratify=stratify)
    return dataset.take(np.sort(train_index)), dataset.take(np.sort(test_index))


def load_csv(path, has_labels=False):
    """
    Headered CSV, one sample per row; the `label` column holds class ids when
    has_labels is set
    """
    try:
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}", "load_csv")
    if not rows:
        raise CsvParseError("file is empty", 0)
    header, body = rows[0], rows[1:]
    if not body:
        raise CsvParseError("no data rows", 0)

    width = len(header)
    for i, row in enumerate(body):
        if len(row) != width:
            raise CsvParseError(f"ragged row: expected {width} cells, found {len(row)}", i)

    label_index = None
    if has_labels:
        if "label" not in header:
            raise CsvParseError("no 'label' column in the header", 0)
        label_index = header.index("label")

    try:
        cells = np.array(body, dtype=np.float64)
    except ValueError:
        for i, row in enumerate(body):
            for j, cell in enumerate(row):
                try:
                    float(cell)
                except ValueError:
                    raise CsvParseError(f"non-numeric cell {cell!r}", i, j)
        raise

    labels = None
    columns = list(header)
    if label_index is not None:
        labels = cells[:, label_index]
        if not np.all(labels == np.round(labels)):
            bad = int(np.flatnonzero(labels != np.round(labels))[0])
            raise CsvParseError("label is not an integer class id", bad, label_index)
        cells = np.delete(cells, label_index, axis=1)
        del columns[label_index]
    if not np.all(np.isfinite(cells)):
        bad_row, bad_col = map(int, np.argwhere(~np.isfinite(cells))[0])
        raise CsvParseError("non-finite cell", bad_row, bad_col)
    return Dataset(inputs=cells, labels=labels, source=Source.CSV, columns=columns)


def save_csv(matrix, path, labels=None, columns=None):
    """Write a matrix with 17 significant digits so load_csv(save_csv(M)) == M"""
    values = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    if columns is None:
        columns = [f"x{i}" for i in range(values.shape[1])]
    header = list(columns) + (["label"] if labels is not None else [])
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for i, row in enumerate(values):
            cells = [f"{v:.17g}" for v in row]
            if labels is not None:
                cells.append(str(int(labels[i])))
            writer.writerow(cells)


def manifest_for(dataset: Dataset, variance):
    n, d = dataset.inputs.shape
    return SyntheticManifest(n=n, d=d, variance=variance, seed=dataset.seed, algorithm=GAUSSIAN_ALGORITHM)


def write_manifest(manifest: SyntheticManifest, path):
    Path(path).write_text(json.dumps(manifest.dict(), indent=2))


def read_manifest(path):
    try:
        return SyntheticManifest.parse_file(path)
    except OSError as e:
        raise InputError(f"cannot read manifest {path}: {e}", "read_manifest") from e
    except ValueError as e:
        raise InputError(f"invalid manifest {path}: {e}", "read_manifest") from e


def sample_from_manifest(manifest: SyntheticManifest):
    """Regenerate the dataset a manifest describes"""
    if manifest.algorithm != GAUSSIAN_ALGORITHM:
        raise ParameterError(f"unknown sampler algorithm {manifest.algorithm!r}", "sample_from_manifest")
    return sample_gaussian(manifest.n, manifest.d, manifest.variance, manifest.seed)
