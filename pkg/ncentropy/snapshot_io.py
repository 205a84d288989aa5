#!/usr/bin/env python3
"""
Binary container for training snapshots

Layout (all integers little-endian u32):
    b"CENT" | version | metadata length | metadata (UTF-8 JSON)
    | matrix count | per matrix: rows, cols, rows*cols little-endian f64

Matrices are stored snapshot by snapshot, layer by layer, weight then bias
(bias as a 1 x n matrix).
"""

import json
import logging
import struct
from pathlib import Path

import numpy as np

from ncentropy.errors import InputError
from ncentropy.models import NetworkSnapshot, NetworkSpec, ReportEncoder

# Get logger
logger = logging.getLogger("ncentropy")

MAGIC = b"CENT"
FORMAT_VERSION = 1


def _pack_matrix(matrix):
    matrix = np.atleast_2d(np.asarray(matrix, dtype="<f8"))
    rows, cols = matrix.shape
    return struct.pack("<II", rows, cols) + matrix.tobytes(order="C")


def write_snapshots(path, snapshots):
    """Write a sequence of snapshots of one network"""
    if not snapshots:
        raise InputError("no snapshots to write", "write_snapshots")
    spec = snapshots[0].spec
    metadata = {
        "spec": spec.to_dict(),
        "snapshots": [snapshot.to_dict() for snapshot in snapshots],
    }
    encoded = json.dumps(metadata, cls=ReportEncoder).encode("utf-8")
    matrices = []
    for snapshot in snapshots:
        for weight, bias in zip(snapshot.weights, snapshot.biases):
            matrices.append(_pack_matrix(weight))
            matrices.append(_pack_matrix(bias[None, :]))
    payload = b"".join([
        MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        struct.pack("<I", len(encoded)),
        encoded,
        struct.pack("<I", len(matrices)),
        *matrices,
    ])
    Path(path).write_bytes(payload)
    logger.info(f"Wrote {len(snapshots)} snapshots to {path}")


class _Reader:
    def __init__(self, buffer):
        self.buffer = buffer
        self.offset = 0

    def take(self, size, what):
        if self.offset + size > len(self.buffer):
            raise InputError(f"truncated {what} at byte offset {self.offset}", "read_snapshots")
        chunk = self.buffer[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def u32(self, what):
        value, = struct.unpack("<I", self.take(4, what))
        return value


def read_snapshots(path):
    """Inverse of write_snapshots"""
    reader = _Reader(Path(path).read_bytes())
    if reader.take(4, "magic") != MAGIC:
        raise InputError("not a CENT snapshot container (byte offset 0)", "read_snapshots")
    version = reader.u32("version")
    if version != FORMAT_VERSION:
        raise InputError(f"unsupported container version {version}", "read_snapshots")
    raw_metadata = reader.take(reader.u32("metadata length"), "metadata")
    try:
        metadata = json.loads(raw_metadata.decode("utf-8"))
        spec = NetworkSpec(**metadata["spec"])
        infos = [dict(info, epoch=int(info["epoch"])) for info in metadata["snapshots"]]
    except (ValueError, KeyError, TypeError) as e:
        raise InputError(f"corrupt metadata: {e}", "read_snapshots") from e
    count = reader.u32("matrix count")
    matrices = []
    for _ in range(count):
        rows = reader.u32("matrix header")
        cols = reader.u32("matrix header")
        data = reader.take(rows * cols * 8, "matrix payload")
        matrices.append(np.frombuffer(data, dtype="<f8").reshape(rows, cols).astype(np.float64))
    if reader.offset != len(reader.buffer):
        raise InputError(f"trailing bytes at byte offset {reader.offset}", "read_snapshots")

    per_snapshot = 2 * spec.depth
    if count != per_snapshot * len(infos):
        raise InputError(f"{count} matrices do not match {len(infos)} snapshots", "read_snapshots")

    snapshots = []
    for index, info in enumerate(infos):
        block = matrices[index * per_snapshot:(index + 1) * per_snapshot]
        snapshots.append(NetworkSnapshot(
            spec=spec,
            epoch=info["epoch"],
            weights=block[0::2],
            biases=[bias[0] for bias in block[1::2]],
            train_accuracy=_float(info.get("train_accuracy")),
            test_accuracy=_float(info.get("test_accuracy")),
            loss=_float(info.get("loss")),
        ))
    return snapshots


def _float(value):
    return float("nan") if value is None else float(value)
