"""Checkpoint container for trained update rules.

Layout: 8-byte magic, little-endian uint64 header length, UTF-8 JSON header
with sorted keys, then the raw little-endian complex128 tensor blobs in header
order.  Serialization is fully deterministic, so saving a loaded checkpoint
reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .optimizer import MetaParams
from .structures import DependencyStructure

__all__ = ["save_checkpoint", "load_checkpoint", "CheckpointError"]

MAGIC = b"AFLEARN1"
SCHEMA = 1


class CheckpointError(ValueError):
    """Malformed or incompatible checkpoint file."""


def save_checkpoint(path, params, dft_size=None, metadata=None):
    """Write params and optional run metadata; returns the path."""
    tensors = []
    blobs = []
    offset = 0
    for name, tensor in params.tensors.items():
        blob = np.ascontiguousarray(tensor, dtype="<c16").tobytes()
        tensors.append(
            {
                "name": name,
                "shape": list(tensor.shape),
                "offset": offset,
                "nbytes": len(blob),
            }
        )
        blobs.append(blob)
        offset += len(blob)
    header = {
        "schema": SCHEMA,
        "structure": {"kind": params.structure.kind, "width": params.structure.width},
        "hidden_size": params.hidden_size,
        "dft_size": dft_size,
        "metadata": metadata or {},
        "tensors": tensors,
    }
    encoded = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(encoded)))
        fh.write(encoded)
        for blob in blobs:
            fh.write(blob)
    return Path(path)


def load_checkpoint(path):
    """Returns (MetaParams, header dict)."""
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) + 8 or data[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    (header_len,) = struct.unpack_from("<Q", data, len(MAGIC))
    start = len(MAGIC) + 8
    try:
        header = json.loads(data[start : start + header_len].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: bad header ({exc})") from exc
    if header.get("schema") != SCHEMA:
        raise CheckpointError(f"{path}: unsupported schema {header.get('schema')!r}")

    body = start + header_len
    tensors = {}
    for entry in header["tensors"]:
        lo = body + entry["offset"]
        hi = lo + entry["nbytes"]
        if hi > len(data):
            raise CheckpointError(f"{path}: truncated tensor {entry['name']!r}")
        tensor = np.frombuffer(data[lo:hi], dtype="<c16").reshape(entry["shape"])
        tensors[entry["name"]] = tensor.astype(complex)
    structure = DependencyStructure(header["structure"]["kind"], header["structure"]["width"])
    params = MetaParams(
        structure=structure, hidden_size=header["hidden_size"], tensors=tensors
    )
    expected = {f"gru{i}.{g}_{p}" for i in (0, 1) for g in "wub" for p in "zrc"}
    expected |= {"down_kernel", "up_kernel", "out.weight", "out.bias"}
    if set(tensors) != expected:
        raise CheckpointError(f"{path}: unexpected tensor set")
    return params, header
