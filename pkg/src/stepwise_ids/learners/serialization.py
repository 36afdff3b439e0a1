"""Versioned binary model files.

Layout (little endian)::

    magic      8 bytes   b"SWIDSMDL"
    version    uint16
    header     uint32 length + UTF-8 JSON (kind, width, schema fingerprint, payload digest)
    arrays     uint32 count, then per array:
               uint16 name length, name, uint8 dtype length, dtype, uint8 ndim,
               uint64 * ndim shape, raw bytes

Nothing time- or host-dependent is written, so equal models give equal files.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from ..errors import CorruptModel, VersionMismatch
from .forest import RandomForestModel
from .logistic import LogisticModel
from .tree import DecisionTree

MAGIC = b"SWIDSMDL"
FORMAT_VERSION = 1

_TREE_FIELDS = ("feature", "threshold", "left", "right", "value", "n_samples")


def _tree_arrays(tree: DecisionTree, prefix=""):
    return {prefix + name: getattr(tree, name) for name in _TREE_FIELDS}


def _to_arrays(model):
    if isinstance(model, DecisionTree):
        return _tree_arrays(model)
    if isinstance(model, RandomForestModel):
        sizes = np.array([t.node_count for t in model.trees], dtype=np.int64)
        arrays = {"tree_sizes": sizes, "prior": np.array([model.prior])}
        for name in _TREE_FIELDS:
            arrays[name] = np.concatenate([getattr(t, name) for t in model.trees])
        return arrays
    if isinstance(model, LogisticModel):
        return {
            "weights": model.weights,
            "bias": np.array([model.bias]),
            "loss_history": np.asarray(model.loss_history, dtype=np.float64),
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _from_arrays(kind, width, fingerprint, arrays):
    if kind == "tree":
        return DecisionTree(*(arrays[name] for name in _TREE_FIELDS), width, fingerprint)
    if kind == "forest":
        bounds = np.concatenate([[0], np.cumsum(arrays["tree_sizes"])])
        trees = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            parts = [arrays[name][lo:hi].copy() for name in _TREE_FIELDS]
            trees.append(DecisionTree(*parts, width, fingerprint))
        return RandomForestModel(trees, float(arrays["prior"][0]), width, fingerprint)
    if kind == "logistic":
        return LogisticModel(arrays["weights"], float(arrays["bias"][0]), width, fingerprint,
                             arrays["loss_history"].tolist())
    raise CorruptModel(f"unknown model kind {kind!r}")


def _pack_arrays(arrays) -> bytes:
    out = [struct.pack("<I", len(arrays))]
    for name in sorted(arrays):
        arr = np.asarray(arrays[name])
        dtype = arr.dtype.newbyteorder("<") if arr.dtype.byteorder == ">" else arr.dtype
        arr = np.ascontiguousarray(arr, dtype=dtype)
        name_b, dtype_b = name.encode(), arr.dtype.str.encode()
        out.append(struct.pack("<H", len(name_b)) + name_b)
        out.append(struct.pack("<B", len(dtype_b)) + dtype_b)
        out.append(struct.pack("<B", arr.ndim) + struct.pack(f"<{arr.ndim}Q", *arr.shape))
        out.append(arr.tobytes())
    return b"".join(out)


class _Reader:
    def __init__(self, data: bytes, offset: int = 0):
        self.data = data
        self.pos = offset

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CorruptModel("model file is truncated")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _unpack_arrays(reader: _Reader) -> dict:
    (count,) = reader.unpack("<I")
    arrays = {}
    for _ in range(count):
        (n,) = reader.unpack("<H")
        name = reader.take(n).decode()
        (n,) = reader.unpack("<B")
        dtype = np.dtype(reader.take(n).decode())
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}Q")
        nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        arrays[name] = np.frombuffer(reader.take(nbytes), dtype=dtype).reshape(shape).copy()
    return arrays


def dumps(model) -> bytes:
    payload = _pack_arrays(_to_arrays(model))
    header = {
        "kind": model.kind,
        "n_features": int(model.n_features),
        "schema": model.schema_fingerprint,
        "sha256": hashlib.sha256(payload).hexdigest(),
    }
    header_b = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    return MAGIC + struct.pack("<HI", FORMAT_VERSION, len(header_b)) + header_b + payload


def loads(data: bytes):
    if data[: len(MAGIC)] != MAGIC:
        raise CorruptModel("not a model file (bad magic bytes)")
    reader = _Reader(data, len(MAGIC))
    version, header_len = reader.unpack("<HI")
    if version > FORMAT_VERSION:
        raise VersionMismatch(f"model format v{version} is newer than supported v{FORMAT_VERSION}")
    if version < 1:
        raise CorruptModel(f"invalid format version {version}")
    try:
        header = json.loads(reader.take(header_len).decode())
        payload = data[reader.pos:]
        if hashlib.sha256(payload).hexdigest() != header["sha256"]:
            raise CorruptModel("model payload checksum mismatch")
        arrays = _unpack_arrays(reader)
        return _from_arrays(header["kind"], header["n_features"], header["schema"], arrays)
    except CorruptModel:
        raise
    except (KeyError, ValueError, TypeError, struct.error, UnicodeDecodeError) as exc:
        raise CorruptModel(f"unreadable model file: {exc}") from None


def save_model(model, path) -> None:
    Path(path).write_bytes(dumps(model))


def load_model(path):
    return loads(Path(path).read_bytes())


def model_hash(model) -> str:
    return hashlib.sha256(dumps(model)).hexdigest()
