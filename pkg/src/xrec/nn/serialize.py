"""Checkpoint container: magic + JSON header + raw float32 payloads.

Layout, all little-endian:

    bytes 0..8    magic ``XREC0001``
    bytes 8..16   u64 header byte length
    header        UTF-8 JSON (hyperparameters, vocabularies, tensor
                  name/shape manifest, free-form extras)
    payloads      each tensor's float32 bytes, in manifest order

Raw bytes in, raw bytes out: a load/save cycle reproduces the file
bit for bit, which the persistence tests rely on.
"""

from __future__ import annotations

import json

import numpy as np

MAGIC = b"XREC0001"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, header: dict, tensors: dict):
    """Write tensors (name -> ndarray) with a JSON header describing them.

    The tensor manifest is built from the dict's insertion order, so a
    stable construction order gives a stable file.
    """
    manifest = []
    blobs = []
    for name, arr in tensors.items():
        arr32 = np.ascontiguousarray(arr, dtype="<f4")
        manifest.append({"name": name, "shape": list(arr32.shape)})
        blobs.append(arr32.tobytes())
    doc = dict(header)
    doc["format"] = FORMAT_VERSION
    doc["tensors"] = manifest
    head = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.uint64(len(head)).tobytes())
        fh.write(head)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path):
    """Read a checkpoint; returns (header dict, {name: float32 ndarray})."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise CheckpointError(f"bad magic {magic!r}")
        raw_len = fh.read(8)
        if len(raw_len) != 8:
            raise CheckpointError("truncated header length")
        head_len = int(np.frombuffer(raw_len, dtype="<u8")[0])
        head_bytes = fh.read(head_len)
        if len(head_bytes) != head_len:
            raise CheckpointError("truncated header")
        header = json.loads(head_bytes.decode("utf-8"))
        if header.get("format") != FORMAT_VERSION:
            raise CheckpointError(f"unsupported format {header.get('format')!r}")
        tensors = {}
        for entry in header["tensors"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            blob = fh.read(count * 4)
            if len(blob) != count * 4:
                raise CheckpointError(f"truncated payload for {entry['name']}")
            tensors[entry["name"]] = np.frombuffer(blob, dtype="<f4").reshape(shape).copy()
        trailing = fh.read(1)
        if trailing:
            raise CheckpointError("trailing bytes after payloads")
    return header, tensors
