"""Tiny deterministic binary container for checkpoints.

Layout (all little-endian):

* bytes 0..7   magic ``b"HGADBIN1"``
* bytes 8..11  uint32 header length ``n``
* bytes 12..   UTF-8 JSON header (``n`` bytes), written with sorted keys
* afterwards   raw C-order array payloads, in the order the header's
               ``arrays`` list declares them

The header is ``{"kind": ..., "version": 1, "meta": {...}, "arrays":
[{"name", "shape", "dtype"}, ...]}``. Only ``<f8`` and ``<i8`` payloads
are used. Identical inputs serialize to identical bytes.
"""

import json
import struct

import numpy as np

MAGIC = b"HGADBIN1"
_ALLOWED_DTYPES = ("<f8", "<i8")


def write_container(path, kind: str, meta: dict, arrays: list[tuple[str, np.ndarray]]) -> None:
    entries = []
    payloads = []
    for name, arr in arrays:
        arr = np.ascontiguousarray(arr)
        dtype = arr.dtype.newbyteorder("<").str
        if dtype not in _ALLOWED_DTYPES:
            raise ValueError(f"unsupported dtype {arr.dtype} for array {name!r}")
        entries.append({"name": name, "shape": list(arr.shape), "dtype": dtype})
        payloads.append(arr.astype(dtype, copy=False).tobytes(order="C"))
    header = json.dumps(
        {"kind": kind, "version": 1, "meta": meta, "arrays": entries},
        sort_keys=True, separators=(",", ":"),
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for blob in payloads:
            fh.write(blob)


def read_container(path, kind: str) -> tuple[dict, dict]:
    """Return ``(meta, arrays_by_name)`` for a container of the given kind."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a checkpoint file (bad magic)")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        if header.get("kind") != kind:
            raise ValueError(
                f"{path}: expected kind {kind!r}, found {header.get('kind')!r}"
            )
        if header.get("version") != 1:
            raise ValueError(f"{path}: unsupported version {header.get('version')!r}")
        arrays = {}
        for entry in header["arrays"]:
            shape = tuple(entry["shape"])
            dtype = np.dtype(entry["dtype"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * dtype.itemsize)
            arrays[entry["name"]] = np.frombuffer(buf, dtype=dtype).reshape(shape).copy()
    return header["meta"], arrays
