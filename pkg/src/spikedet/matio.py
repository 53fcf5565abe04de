"""Observation-matrix file format.

Header line ``spkmat v1 <rows> <cols> complex64|complex128`` followed by
raw little-endian interleaved (re, im) values in column-major order.
Numpy's complex layout is already interleaved, so the payload is a plain
Fortran-order dump.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

_MAGIC = "spkmat"
_DTYPES = {"complex64": "<c8", "complex128": "<c16"}


def write_matrix(path: str | Path, matrix: np.ndarray, dtype: str = "complex128") -> None:
    if dtype not in _DTYPES:
        raise ValueError(f"dtype must be one of {sorted(_DTYPES)}, got {dtype}")
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {matrix.shape}")
    rows, cols = matrix.shape
    payload = matrix.astype(_DTYPES[dtype]).tobytes(order="F")
    with open(path, "wb") as fh:
        fh.write(f"{_MAGIC} v1 {rows} {cols} {dtype}\n".encode("ascii"))
        fh.write(payload)


def read_matrix(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").strip()
        parts = header.split()
        if len(parts) != 5 or parts[0] != _MAGIC or parts[1] != "v1":
            raise ValueError(f"not a spkmat v1 file: header {header!r}")
        rows, cols = int(parts[2]), int(parts[3])
        if parts[4] not in _DTYPES:
            raise ValueError(f"unsupported dtype {parts[4]!r}")
        dt = np.dtype(_DTYPES[parts[4]])
        payload = fh.read(rows * cols * dt.itemsize)
    if len(payload) != rows * cols * dt.itemsize:
        raise ValueError("truncated spkmat payload")
    flat = np.frombuffer(payload, dtype=dt)
    return flat.reshape((rows, cols), order="F").astype(np.complex128)
