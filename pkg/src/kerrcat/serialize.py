"""Operator and matrix dumps for debugging and data exchange.

Two formats: JSON (nested lists of [re, im] pairs) and a raw binary layout --
an 8-byte little-endian uint64 dimension followed by dim*dim complex entries
as interleaved little-endian float64 (re, im), row-major.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .fock import ComplexOperator

_MAGIC = b"KCOP"


def operator_to_json(op, path: str):
    m = op.entries if isinstance(op, ComplexOperator) else np.asarray(op, dtype=complex)
    payload = {
        "dim": m.shape[0],
        "entries": [[[v.real, v.imag] for v in row] for row in m],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def operator_from_json(path: str) -> np.ndarray:
    with open(path) as fh:
        payload = json.load(fh)
    dim = payload["dim"]
    out = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(payload["entries"]):
        for j, (re, im) in enumerate(row):
            out[i, j] = re + 1j * im
    return out


def operator_to_binary(op, path: str):
    m = op.entries if isinstance(op, ComplexOperator) else np.asarray(op, dtype=complex)
    dim = m.shape[0]
    interleaved = np.empty(2 * dim * dim, dtype="<f8")
    flat = np.ascontiguousarray(m).reshape(-1)
    interleaved[0::2] = flat.real
    interleaved[1::2] = flat.imag
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", dim))
        fh.write(interleaved.tobytes())


def operator_from_binary(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError("not an operator dump")
        (dim,) = struct.unpack("<Q", fh.read(8))
        raw = np.frombuffer(fh.read(), dtype="<f8")
    if raw.size != 2 * dim * dim:
        raise ValueError("truncated operator dump")
    return (raw[0::2] + 1j * raw[1::2]).reshape(dim, dim)


def grid_to_csv(path: str, header: list, rows):
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
