"""JSON encoding of complex matrices: rows of [re, im] pairs."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError


def encode_matrix(M) -> list:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {M.shape}")
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def decode_matrix(data) -> np.ndarray:
    """Inverse of encode_matrix; plain real entries are accepted too."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        M = arr[..., 0] + 1j * arr[..., 1]
    elif arr.ndim == 2:
        M = arr.astype(complex)
    else:
        raise DimensionError(f"cannot decode matrix from array of shape {arr.shape}")
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"matrix is not square: {M.shape}")
    return M


def encode_vector(v) -> list:
    return [float(x) for x in np.asarray(v, dtype=float)]
