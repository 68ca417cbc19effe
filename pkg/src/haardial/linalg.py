"""Dense complex matrix helpers.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The helpers
here add the shape checks and the JSON wire format used by the CLI.
"""
import json

import numpy as np

from . import _backend
from .errors import DegenerateInputError, ShapeError


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite 2-d complex128 array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def unitarity_defect(a) -> float:
    """Largest entry magnitude of ``a a^H - I``."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"unitarity_defect needs a square matrix, got {a.shape}")
    return float(np.max(np.abs(a @ a.conj().T - np.eye(a.shape[0]))))


def batch_unitarity_defect(u) -> np.ndarray:
    """Per-matrix defect for a stack of shape ``(B, m, m)``."""
    u = np.asarray(u)
    m = u.shape[-1]
    prod = u @ np.conj(np.swapaxes(u, -1, -2))
    return np.max(np.abs(prod - np.eye(m)), axis=(-2, -1))


def householder_qr(a):
    """Householder QR of a square complex matrix.

    Returns ``(q, r)`` with ``a = q @ r``, ``q`` unitary and ``r`` upper
    triangular. The diagonal of ``r`` is not normalised to be positive.

    Raises
    ------
    DegenerateInputError
        If a column is numerically zero below the diagonal
        (``|r_ii| < 1e-300``).
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"householder_qr needs a square matrix, got {a.shape}")
    q, r = _backend.householder_qr(a[None, :, :])
    if np.any(np.abs(np.diagonal(r[0])) < 1e-300):
        raise DegenerateInputError("rank-deficient input to householder_qr")
    return q[0], r[0]


def batch_householder_qr(a):
    """Householder QR over a stack of square matrices ``(B, m, m)``."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ShapeError(f"expected a stack of square matrices, got {a.shape}")
    return _backend.householder_qr(a)


def matrix_to_dict(a) -> dict:
    a = as_matrix(a)
    entries = [[float(z.real), float(z.imag)] for z in a.ravel()]
    return {"rows": a.shape[0], "cols": a.shape[1], "entries": entries}


def matrix_from_dict(d) -> np.ndarray:
    rows, cols = int(d["rows"]), int(d["cols"])
    entries = d["entries"]
    if len(entries) != rows * cols:
        raise ShapeError(f"{len(entries)} entries for a {rows}x{cols} matrix")
    flat = np.array([complex(re, im) for re, im in entries], dtype=np.complex128)
    return as_matrix(flat.reshape(rows, cols))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def matrix_to_json(a) -> str:
    """Serialise with 17 significant digits so the round trip is exact."""
    a = as_matrix(a)
    entries = ", ".join(f"[{_fmt(z.real)}, {_fmt(z.imag)}]" for z in a.ravel())
    return f'{{"rows": {a.shape[0]}, "cols": {a.shape[1]}, "entries": [{entries}]}}'


def matrix_from_json(text: str) -> np.ndarray:
    return matrix_from_dict(json.loads(text))
