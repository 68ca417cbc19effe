import numpy as np
import pytest

from haardial.errors import DegenerateInputError, ShapeError
from haardial.linalg import (
    adjoint,
    as_matrix,
    batch_unitarity_defect,
    householder_qr,
    matmul,
    matrix_from_json,
    matrix_to_json,
    unitarity_defect,
)


def _triple_loop(a, b):
    out = [[0j] * len(b[0]) for _ in a]
    for i in range(len(a)):
        for j in range(len(b[0])):
            for k in range(len(b)):
                out[i][j] += a[i][k] * b[k][j]
    return np.array(out)


def test_matmul_against_loops():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    b = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    assert np.allclose(matmul(a, b), _triple_loop(a.tolist(), b.tolist()), atol=1e-14)


def test_matmul_shape_mismatch():
    with pytest.raises(ShapeError):
        matmul(np.eye(2), np.eye(3))


def test_as_matrix_rejects():
    with pytest.raises(ShapeError):
        as_matrix(np.zeros(3))
    with pytest.raises(ValueError):
        as_matrix([[np.nan]])


def test_adjoint_and_defect():
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert unitarity_defect(h) < 1e-15
    assert unitarity_defect(2 * np.eye(2)) == pytest.approx(3.0)
    assert np.array_equal(adjoint([[1j, 2]]), np.array([[-1j], [2]]))
    assert batch_unitarity_defect(np.stack([h, 2 * h])).tolist() == pytest.approx([0, 3], abs=1e-15)


def test_householder_reconstructs():
    rng = np.random.default_rng(4)
    a = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7))
    q, r = householder_qr(a)
    assert np.max(np.abs(q @ r - a)) < 1e-12
    assert unitarity_defect(q) < 1e-13
    assert np.allclose(np.tril(r, -1), 0)


def test_householder_degenerate():
    a = np.ones((3, 3), dtype=complex)
    with pytest.raises(DegenerateInputError):
        householder_qr(a)


def test_json_round_trip_exact():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.array_equal(matrix_from_json(matrix_to_json(a)), a)


def test_json_schema():
    text = matrix_to_json([[1, 2j]])
    assert text == '{"rows": 1, "cols": 2, "entries": [[1, 0], [0, 2]]}'
