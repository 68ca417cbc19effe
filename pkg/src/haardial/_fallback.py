"""Pure numpy implementations of the hot kernels.

Each function mirrors the signature of its counterpart in ``_kernels.pyx``
and must return identical results (bit-identical for the RNG hash, within
rounding for the floating point kernels).
"""
import numpy as np

from .errors import DegenerateInputError

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_M53 = 2.0 ** -53


def _mix(z):
    # splitmix64 finalizer applied to z + golden ratio increment
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_uniforms(seed, circuits, tags):
    """Counter-based uniforms in the open interval (0, 1).

    ``out[c, k]`` depends only on ``(seed, circuits[c], tags[k])``.
    """
    circuits = np.asarray(circuits, dtype=np.uint64)
    tags = np.asarray(tags, dtype=np.uint64)
    base = _mix(np.array([seed], dtype=np.uint64))
    h = _mix(base ^ circuits)[:, None]
    h = _mix(_mix(h ^ tags[None, :]))
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


def apply_program(u, ops, gates):
    """Left-multiply each ``u[b]`` in place by the embedded gates, in order.

    ``ops[k] = (a, b)`` names the mode pair of gate ``k``; ``a == b`` marks
    a single-mode phase whose factor is ``gates[:, k, 0, 0]``.
    """
    for k in range(ops.shape[0]):
        a, b = int(ops[k, 0]), int(ops[k, 1])
        g = gates[:, k]
        if a == b:
            u[:, a, :] *= g[:, 0, 0, None]
            continue
        row_a = u[:, a, :].copy()
        row_b = u[:, b, :]
        u[:, a, :] = g[:, 0, 0, None] * row_a + g[:, 0, 1, None] * row_b
        u[:, b, :] = g[:, 1, 0, None] * row_a + g[:, 1, 1, None] * row_b
    return u


def householder_qr(a):
    """Batched complex Householder QR: ``a[b] = q[b] @ r[b]``."""
    a = np.asarray(a, dtype=np.complex128)
    nb, m, _ = a.shape
    r = a.copy()
    q = np.broadcast_to(np.eye(m, dtype=np.complex128), (nb, m, m)).copy()
    for k in range(m):
        x = r[:, k:, k]
        norm = np.sqrt(np.sum(x.real ** 2 + x.imag ** 2, axis=1))
        if np.any(norm < 1e-300):
            raise DegenerateInputError("rank-deficient input to householder_qr")
        x0 = x[:, 0]
        mag0 = np.abs(x0)
        phase = np.where(mag0 > 0, x0 / np.where(mag0 > 0, mag0, 1.0), 1.0)
        alpha = -phase * norm
        v = x.copy()
        v[:, 0] -= alpha
        vnorm = np.sqrt(np.sum(v.real ** 2 + v.imag ** 2, axis=1))
        v /= vnorm[:, None]
        # r <- (I - 2 v v^H) r on rows k:
        w = np.einsum("bi,bij->bj", v.conj(), r[:, k:, :])
        r[:, k:, :] -= 2.0 * v[:, :, None] * w[:, None, :]
        # q <- q (I - 2 v v^H) on columns k:
        w = np.einsum("bij,bj->bi", q[:, :, k:], v)
        q[:, :, k:] -= 2.0 * w[:, :, None] * v.conj()[:, None, :]
        r[:, k, k] = alpha
        r[:, k + 1:, k] = 0.0
    return q, r
