# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: counter-based uniforms, gate-program application, Householder QR.

Semantics match ``_fallback.py`` exactly; the test suite compares them.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdint cimport uint64_t

from .errors import DegenerateInputError

cnp.import_array()

cdef extern from "complex.h" nogil:
    double cabs(double complex)
    double complex conj(double complex)


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = z + <uint64_t>0x9E3779B97F4A7C15ULL
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


def stream_uniforms(seed, circuits, tags):
    cdef uint64_t[::1] cv = np.ascontiguousarray(circuits, dtype=np.uint64)
    cdef uint64_t[::1] tv = np.ascontiguousarray(tags, dtype=np.uint64)
    cdef Py_ssize_t nc = cv.shape[0], nt = tv.shape[0], c, k
    out = np.empty((nc, nt), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef uint64_t base = _mix(<uint64_t>seed)
    cdef uint64_t h
    cdef double scale = 2.0 ** -53
    with nogil:
        for c in range(nc):
            h = _mix(base ^ cv[c])
            for k in range(nt):
                ov[c, k] = (<double>(_mix(_mix(h ^ tv[k])) >> 11) + 0.5) * scale
    return out


def apply_program(u, ops, gates):
    cdef double complex[:, :, ::1] uv = u
    cdef long long[:, ::1] opv = np.ascontiguousarray(ops, dtype=np.int64)
    cdef double complex[:, :, :, ::1] gv = np.ascontiguousarray(gates, dtype=np.complex128)
    cdef Py_ssize_t nb = uv.shape[0], m = uv.shape[2], nk = opv.shape[0]
    cdef Py_ssize_t b, k, j, a, bb
    cdef double complex g00, g01, g10, g11, xa, xb
    with nogil:
        for b in range(nb):
            for k in range(nk):
                a = opv[k, 0]
                bb = opv[k, 1]
                g00 = gv[b, k, 0, 0]
                if a == bb:
                    for j in range(m):
                        uv[b, a, j] = g00 * uv[b, a, j]
                    continue
                g01 = gv[b, k, 0, 1]
                g10 = gv[b, k, 1, 0]
                g11 = gv[b, k, 1, 1]
                for j in range(m):
                    xa = uv[b, a, j]
                    xb = uv[b, bb, j]
                    uv[b, a, j] = g00 * xa + g01 * xb
                    uv[b, bb, j] = g10 * xa + g11 * xb
    return u


def householder_qr(a):
    arr = np.ascontiguousarray(a, dtype=np.complex128)
    cdef Py_ssize_t nb = arr.shape[0], m = arr.shape[1]
    r = arr.copy()
    q = np.zeros_like(arr)
    v = np.empty(m, dtype=np.complex128)
    cdef double complex[:, :, ::1] rv = r
    cdef double complex[:, :, ::1] qv = q
    cdef double complex[::1] vv = v
    cdef Py_ssize_t b, k, i, j
    cdef double norm, vnorm, mag0
    cdef double complex alpha, phase, w
    cdef int degenerate = 0
    with nogil:
        for b in range(nb):
            for i in range(m):
                qv[b, i, i] = 1.0
            for k in range(m):
                norm = 0.0
                for i in range(k, m):
                    norm = norm + rv[b, i, k].real * rv[b, i, k].real + rv[b, i, k].imag * rv[b, i, k].imag
                norm = sqrt(norm)
                if norm < 1e-300:
                    degenerate = 1
                    break
                mag0 = cabs(rv[b, k, k])
                if mag0 > 0:
                    phase = rv[b, k, k] / mag0
                else:
                    phase = 1.0
                alpha = -phase * norm
                vnorm = 0.0
                for i in range(k, m):
                    vv[i] = rv[b, i, k]
                vv[k] = vv[k] - alpha
                for i in range(k, m):
                    vnorm = vnorm + vv[i].real * vv[i].real + vv[i].imag * vv[i].imag
                vnorm = sqrt(vnorm)
                for i in range(k, m):
                    vv[i] = vv[i] / vnorm
                for j in range(m):
                    w = 0.0
                    for i in range(k, m):
                        w = w + conj(vv[i]) * rv[b, i, j]
                    for i in range(k, m):
                        rv[b, i, j] = rv[b, i, j] - 2.0 * vv[i] * w
                for i in range(m):
                    w = 0.0
                    for j in range(k, m):
                        w = w + qv[b, i, j] * vv[j]
                    for j in range(k, m):
                        qv[b, i, j] = qv[b, i, j] - 2.0 * w * conj(vv[j])
                rv[b, k, k] = alpha
                for i in range(k + 1, m):
                    rv[b, i, k] = 0.0
            if degenerate:
                break
    if degenerate:
        raise DegenerateInputError("rank-deficient input to householder_qr")
    return q, r
