"""Reachable fraction of unitary space under restricted reflectivity ranges.

A fabrication offset ``eps`` limits a coupler to ``r in [|eps|, 1 - |eps|]``.
Because the component densities are independent and normalised, the
reachable measure is the product of the truncated masses
``(1 - |eps|)^k - |eps|^k`` over every component, with ``k`` the marginal
exponent. Products are accumulated as sums of logarithms.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circuit import Scheme, component_labels, marginal_exponent
from .errors import DomainError

ERROR_MODES = ("per-component", "shared")
CHUNK = 256


@dataclass(frozen=True)
class CoverageConfig:
    m_max: int
    sigma: float
    trials: int = 1000
    error_mode: str = "per-component"
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if not 0.0 <= self.sigma < 0.5:
            raise DomainError(f"sigma must lie in [0, 0.5), got {self.sigma}")
        if self.error_mode not in ERROR_MODES:
            raise DomainError(f"unknown error mode {self.error_mode!r}")
        if self.m_max < 2:
            raise DomainError("m_max must be >= 2")


def _log_mass(k, e):
    """``log((1-e)^k - e^k)`` for ``0 <= e < 0.5``; ``-inf`` for ``e >= 0.5``.

    Written as ``k log(1-e) + log(1 - (e/(1-e))^k)`` so it stays accurate
    for tiny ``e``.
    """
    e = np.abs(np.asarray(e, dtype=np.float64))
    k = np.asarray(k, dtype=np.float64)
    out = np.full(np.broadcast(k, e).shape, -np.inf)
    ok = np.broadcast_to(e < 0.5, out.shape)
    kk, ee = np.broadcast_to(k, out.shape)[ok], np.broadcast_to(e, out.shape)[ok]
    with np.errstate(divide="ignore"):
        out[ok] = kk * np.log1p(-ee) + np.log1p(-((ee / (1.0 - ee)) ** kk))
    return out


def truncated_mass(n: int, i: int, eps: float) -> float:
    """Probability mass of ``r in [|eps|, 1 - |eps|]`` under exponent ``n - i``."""
    if not 1 <= i < n:
        raise DomainError(f"need 1 <= i < n, got n={n}, i={i}")
    e = abs(float(eps))
    if e >= 0.5:
        return 0.0
    k = n - i
    return (1.0 - e) ** k - e ** k


def _block_exponents(m_max: int, scheme: Scheme) -> list:
    """Exponent arrays per block ``n = 2..m_max``.

    For the rectangular scheme exponents depend on the final mesh size, so
    only the triangular schemes give nested per-block arrays.
    """
    return [np.array([marginal_exponent(n, i, m_max, scheme) for i in range(1, n)], dtype=np.float64)
            for n in range(2, m_max + 1)]


def _chunk_logs(m_max: int, sigmas, trials: int, error_mode: str, seed: int, jobs: int):
    """Per-trial cumulative log coverage, shape ``(len(sigmas), trials, m_max - 1)``.

    Column ``c`` holds the log coverage of ``m = c + 2``. The same normal
    draws are scaled by every sigma (common random numbers).
    """
    sigmas = np.asarray(sigmas, dtype=np.float64)
    exps = _block_exponents(m_max, Scheme.TRIANGULAR_ADJACENT)
    comps = m_max * (m_max - 1) // 2
    out = np.empty((sigmas.size, trials, m_max - 1))

    def work(c):
        lo, hi = c * CHUNK, min((c + 1) * CHUNK, trials)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(c,)))
        if error_mode == "shared":
            z = np.repeat(rng.standard_normal((hi - lo, 1)), comps, axis=1)
        else:
            z = rng.standard_normal((hi - lo, comps))
        for s, sigma in enumerate(sigmas):
            eps = sigma * z
            cols, pos = [], 0
            for n, k in enumerate(exps, start=2):
                cols.append(_log_mass(k[None, :], eps[:, pos:pos + n - 1]).sum(axis=1))
                pos += n - 1
            out[s, lo:hi] = np.cumsum(np.stack(cols, axis=1), axis=1)

    chunks = range((trials + CHUNK - 1) // CHUNK)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(work, chunks))
    else:
        for c in chunks:
            work(c)
    return out


def coverage_curves(m_max: int, sigmas, trials: int = 1000, error_mode: str = "per-component",
                    seed: int = 0, jobs: int = 1):
    """Mean coverage and its standard error for ``m = 2..m_max`` and every sigma.

    Returns ``(mean, stderr)``, both of shape ``(len(sigmas), m_max - 1)``.
    """
    sigmas = [float(s) for s in np.atleast_1d(sigmas)]
    for s in sigmas:
        CoverageConfig(m_max, s, trials, error_mode, seed)
    cov = np.exp(_chunk_logs(m_max, sigmas, trials, error_mode, seed, jobs))
    mean = cov.mean(axis=1)
    if trials > 1:
        stderr = cov.std(axis=1, ddof=1) / math.sqrt(trials)
    else:
        stderr = np.zeros_like(mean)
    return mean, stderr


def coverage(m: int, sigma: float, trials: int = 1000, error_mode: str = "per-component",
             rng=0) -> float:
    """Mean over trials of the product of truncated masses for an ``m``-mode mesh.

    ``rng`` is an integer seed; trials are split into fixed chunks with
    their own child seeds.
    """
    if m < 2:
        raise DomainError("coverage needs m >= 2")
    mean, _ = coverage_curves(m, [sigma], trials, error_mode, int(rng))
    return float(mean[0, -1])


def coverage_factors(m: int, eps, scheme=Scheme.TRIANGULAR_ADJACENT) -> list:
    """Closed-form factor of every component in canonical order for fixed offsets."""
    scheme = Scheme(scheme)
    labels = component_labels(m)
    eps = np.broadcast_to(np.asarray(eps, dtype=np.float64), (len(labels),))
    out = []
    for (n, i), e in zip(labels, eps):
        k = marginal_exponent(n, i, m, scheme)
        out.append(truncated_mass(k + 1, 1, e))
    return out


def coverage_csv(m_max: int, sigmas, trials: int = 1000, error_mode: str = "per-component",
                 seed: int = 0, jobs: int = 1) -> str:
    """CSV text ``m,sigma,coverage,stderr`` with rows grouped by sigma."""
    mean, stderr = coverage_curves(m_max, sigmas, trials, error_mode, seed, jobs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "sigma", "coverage", "stderr"])
    for s, sigma in enumerate(np.atleast_1d(sigmas)):
        for c in range(m_max - 1):
            w.writerow([c + 2, repr(float(sigma)), repr(float(mean[s, c])), repr(float(stderr[s, c]))])
    return buf.getvalue()
