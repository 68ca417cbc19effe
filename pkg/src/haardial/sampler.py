"""Drawing mesh parameters whose circuits are Haar-random.

The reflectivity of component ``i`` in block ``n`` has density
``k (1 - r)^(k - 1)`` with ``k = n - i`` (triangular) or ``k = n - s(i)``
(rectangular, ``s = clements_sequence(n, m)``); every phase is uniform on
``[0, 2 pi)``. All draws are by closed-form inverse CDF.

Randomness comes from counter-based streams: the uniform behind any
parameter is a hash of ``(seed, circuit index, n, i, kind)``, so output does
not depend on sampling order, chunking or thread count.
"""
from __future__ import annotations

import os
import secrets
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .circuit import (
    TWO_PI,
    CircuitSpec,
    ComponentParam,
    Convention,
    Scheme,
    clements_sequence,
    component_labels,
    marginal_exponent,
    synthesize,
)
from .errors import DomainError

KIND_VALUE = 0
KIND_PHASE = 1
KIND_TERMINAL = 2

SEED_ENV = "HAAR_DIAL_SEED"
CHUNK = 4096
_MASK64 = (1 << 64) - 1
_BELOW_TWO_PI = np.nextafter(TWO_PI, 0.0)

__all__ = [
    "RngStream",
    "clements_sequence",
    "reflectivity_pdf",
    "reflectivity_cdf",
    "theta_pdf",
    "theta_cdf",
    "sample_reflectivity",
    "sample_theta",
    "sample_phase",
    "sample_parameters",
    "sample_circuit",
    "sample_unitaries",
    "resolve_seed",
]


def stream_tag(n: int, i: int, kind: int) -> int:
    return (int(n) << 32) | (int(i) << 8) | int(kind)


@dataclass(frozen=True)
class RngStream:
    """One independent uniform, identified by seed, circuit index and label."""

    seed: int
    n: int
    i: int
    kind: int
    circuit: int = 0

    @property
    def stream_id(self) -> tuple:
        return (self.n, self.i, self.kind)

    def uniform(self) -> float:
        u = _backend.stream_uniforms(
            self.seed & _MASK64,
            np.array([self.circuit], dtype=np.uint64),
            np.array([stream_tag(self.n, self.i, self.kind)], dtype=np.uint64),
        )
        return float(u[0, 0])


def resolve_seed(seed: int | None = None) -> int:
    """Explicit seed, else ``$HAAR_DIAL_SEED``, else a fresh random one."""
    if seed is not None:
        return int(seed) & _MASK64
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env, 0) & _MASK64
    return secrets.randbits(64)


def _check_index(n: int, i: int) -> int:
    if not 1 <= i < n:
        raise DomainError(f"need 1 <= i < n, got n={n}, i={i}")
    return n - i


def reflectivity_pdf(n: int, i: int, r):
    k = _check_index(n, i)
    r = np.asarray(r, dtype=np.float64)
    return k * (1.0 - r) ** (k - 1)


def reflectivity_cdf(n: int, i: int, r):
    k = _check_index(n, i)
    r = np.clip(np.asarray(r, dtype=np.float64), 0.0, 1.0)
    return 1.0 - (1.0 - r) ** k


def theta_pdf(n: int, i: int, theta, convention):
    """MZI phase density on ``[0, pi]``.

    Beamsplitter MZIs: ``k cos(t/2) sin(t/2)^(2k-1)``; directional-coupler
    MZIs swap sine and cosine.
    """
    k = _check_index(n, i)
    half = np.asarray(theta, dtype=np.float64) / 2.0
    c, s = np.cos(half), np.sin(half)
    if Convention(convention) is Convention.MZI_DIRECTIONAL_COUPLER:
        c, s = s, c
    return k * c * s ** (2 * k - 1)


def theta_cdf(n: int, i: int, theta, convention):
    k = _check_index(n, i)
    half = np.clip(np.asarray(theta, dtype=np.float64), 0.0, np.pi) / 2.0
    if Convention(convention) is Convention.MZI_DIRECTIONAL_COUPLER:
        return 1.0 - np.cos(half) ** (2 * k)
    return np.sin(half) ** (2 * k)


def _inverse(u, k, convention: Convention, mirrored: bool):
    """Inverse CDF for marginal exponent ``k`` (vectorised, increasing in ``u``).

    ``mirrored`` draws ``1 - r`` (or ``pi - theta``) instead, as used by the
    triangular-original scheme. Mirroring a beamsplitter-MZI angle gives the
    directional-coupler law and vice versa.
    """
    if convention is Convention.REFLECTIVITY:
        if mirrored:
            return u ** (1.0 / k)
        return -np.expm1(np.log1p(-u) / k)
    bs = (convention is Convention.MZI_BEAMSPLITTER) != mirrored
    if bs:
        return 2.0 * np.arcsin(u ** (0.5 / k))
    return 2.0 * np.arccos(np.exp(np.log1p(-u) * (0.5 / k)))


def _uniform_arg(rng) -> float:
    if isinstance(rng, RngStream):
        return rng.uniform()
    if isinstance(rng, np.random.Generator):
        u = rng.random()
        while u == 0.0:
            u = rng.random()
        return u
    u = float(rng)
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"uniform {u} outside [0, 1]")
    return u


def sample_reflectivity(n: int, i: int, rng) -> float:
    """``r = 1 - (1 - u)^(1/(n-i))``; ``rng`` is an RngStream, Generator or a raw uniform."""
    k = _check_index(n, i)
    return float(_inverse(_uniform_arg(rng), k, Convention.REFLECTIVITY, False))


def sample_theta(n: int, i: int, convention, rng) -> float:
    convention = Convention(convention)
    if not convention.is_mzi:
        raise DomainError("sample_theta needs an MZI convention")
    k = _check_index(n, i)
    return float(_inverse(_uniform_arg(rng), k, convention, False))


def sample_phase(rng) -> float:
    return float(min(TWO_PI * _uniform_arg(rng), _BELOW_TWO_PI))


def _exponents(m: int, scheme: Scheme) -> np.ndarray:
    return np.array(
        [marginal_exponent(n, i, m, scheme) for n, i in component_labels(m)], dtype=np.float64
    )


def _tags(m: int):
    labels = component_labels(m)
    value_tags = np.array([stream_tag(n, i, KIND_VALUE) for n, i in labels], dtype=np.uint64)
    phase_tags = np.array([stream_tag(n, i, KIND_PHASE) for n, i in labels], dtype=np.uint64)
    term_tags = np.array(
        [stream_tag(n, 0, KIND_TERMINAL) for n in range(1, m + 1)], dtype=np.uint64
    )
    return value_tags, phase_tags, term_tags


def sample_parameters(m: int, scheme, convention, seed: int, circuits):
    """Parameter arrays for the given circuit indices.

    Returns ``(values, phis, terminal)`` of shapes ``(C, m(m-1)/2)``,
    ``(C, m(m-1)/2)`` and ``(C, m)``.
    """
    if m < 1:
        raise DomainError(f"modes must be >= 1, got {m}")
    scheme, convention = Scheme(scheme), Convention(convention)
    circuits = np.asarray(circuits, dtype=np.uint64).ravel()
    seed = int(seed) & _MASK64
    value_tags, phase_tags, term_tags = _tags(m)
    u_val = _backend.stream_uniforms(seed, circuits, value_tags)
    u_phi = _backend.stream_uniforms(seed, circuits, phase_tags)
    u_term = _backend.stream_uniforms(seed, circuits, term_tags)
    mirrored = scheme is Scheme.TRIANGULAR_ORIGINAL
    values = _inverse(u_val, _exponents(m, scheme)[None, :], convention, mirrored)
    phis = np.minimum(TWO_PI * u_phi, _BELOW_TWO_PI)
    terminal = np.minimum(TWO_PI * u_term, _BELOW_TWO_PI)
    return values, phis, terminal


def sample_circuit(m: int, scheme, convention, seed: int | None = None, index: int = 0) -> CircuitSpec:
    """Draw one complete circuit; deterministic in ``(seed, index)``."""
    seed = resolve_seed(seed)
    scheme, convention = Scheme(scheme), Convention(convention)
    values, phis, terminal = sample_parameters(m, scheme, convention, seed, [index])
    comps = tuple(
        ComponentParam(n, i, float(v), float(p))
        for (n, i), v, p in zip(component_labels(m), values[0], phis[0])
    )
    return CircuitSpec(
        modes=m,
        scheme=scheme,
        convention=convention,
        components=comps,
        terminal_phases=tuple(float(t) for t in terminal[0]),
        seed=seed,
    )


def sample_unitaries(m: int, scheme, convention, seed: int, count: int,
                     start: int = 0, jobs: int = 1, param_hook=None) -> np.ndarray:
    """Synthesise ``count`` mesh-sampled unitaries for circuit indices ``start..``.

    Work is split into fixed-size chunks, so the result is independent of
    ``jobs``. ``param_hook(values, phis, terminal)`` may rewrite parameters
    before synthesis (used to inject deliberate bias in negative controls).
    """
    out = np.empty((count, m, m), dtype=np.complex128)

    def work(lo):
        hi = min(lo + CHUNK, count)
        idx = np.arange(start + lo, start + hi, dtype=np.uint64)
        params = sample_parameters(m, scheme, convention, seed, idx)
        if param_hook is not None:
            params = param_hook(*params)
        out[lo:hi] = synthesize(m, scheme, convention, *params)

    starts = range(0, count, CHUNK)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(work, starts))
    else:
        for lo in starts:
            work(lo)
    return out
