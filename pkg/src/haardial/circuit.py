"""Mesh circuits and their unitaries.

Three mesh schemes are supported:

``triangular-adjacent``
    Block ``R_n`` is a chain of beamsplitters on neighbouring modes
    ``(m-n, m-n+1), (m-n+1, m-n+2), ...``.
``triangular-original``
    Block ``R_n`` couples mode ``m-n`` in turn with each later mode.
``rectangular``
    The compact mesh: ``m`` columns of beamsplitters on alternating
    neighbouring pairs; each block is one down-going diagonal.

Every scheme is synthesised through a *program*: an ordered list of
operations on mode pairs (``a != b``) or single modes (``a == b``). The
same program feeds the batched kernels and the qubit compiler, so there is
exactly one definition of which operation happens where.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _backend
from .errors import DomainError, ShapeError, ValidationError

TWO_PI = 2.0 * np.pi


class Scheme(str, enum.Enum):
    TRIANGULAR_ADJACENT = "triangular-adjacent"
    TRIANGULAR_ORIGINAL = "triangular-original"
    RECTANGULAR = "rectangular"


class Convention(str, enum.Enum):
    REFLECTIVITY = "reflectivity"
    MZI_BEAMSPLITTER = "mzi-beamsplitter"
    MZI_DIRECTIONAL_COUPLER = "mzi-directional-coupler"

    @property
    def is_mzi(self) -> bool:
        return self is not Convention.REFLECTIVITY

    @property
    def upper(self) -> float:
        return 1.0 if self is Convention.REFLECTIVITY else np.pi


@dataclass(frozen=True)
class ComponentParam:
    """One beamsplitter or MZI: block ``n``, index ``i`` within the block,
    its reflectivity or internal phase ``value``, and its phase shifter ``phi``."""

    n: int
    i: int
    value: float
    phi: float

    def validate(self, convention: Convention) -> None:
        convention = Convention(convention)
        if not 1 <= self.i < self.n:
            raise DomainError(f"component index i={self.i} outside [1, {self.n - 1}]")
        if not 0.0 <= self.value <= convention.upper:
            raise DomainError(
                f"value {self.value} outside [0, {convention.upper}] for {convention.value}"
            )
        if not 0.0 <= self.phi < TWO_PI:
            raise DomainError(f"phase {self.phi} outside [0, 2pi)")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class CircuitSpec:
    """A complete mesh configuration with ``m**2`` real parameters.

    ``components`` are stored in canonical order (block ``n`` ascending,
    then index ``i`` ascending). ``terminal_phases[n - 1]`` is the residual
    phase of block ``n``.
    """

    modes: int
    scheme: Scheme
    convention: Convention
    components: tuple = ()
    terminal_phases: tuple = ()
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "convention", Convention(self.convention))
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "terminal_phases", tuple(float(p) for p in self.terminal_phases))

    def validate(self) -> None:
        m = self.modes
        if m < 1:
            raise ValidationError(f"modes must be >= 1, got {m}")
        if len(self.components) != m * (m - 1) // 2:
            raise ValidationError(
                f"{len(self.components)} components, expected {m * (m - 1) // 2}"
            )
        if len(self.terminal_phases) != m:
            raise ValidationError(f"{len(self.terminal_phases)} terminal phases, expected {m}")
        labels = [(c.n, c.i) for c in self.components]
        if labels != component_labels(m):
            raise ValidationError("components are not in canonical (n, i) order")
        try:
            for c in self.components:
                c.validate(self.convention)
        except DomainError as exc:
            raise ValidationError(str(exc)) from exc
        for p in self.terminal_phases:
            if not 0.0 <= p < TWO_PI:
                raise ValidationError(f"terminal phase {p} outside [0, 2pi)")

    @property
    def values(self) -> np.ndarray:
        return np.array([c.value for c in self.components], dtype=np.float64)

    @property
    def phis(self) -> np.ndarray:
        return np.array([c.phi for c in self.components], dtype=np.float64)

    def to_json(self) -> str:
        comps = ", ".join(
            f'{{"n": {c.n}, "i": {c.i}, "value": {_fmt(c.value)}, "phi": {_fmt(c.phi)}}}'
            for c in self.components
        )
        phases = ", ".join(_fmt(p) for p in self.terminal_phases)
        seed = "null" if self.seed is None else str(int(self.seed))
        return (
            f'{{"modes": {self.modes}, "scheme": "{self.scheme.value}", '
            f'"convention": "{self.convention.value}", "seed": {seed}, '
            f'"components": [{comps}], "terminal_phases": [{phases}]}}'
        )

    @classmethod
    def from_dict(cls, d: dict) -> "CircuitSpec":
        try:
            comps = tuple(
                ComponentParam(int(c["n"]), int(c["i"]), float(c["value"]), float(c["phi"]))
                for c in d["components"]
            )
            spec = cls(
                modes=int(d["modes"]),
                scheme=Scheme(d["scheme"]),
                convention=Convention(d["convention"]),
                components=comps,
                terminal_phases=tuple(float(p) for p in d["terminal_phases"]),
                seed=None if d.get("seed") is None else int(d["seed"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed circuit record: {exc}") from exc
        spec.validate()
        return spec

    @classmethod
    def from_json(cls, text: str) -> "CircuitSpec":
        return cls.from_dict(json.loads(text))


@lru_cache(maxsize=None)
def _labels(m: int) -> tuple:
    return tuple((n, i) for n in range(2, m + 1) for i in range(1, n))


def component_labels(m: int) -> list:
    """Canonical ``(n, i)`` order of the ``m(m-1)/2`` components."""
    return list(_labels(m))


def clements_sequence(n: int, m: int) -> list:
    """Index sequence enumerating the beamsplitters of rectangular block ``n``.

    For even ``m``: odd indices descending, then even ascending. For odd
    ``m`` the parities swap. ``clements_sequence(6, 6) == [5, 3, 1, 2, 4]``.
    """
    if not 2 <= n <= m:
        raise DomainError(f"need 2 <= n <= m, got n={n}, m={m}")
    lead = 1 if m % 2 == 0 else 0
    head = [k for k in range(n - 1, 0, -1) if k % 2 == lead]
    tail = [k for k in range(1, n) if k % 2 != lead]
    return head + tail


@lru_cache(maxsize=None)
def _rect_positions(m: int) -> tuple:
    # (n, t) -> (x, y): column x in [0, m), pair (y, y+1); t counts down the diagonal
    out = []
    for x in range(m):
        for y in range(m - 1):
            c = x - y
            if c % 2:
                continue
            if c <= 0:
                n, t = m + c, x + 1
            else:
                n, t = m - c + 1, y + 1
            out.append(((n, t), (x, y)))
    return tuple(out)


def clements_layout(m: int) -> dict:
    """Mesh position of every rectangular component.

    Returns ``{(n, i): (row, column)}`` with 1-based rows and columns; row
    ``k`` couples modes ``k-1`` and ``k`` and columns run in temporal order.
    """
    if m < 2:
        raise DomainError(f"clements_layout needs m >= 2, got {m}")
    return {label: (y + 1, x + 1) for label, (x, y) in _rect_positions(m)}


def marginal_exponent(n: int, i: int, m: int, scheme) -> int:
    """``k`` such that the component's reflectivity has density ``k (1-r)^(k-1)``.

    For ``triangular-original`` this is the density of ``1 - r``.
    """
    if Scheme(scheme) is Scheme.RECTANGULAR:
        return n - clements_sequence(n, m)[i - 1]
    return n - i


# -- gates -------------------------------------------------------------------


def _gate_batch(values, convention: Convention) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    g = np.empty(values.shape + (2, 2), dtype=np.complex128)
    if convention is Convention.REFLECTIVITY:
        a = np.sqrt(values)
        b = np.sqrt(1.0 - values)
        g[..., 0, 0] = a
        g[..., 0, 1] = b
        g[..., 1, 0] = b
        g[..., 1, 1] = -a
        return g
    e = np.exp(1j * values)
    if convention is Convention.MZI_BEAMSPLITTER:
        # H diag(e^{i theta}, 1) H
        g[..., 0, 0] = (e + 1) / 2
        g[..., 0, 1] = (e - 1) / 2
        g[..., 1, 0] = (e - 1) / 2
        g[..., 1, 1] = (e + 1) / 2
    else:
        # D diag(e^{i theta}, 1) D with D = (I + i sigma_x)/sqrt(2)
        g[..., 0, 0] = (e - 1) / 2
        g[..., 0, 1] = 1j * (e + 1) / 2
        g[..., 1, 0] = 1j * (e + 1) / 2
        g[..., 1, 1] = (1 - e) / 2
    return g


def component_gate(value: float, convention) -> np.ndarray:
    """The 2x2 transfer matrix of one beamsplitter or MZI (no phase shifter).

    ``reflectivity``: ``[[sqrt r, sqrt(1-r)], [sqrt(1-r), -sqrt r]]``.
    ``mzi-beamsplitter``: ``H diag(e^{i theta}, 1) H``, reflectivity ``cos^2(theta/2)``.
    ``mzi-directional-coupler``: ``D diag(e^{i theta}, 1) D``, reflectivity ``sin^2(theta/2)``.
    """
    convention = Convention(convention)
    if isinstance(value, ComponentParam):
        value.validate(convention)
        value = value.value
    elif not 0.0 <= value <= convention.upper:
        raise DomainError(f"value {value} outside [0, {convention.upper}]")
    return _gate_batch(float(value), convention)


def embed_two_mode(gate, mode_a: int, mode_b: int, m: int) -> np.ndarray:
    """Identity on ``m`` modes except the ``(mode_a, mode_b)`` sub-block."""
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (2, 2):
        raise ShapeError(f"gate must be 2x2, got {gate.shape}")
    if mode_a == mode_b or not (0 <= mode_a < m and 0 <= mode_b < m):
        raise ShapeError(f"invalid mode pair ({mode_a}, {mode_b}) for m={m}")
    out = np.eye(m, dtype=np.complex128)
    idx = [mode_a, mode_b]
    out[np.ix_(idx, idx)] = gate
    return out


# Where a component's phase shifter sits relative to its 2x2 gate.
_OUT_UPPER, _OUT_LOWER, _IN_UPPER = 0, 1, 2


@dataclass(frozen=True)
class Program:
    """Ordered operations realising one scheme on ``m`` modes.

    ``ops[k] = (a, b)``; ``slots[k]`` is a component index when ``a != b``
    and a terminal-phase index when ``a == b``.
    """

    m: int
    scheme: Scheme
    ops: np.ndarray
    slots: np.ndarray
    phase_side: int
    comp_ops: np.ndarray = field(repr=False)
    phase_ops: np.ndarray = field(repr=False)


def _block_ops(n: int, m: int, scheme: Scheme):
    """Pair ops (a, b, label) and the terminal mode for one block."""
    j0 = m - n
    if scheme is Scheme.TRIANGULAR_ADJACENT:
        pairs = [(j0 + i - 1, j0 + i, (n, i)) for i in range(1, n)]
        return pairs, m - 1
    if scheme is Scheme.TRIANGULAR_ORIGINAL:
        pairs = [(j0, j0 + k, (n, k)) for k in range(1, n)]
        return pairs, j0
    pos = dict(_rect_positions(m))
    pairs = []
    for t in range(1, n):
        _, y = pos[(n, t)]
        pairs.append((y, y + 1, (n, t)))
    return pairs, m - n


@lru_cache(maxsize=None)
def circuit_program(m: int, scheme) -> Program:
    scheme = Scheme(scheme)
    index = {label: k for k, label in enumerate(_labels(m))}
    ops, slots = [], []
    if scheme is Scheme.RECTANGULAR:
        for (n, t), (x, y) in sorted(_rect_positions(m), key=lambda kv: kv[1]):
            ops.append((y, y + 1))
            slots.append(index[(n, t)])
        for n in range(1, m + 1):
            ops.append((m - n, m - n))
            slots.append(n - 1)
        side = _IN_UPPER
    else:
        for n in range(1, m + 1):
            pairs, term = _block_ops(n, m, scheme)
            for a, b, label in pairs:
                ops.append((a, b))
                slots.append(index[label])
            ops.append((term, term))
            slots.append(n - 1)
        side = _OUT_UPPER if scheme is Scheme.TRIANGULAR_ADJACENT else _OUT_LOWER
    ops = np.array(ops, dtype=np.int64).reshape(-1, 2)
    slots = np.array(slots, dtype=np.int64)
    single = ops[:, 0] == ops[:, 1]
    return Program(
        m=m,
        scheme=scheme,
        ops=ops,
        slots=slots,
        phase_side=side,
        comp_ops=np.flatnonzero(~single),
        phase_ops=np.flatnonzero(single),
    )


def _dress(g: np.ndarray, phase: np.ndarray, side: int) -> np.ndarray:
    """Fold a phase shifter into a stack of 2x2 gates."""
    g = g.copy()
    if side == _OUT_UPPER:
        g[..., 0, :] *= phase[..., None]
    elif side == _OUT_LOWER:
        g[..., 1, :] *= phase[..., None]
    else:
        g[..., :, 0] *= phase[..., None]
    return g


def program_gates(program: Program, convention, values, phis, terminal) -> np.ndarray:
    """Per-op 2x2 matrices for a batch of parameter sets, shape ``(B, K, 2, 2)``."""
    convention = Convention(convention)
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    phis = np.atleast_2d(np.asarray(phis, dtype=np.float64))
    terminal = np.atleast_2d(np.asarray(terminal, dtype=np.float64))
    nb = terminal.shape[0]
    gates = np.zeros((nb, program.ops.shape[0], 2, 2), dtype=np.complex128)
    ci = program.comp_ops
    if ci.size:
        slots = program.slots[ci]
        base = _gate_batch(values[:, slots], convention)
        gates[:, ci] = _dress(base, np.exp(1j * phis[:, slots]), program.phase_side)
    pi = program.phase_ops
    gates[:, pi, 0, 0] = np.exp(1j * terminal[:, program.slots[pi]])
    return gates


def synthesize(m: int, scheme, convention, values, phis, terminal) -> np.ndarray:
    """Batched unitary synthesis, returns shape ``(B, m, m)``.

    ``values`` and ``phis`` have shape ``(B, m(m-1)/2)`` in canonical
    component order; ``terminal`` has shape ``(B, m)``.
    """
    program = circuit_program(m, scheme)
    gates = program_gates(program, convention, values, phis, terminal)
    nb = gates.shape[0]
    u = np.zeros((nb, m, m), dtype=np.complex128)
    u[:, np.arange(m), np.arange(m)] = 1.0
    return _backend.apply_program(u, program.ops, gates)


def build_unitary(spec: CircuitSpec) -> np.ndarray:
    """The ``m x m`` unitary realised by a circuit.

    Triangular schemes apply ``R_1`` first and ``R_m`` last. The rectangular
    mesh is applied column by column, followed by the output phase screen
    formed from the terminal phases.
    """
    spec.validate()
    u = synthesize(
        spec.modes,
        spec.scheme,
        spec.convention,
        spec.values[None, :],
        spec.phis[None, :],
        np.array(spec.terminal_phases)[None, :],
    )
    return u[0]


def mode_ops(spec: CircuitSpec):
    """Yield ``(a, b, matrix)`` for every operation in program order.

    ``a == b`` marks a single-mode phase and ``matrix`` is then the scalar
    phase factor.
    """
    program = circuit_program(spec.modes, spec.scheme)
    gates = program_gates(
        program, spec.convention, spec.values, spec.phis, spec.terminal_phases
    )[0]
    for (a, b), g in zip(program.ops, gates):
        a, b = int(a), int(b)
        yield (a, b, g[0, 0]) if a == b else (a, b, g)


def build_block(n: int, params, phases, m: int, scheme, convention) -> np.ndarray:
    """The ``m x m`` matrix of block ``R_n``, built by direct embedding.

    ``params`` are the block's ``n - 1`` components in index order; each
    carries its own phase shifter. ``phases`` is either the block's residual
    phase alone (a scalar, or ``None`` to omit it) or a sequence of ``n``
    reals: the ``n - 1`` component phases, which replace those in
    ``params``, followed by the residual phase. The residual phase sits on
    mode ``m-1`` (triangular-adjacent) or ``m-n`` (triangular-original). For
    the rectangular scheme the residual phases form the output screen of
    the full mesh; here it is applied on mode ``m-n`` after the diagonal.

    For triangular-adjacent with reflectivities, ``R_n`` sends mode ``m-n``
    to the vector with components ``sqrt(x_i) e^{i phi_i}`` where
    ``x_i = r_{i+1} prod_{k<=i} (1 - r_k)`` and ``r_n = 1``.
    """
    scheme, convention = Scheme(scheme), Convention(convention)
    params = list(params)
    if not 1 <= n <= m:
        raise ShapeError(f"block n={n} outside [1, {m}]")
    if len(params) != n - 1:
        raise ShapeError(f"block {n} needs {n - 1} components, got {len(params)}")
    if [p.i for p in params] != list(range(1, n)) or any(p.n != n for p in params):
        raise ShapeError(f"components of block {n} must be labelled ({n}, 1..{n - 1})")
    terminal_phase = phases
    if phases is not None and np.ndim(phases) == 1:
        phases = [float(x) for x in phases]
        if len(phases) != n:
            raise ShapeError(f"block {n} needs {n} phases, got {len(phases)}")
        params = [ComponentParam(p.n, p.i, p.value, phi) for p, phi in zip(params, phases)]
        terminal_phase = phases[-1]
    side = {
        Scheme.TRIANGULAR_ADJACENT: _OUT_UPPER,
        Scheme.TRIANGULAR_ORIGINAL: _OUT_LOWER,
        Scheme.RECTANGULAR: _IN_UPPER,
    }[scheme]
    pairs, term = _block_ops(n, m, scheme)
    out = np.eye(m, dtype=np.complex128)
    for (a, b, (_, i)) in pairs:
        p = params[i - 1]
        g = _dress(component_gate(p, convention), np.exp(1j * np.array(p.phi)), side)
        out = embed_two_mode(g, a, b, m) @ out
    if terminal_phase is not None:
        out[term, :] *= np.exp(1j * terminal_phase)
    return out
