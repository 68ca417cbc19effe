"""Compile ``2^p``-mode circuits into ``p``-qubit gate lists.

Optical mode ``j`` is the computational basis state whose big-endian bits
spell ``j``; qubit 0 is the most significant bit. The gate set is the
Hadamard, multi-controlled NOT and multi-controlled phase gates
``PHI(phi) = diag(e^{i phi}, e^{-i phi})`` and ``PHIBAR = X PHI X``, with
every phase gate targeting the final qubit.

A two-mode operation on ``(a, b)`` is realised by moving ``b`` next to
``a`` (onto ``a`` with its final bit flipped) using multi-controlled NOTs,
applying ``PHI H PHI H PHI`` on the final qubit controlled on the shared
prefix, and undoing the moves. Those gates produce ``SU(2)`` blocks, so the
determinant phase of each operation is carried forward in a diagonal of
pending mode phases and emitted once, at the end, as a chain of pair
phases. Equivalence therefore holds up to a global phase.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import CircuitSpec, Convention, component_gate, mode_ops
from .errors import DomainError, ShapeError, ValidationError

KINDS = ("H", "X", "PHI", "PHIBAR")
ANGLE_EPS = 1e-15


@dataclass(frozen=True)
class QubitGate:
    kind: str
    target: int
    controls: tuple = ()
    phi: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple((int(q), int(v)) for q, v in self.controls))
        if self.kind not in KINDS:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        if (self.phi is None) == (self.kind in ("PHI", "PHIBAR")):
            raise ValidationError(f"{self.kind} gate: phi must be given iff the gate is a phase gate")
        qubits = [q for q, _ in self.controls]
        if len(set(qubits)) != len(qubits):
            raise ValidationError("control qubits must be distinct")
        if self.target in qubits:
            raise ValidationError("target is also a control")
        if any(v not in (0, 1) for _, v in self.controls):
            raise ValidationError("control values must be 0 or 1")

    def matrix(self) -> np.ndarray:
        """The 2x2 action on the target."""
        if self.kind == "H":
            return np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2.0)
        if self.kind == "X":
            return np.array([[0, 1], [1, 0]], dtype=np.complex128)
        s = 1.0 if self.kind == "PHI" else -1.0
        return np.diag([np.exp(1j * s * self.phi), np.exp(-1j * s * self.phi)])

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "target": self.target,
            "controls": [{"qubit": q, "value": v} for q, v in self.controls],
            "phi": None if self.phi is None else float(self.phi),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QubitGate":
        phi = d.get("phi")
        return cls(
            kind=d["kind"],
            target=int(d["target"]),
            controls=tuple((int(c["qubit"]), int(c["value"])) for c in d.get("controls", [])),
            phi=None if phi is None else float(phi),
        )


@dataclass
class GateList:
    p: int
    gates: list = field(default_factory=list)

    def validate(self) -> None:
        if self.p < 1:
            raise ValidationError("a gate list needs at least one qubit")
        for g in self.gates:
            if not 0 <= g.target < self.p or any(not 0 <= q < self.p for q, _ in g.controls):
                raise ValidationError(f"gate {g} has a qubit index outside 0..{self.p - 1}")

    def counts(self) -> dict:
        out = dict.fromkeys(KINDS, 0)
        for g in self.gates:
            out[g.kind] += 1
        return out

    def to_json(self) -> str:
        return json.dumps({"qubits": self.p, "gates": [g.to_dict() for g in self.gates]},
                          separators=(", ", ": "))

    @classmethod
    def from_json(cls, text: str) -> "GateList":
        d = json.loads(text)
        gl = cls(int(d["qubits"]), [QubitGate.from_dict(g) for g in d["gates"]])
        gl.validate()
        return gl


def mode_to_bits(mode: int, p: int) -> str:
    """Big-endian bit string of ``mode``; character ``q`` is qubit ``q``."""
    if p < 1 or not 0 <= mode < (1 << p):
        raise DomainError(f"mode {mode} does not fit in {p} qubits")
    return format(mode, f"0{p}b")


def bits_to_mode(bits: str) -> int:
    return int(bits, 2)


def _bit(mode: int, q: int, p: int) -> int:
    return (mode >> (p - 1 - q)) & 1


def _flip(mode: int, q: int, p: int) -> int:
    return mode ^ (1 << (p - 1 - q))


def _controls(mode: int, p: int, skip: int) -> tuple:
    return tuple((q, _bit(mode, q, p)) for q in range(p) if q != skip)


def routing_moves(mode_a: int, mode_b: int, p: int) -> list:
    """NOT gates moving ``mode_b`` onto ``mode_a ^ 1`` without touching ``mode_a``.

    Each gate flips one bit and is controlled on every other bit of the
    current position, so it swaps exactly two basis states. The final bit
    is fixed first, after which no intermediate state can coincide with
    ``mode_a``. The number of gates is the Hamming distance between
    ``mode_b`` and ``mode_a ^ 1``.
    """
    goal = mode_a ^ 1
    order = [p - 1] + list(range(p - 1))
    pos, moves = mode_b, []
    for q in order:
        if _bit(pos, q, p) != _bit(goal, q, p):
            moves.append(QubitGate("X", q, _controls(pos, p, q)))
            pos = _flip(pos, q, p)
    return moves


def _su2_angles(w: np.ndarray):
    """``(alpha, beta, gamma)`` with ``w = Z(alpha) H Z(beta) H Z(gamma)``, ``Z = PHI``."""
    a, b = w[0, 0], w[1, 0]
    beta = math.atan2(abs(b), abs(a))
    s = math.atan2(a.imag, a.real)  # alpha + gamma
    if abs(b) < 1e-300:
        return s, 0.0, 0.0
    d = math.atan2(b.imag, b.real) - math.pi / 2  # gamma - alpha
    return (s - d) / 2.0, beta, (s + d) / 2.0


def _pair_gates(w: np.ndarray, mode_a: int, mode_b: int, p: int) -> list:
    """Gates applying the ``SU(2)`` matrix ``w`` to modes ``(mode_a, mode_b)``."""
    moves = routing_moves(mode_a, mode_b, p)
    last = p - 1
    ctrl = _controls(mode_a, p, last)
    if _bit(mode_a, last, p):
        # the pair is (|..1>, |..0>): conjugating by X on the target turns
        # PHI into PHIBAR and leaves H PHI H unchanged
        outer = "PHIBAR"
    else:
        outer = "PHI"
    alpha, beta, gamma = _su2_angles(w)
    core = []
    for kind, angle in ((outer, gamma), ("H", None), ("PHI", beta), ("H", None), (outer, alpha)):
        if angle is None:
            core.append(QubitGate("H", last, ()))
        elif abs(angle) > ANGLE_EPS:
            core.append(QubitGate(kind, last, ctrl, angle))
    # drop an H pair left adjacent by a vanishing middle angle
    if abs(beta) <= ANGLE_EPS:
        core = [g for g in core if g.kind != "H"]
    return moves + core + moves[::-1]


def _diagonal_gates(delta: np.ndarray, p: int) -> list:
    """Realise ``diag(e^{i delta})`` up to global phase by pair phases on ``(j, j+1)``."""
    d = delta - delta.mean()
    c = np.cumsum(d)[:-1]
    out = []
    for j, angle in enumerate(c):
        if abs(angle) > ANGLE_EPS:
            w = np.diag([np.exp(1j * angle), np.exp(-1j * angle)])
            out.extend(_pair_gates(w, j, j + 1, p))
    return out


def _log2_exact(m: int) -> int:
    p = m.bit_length() - 1
    if m < 2 or (1 << p) != m:
        raise DomainError(f"mode count {m} is not a power of two >= 2")
    return p


def compile_ops(ops, m: int) -> GateList:
    """Compile ``(a, b, matrix | phase)`` operations (applied in order) on ``m`` modes."""
    p = _log2_exact(m)
    delta = np.zeros(m)
    gates = []
    for a, b, g in ops:
        a, b = int(a), int(b)
        if a == b:
            delta[a] += np.angle(g)
            continue
        g = np.asarray(g, dtype=np.complex128)
        if a > b:
            a, b = b, a
            g = g[::-1, ::-1]
        n = g @ np.diag(np.exp(1j * delta[[a, b]]))
        half = (np.angle(np.linalg.det(n))) / 2.0
        w = np.exp(-1j * half) * n
        gates.extend(_pair_gates(w, a, b, p))
        delta[a] = delta[b] = half
    gates.extend(_diagonal_gates(delta, p))
    gl = GateList(p, gates)
    gl.validate()
    return gl


def compile_component(mode_a: int, mode_b: int, theta: float, phi: float, p: int,
                      convention=Convention.MZI_BEAMSPLITTER) -> list:
    """Gate subsequence for an MZI on ``(mode_a, mode_b)`` followed by ``e^{i phi}`` on ``mode_a``."""
    convention = Convention(convention)
    if not convention.is_mzi:
        raise DomainError("compile_component needs an MZI convention")
    if mode_a == mode_b:
        raise DomainError("an MZI needs two distinct modes")
    m = 1 << p
    if not (0 <= mode_a < m and 0 <= mode_b < m):
        raise DomainError(f"modes ({mode_a}, {mode_b}) out of range for {p} qubits")
    g = component_gate(theta, convention)
    ops = [(mode_a, mode_b, g), (mode_a, mode_a, np.exp(1j * phi))]
    return compile_ops(ops, m).gates


def compile_circuit(c: CircuitSpec) -> GateList:
    """Gate list equal to ``build_unitary(c)`` up to global phase."""
    if not Convention(c.convention).is_mzi:
        raise DomainError("qubit compilation needs an MZI convention")
    _log2_exact(c.modes)
    return compile_ops(mode_ops(c), c.modes)


def gate_unitary(g: QubitGate, p: int) -> np.ndarray:
    m = 1 << p
    u = np.eye(m, dtype=np.complex128)
    mat = g.matrix()
    for s in range(m):
        if _bit(s, g.target, p) or any(_bit(s, q, p) != v for q, v in g.controls):
            continue
        t = _flip(s, g.target, p)
        u[np.ix_([s, t], [s, t])] = mat
    return u


def gates_to_unitary(g: GateList) -> np.ndarray:
    """Product of gate embeddings; the first gate acts first."""
    g.validate()
    m = 1 << g.p
    u = np.eye(m, dtype=np.complex128)
    for gate in g.gates:
        u = gate_unitary(gate, g.p) @ u
    return u


def equal_up_to_global_phase(a, b, tol: float = 1e-10) -> bool:
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise ShapeError(f"shapes differ: {a.shape} vs {b.shape}")
    if a.size == 0:
        return True
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[k]) == 0.0:
        return bool(np.max(np.abs(a)) <= tol)
    ratio = a[k] / b[k]
    c = ratio / abs(ratio) if ratio != 0 else 1.0
    return bool(np.max(np.abs(a - c * b)) <= tol)
