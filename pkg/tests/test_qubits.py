import numpy as np
import pytest

from haardial.circuit import build_unitary, component_gate, embed_two_mode
from haardial.errors import DomainError, ShapeError, ValidationError
from haardial.qubits import (
    GateList,
    QubitGate,
    bits_to_mode,
    compile_circuit,
    compile_component,
    equal_up_to_global_phase,
    gate_unitary,
    gates_to_unitary,
    mode_to_bits,
    routing_moves,
)
from haardial.sampler import sample_circuit

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def _component_matrix(a, b, theta, phi, p, convention="mzi-beamsplitter"):
    m = 1 << p
    e = embed_two_mode(component_gate(theta, convention), a, b, m)
    d = np.eye(m, dtype=complex)
    d[a, a] = np.exp(1j * phi)
    return d @ e


def test_mode_to_bits():
    assert mode_to_bits(0, 3) == "000"
    assert mode_to_bits(5, 3) == "101"
    for p in range(1, 7):
        labels = {mode_to_bits(j, p) for j in range(1 << p)}
        assert len(labels) == 1 << p
        assert all(bits_to_mode(mode_to_bits(j, p)) == j for j in range(1 << p))
    with pytest.raises(DomainError):
        mode_to_bits(8, 3)


def test_gate_unitary_examples():
    assert np.array_equal(gates_to_unitary(GateList(2, [])), np.eye(4))
    u = gates_to_unitary(GateList(1, [QubitGate("PHI", 0, (), 0.4)]))
    assert np.allclose(u, np.diag([np.exp(0.4j), np.exp(-0.4j)]))
    u = gates_to_unitary(GateList(1, [QubitGate("PHIBAR", 0, (), 0.4)]))
    assert np.allclose(u, np.diag([np.exp(-0.4j), np.exp(0.4j)]))
    cnot = gates_to_unitary(GateList(2, [QubitGate("X", 1, ((0, 1),))]))
    assert np.array_equal(cnot, np.eye(4)[[0, 1, 3, 2]])
    # control on value 0
    u = gate_unitary(QubitGate("X", 0, ((1, 0),)), 2)
    assert np.array_equal(u, np.eye(4)[[2, 1, 0, 3]])


def test_gate_validation():
    with pytest.raises(ValidationError):
        QubitGate("H", 0, ((0, 1),))
    with pytest.raises(ValidationError):
        QubitGate("X", 0, ((1, 1), (1, 0)))
    with pytest.raises(ValidationError):
        QubitGate("PHI", 0)
    with pytest.raises(ValidationError):
        QubitGate("H", 0, (), 0.3)
    with pytest.raises(ValidationError):
        QubitGate("Y", 0)
    with pytest.raises(ValidationError):
        GateList(2, [QubitGate("H", 2)]).validate()


def test_equal_up_to_global_phase():
    rng = np.random.default_rng(0)
    u = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    for alpha in (0.0, 1.0, -2.5, np.pi):
        assert equal_up_to_global_phase(u, np.exp(1j * alpha) * u)
    assert not equal_up_to_global_phase(np.eye(2), np.array([[0, 1], [1, 0]]))
    with pytest.raises(ShapeError):
        equal_up_to_global_phase(np.eye(2), np.eye(3))


def test_single_qubit_mzi():
    gates = compile_component(0, 1, 0.9, 0.0, 1)
    assert [g.kind for g in gates] == ["H", "PHI", "H"]
    u = gates_to_unitary(GateList(1, gates))
    assert equal_up_to_global_phase(u, H @ np.diag([np.exp(0.9j), 1]) @ H)
    gates = compile_component(0, 1, 0.9, 1.3, 1)
    assert [g.kind for g in gates] == ["H", "PHI", "H", "PHI"]


def test_adjacent_pair_two_qubits():
    assert routing_moves(2, 3, 2) == []
    gates = compile_component(2, 3, 0.7, 0.0, 2)
    # the MZI itself; later gates fix the relative phase of the pair
    assert [g.kind for g in gates[:3]] == ["H", "PHI", "H"]
    assert gates[1].controls == ((0, 1),) and gates[1].target == 1
    u = gates_to_unitary(GateList(2, gates))
    assert equal_up_to_global_phase(u, _component_matrix(2, 3, 0.7, 0.0, 2))


def test_far_pair_needs_routing():
    gates = compile_component(3, 4, 1.9, 0.6, 3)
    assert any(g.kind == "X" for g in gates)
    u = gates_to_unitary(GateList(3, gates))
    assert equal_up_to_global_phase(u, _component_matrix(3, 4, 1.9, 0.6, 3))


@pytest.mark.parametrize("p", [2, 3, 4])
def test_routing_count_and_all_pairs(p):
    rng = np.random.default_rng(p)
    m = 1 << p
    for a in range(m):
        for b in range(m):
            if a == b:
                continue
            moves = routing_moves(a, b, p)
            assert len(moves) == bin(b ^ a ^ 1).count("1")
            perm = gates_to_unitary(GateList(p, moves))
            assert perm[a ^ 1, b] == 1 and perm[a, a] == 1
            if p < 4:
                th, ph = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
                conv = ("mzi-beamsplitter", "mzi-directional-coupler")[(a + b) % 2]
                u = gates_to_unitary(GateList(p, compile_component(a, b, th, ph, p, conv)))
                assert equal_up_to_global_phase(u, _component_matrix(a, b, th, ph, p, conv))


def test_component_gate_counts_deterministic():
    a = [(g.kind, g.target, g.controls) for g in compile_component(1, 6, 0.4, 0.2, 3)]
    b = [(g.kind, g.target, g.controls) for g in compile_component(1, 6, 2.4, 5.2, 3)]
    assert a == b
    assert len(routing_moves(1, 6, 3)) == 2


def test_component_errors():
    with pytest.raises(DomainError):
        compile_component(2, 2, 0.1, 0.1, 2)
    with pytest.raises(DomainError):
        compile_component(0, 1, 0.1, 0.1, 1, "reflectivity")


@pytest.mark.parametrize("p", [1, 2, 3])
@pytest.mark.parametrize("scheme", ["triangular-adjacent", "triangular-original", "rectangular"])
def test_round_trip(p, scheme):
    for k in range(10):
        conv = ("mzi-beamsplitter", "mzi-directional-coupler")[k % 2]
        c = sample_circuit(1 << p, scheme, conv, seed=31, index=k)
        gl = compile_circuit(c)
        gl.validate()
        assert equal_up_to_global_phase(gates_to_unitary(gl), build_unitary(c), 1e-10)


def test_compile_rejects():
    with pytest.raises(DomainError):
        compile_circuit(sample_circuit(6, "rectangular", "mzi-beamsplitter", seed=1))
    with pytest.raises(DomainError):
        compile_circuit(sample_circuit(4, "rectangular", "reflectivity", seed=1))


def test_gate_list_json():
    gl = compile_circuit(sample_circuit(4, "rectangular", "mzi-beamsplitter", seed=2))
    text = gl.to_json()
    back = GateList.from_json(text)
    assert back.gates == gl.gates and back.to_json() == text
    import json

    d = json.loads(text)
    assert d["qubits"] == 2
    assert set(d["gates"][0]) == {"kind", "target", "controls", "phi"}
    assert all(g["phi"] is None for g in d["gates"] if g["kind"] in ("H", "X"))
