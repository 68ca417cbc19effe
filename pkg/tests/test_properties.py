import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from haardial.circuit import (
    CircuitSpec,
    build_unitary,
    clements_sequence,
    component_gate,
    marginal_exponent,
)
from haardial.coverage import coverage_factors, truncated_mass
from haardial.linalg import householder_qr, matrix_from_json, matrix_to_json, unitarity_defect
from haardial.qubits import compile_circuit, equal_up_to_global_phase, gates_to_unitary
from haardial.sampler import reflectivity_cdf, sample_circuit, sample_reflectivity, theta_cdf
from haardial.verify import (
    JacobianPoint,
    hessenberg_reduction_check,
    jacobian_analytic,
    jacobian_closed_form,
)

SCHEMES = st.sampled_from(["triangular-adjacent", "triangular-original", "rectangular"])
CONVS = st.sampled_from(["reflectivity", "mzi-beamsplitter", "mzi-directional-coupler"])
SEEDS = st.integers(0, 2**64 - 1)
unit = st.floats(1e-6, 1 - 1e-6)


@settings(max_examples=60, deadline=None)
@given(m=st.integers(1, 10), scheme=SCHEMES, conv=CONVS, seed=SEEDS, idx=st.integers(0, 2**32))
def test_sampled_circuits_unitary_and_round_trip(m, scheme, conv, seed, idx):
    c = sample_circuit(m, scheme, conv, seed, idx)
    c.validate()
    u = build_unitary(c)
    assert unitarity_defect(u) < 1e-10
    back = CircuitSpec.from_json(c.to_json())
    assert back.to_json() == c.to_json()
    assert np.array_equal(build_unitary(back), u)


@settings(max_examples=30, deadline=None)
@given(p=st.integers(1, 3), scheme=SCHEMES,
       conv=st.sampled_from(["mzi-beamsplitter", "mzi-directional-coupler"]), seed=SEEDS)
def test_qubit_round_trip(p, scheme, conv, seed):
    c = sample_circuit(1 << p, scheme, conv, seed)
    assert equal_up_to_global_phase(gates_to_unitary(compile_circuit(c)), build_unitary(c), 1e-10)


@given(n=st.integers(2, 64), extra=st.integers(0, 5))
def test_sequence_is_permutation(n, extra):
    s = clements_sequence(n, n + extra)
    assert sorted(s) == list(range(1, n))


@given(m=st.integers(2, 20))
def test_exponent_multiset_matches_triangular(m):
    rect = sorted(marginal_exponent(n, i, m, "rectangular") for n in range(2, m + 1) for i in range(1, n))
    tri = sorted(n - i for n in range(2, m + 1) for i in range(1, n))
    assert rect == tri


@given(n=st.integers(2, 12), u=unit)
def test_inverse_cdf(n, u):
    r = sample_reflectivity(n, 1, u)
    assert 0.0 <= r <= 1.0
    assert math.isclose(reflectivity_cdf(n, 1, r), u, rel_tol=1e-9)


@given(r=unit, conv=st.sampled_from(["mzi-beamsplitter", "mzi-directional-coupler"]))
def test_mzi_gate_unitary(r, conv):
    g = component_gate(r * math.pi, conv)
    assert unitarity_defect(g) < 1e-14
    assert unitarity_defect(component_gate(r, "reflectivity")) < 1e-14


@given(n=st.integers(2, 8), data=st.data())
def test_jacobian_identities(n, data):
    r0 = data.draw(st.floats(1e-3, 10.0))
    rest = data.draw(st.lists(st.floats(1e-3, 1 - 1e-3), min_size=n - 1, max_size=n - 1))
    p = JacobianPoint((r0, *rest))
    det = abs(np.linalg.det(jacobian_analytic(p.r)))
    assert math.isclose(det, jacobian_closed_form(p), rel_tol=1e-9)
    assert hessenberg_reduction_check(p)


@given(n=st.integers(2, 20), data=st.data())
def test_truncated_mass_bounds(n, data):
    i = data.draw(st.integers(1, n - 1))
    e1 = data.draw(st.floats(0, 0.49))
    e2 = data.draw(st.floats(0, 0.49))
    lo, hi = sorted((e1, e2))
    assert 0.0 <= truncated_mass(n, i, hi) <= truncated_mass(n, i, lo) <= 1.0


@given(m=st.integers(2, 12), e=st.floats(-0.1, 0.1))
def test_coverage_scheme_independent(m, e):
    a = coverage_factors(m, e, "rectangular")
    b = coverage_factors(m, e, "triangular-adjacent")
    assert math.fsum(a) == math.fsum(b) and sorted(a) == sorted(b)


@settings(deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32))
def test_qr_and_matrix_json(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = householder_qr(a)
    assert np.max(np.abs(q @ r - a)) < 1e-12
    assert np.array_equal(matrix_from_json(matrix_to_json(a)), a)
