import math

import numpy as np
import pytest
from scipy import integrate

from haardial.errors import DegenerateInputError, DomainError, ShapeError
from haardial.linalg import batch_unitarity_defect
from haardial.sampler import sample_unitaries
from haardial.verify import (
    EnsembleReport,
    JacobianPoint,
    TestRecord,
    abs_det,
    cartesian_from_physical,
    entry_cdf,
    entry_density_test,
    entry_moment_test,
    haar_oracle_ensemble,
    haar_oracle_sample,
    hessenberg_reduction,
    hessenberg_reduction_check,
    jacobian_analytic,
    jacobian_closed_form,
    jacobian_numeric,
    ks_critical,
    ks_critical_two,
    ks_one_sample,
    ks_two_sample,
    left_invariance_rows,
    pdf_normalization_check,
    random_jacobian_point,
    run_battery,
    trace_moment_test,
    unit_vector_pdf,
)


@pytest.fixture(scope="module")
def oracle4():
    return haar_oracle_ensemble(4, 20_000, seed=21)


def test_ks_basics():
    assert ks_one_sample(np.full(20, 0.5), lambda x: x) >= 0.5
    assert ks_two_sample(np.zeros(30), np.ones(30)) == 1.0
    with pytest.raises(DomainError):
        ks_one_sample([], lambda x: x)
    assert ks_critical(10_000) == pytest.approx(0.0163)
    assert ks_critical_two(100, 100) == pytest.approx(1.63 * math.sqrt(0.02))
    # exact value on a hand-checkable sample
    assert ks_one_sample([0.1, 0.2, 0.9], lambda x: x) == pytest.approx(2 / 3 - 0.2)


def test_ks_matches_scipy():
    from scipy import stats

    rng = np.random.default_rng(0)
    x, y = rng.normal(size=500), rng.normal(0.1, size=700)
    assert ks_one_sample(x, stats.norm.cdf) == pytest.approx(stats.kstest(x, "norm").statistic)
    assert ks_two_sample(x, y) == pytest.approx(stats.ks_2samp(x, y).statistic)


def test_oracle_m1_uniform_phase():
    u = haar_oracle_ensemble(1, 100_000, seed=3)[:, 0, 0]
    assert np.allclose(np.abs(u), 1.0)
    ang = np.mod(np.angle(u), 2 * np.pi)
    assert ks_one_sample(ang, lambda x: x / (2 * np.pi)) < ks_critical(u.size)


def test_oracle_single_and_unitary(oracle4):
    u = haar_oracle_sample(5, np.random.default_rng(1))
    assert batch_unitarity_defect(u[None])[0] < 1e-12
    assert batch_unitarity_defect(oracle4).max() < 1e-12
    with pytest.raises(DomainError):
        haar_oracle_sample(0, np.random.default_rng(0))


def test_oracle_jobs_independent():
    a = haar_oracle_ensemble(3, 9000, seed=4)
    b = haar_oracle_ensemble(3, 9000, seed=4, jobs=3)
    assert np.array_equal(a, b)


def test_oracle_entries(oracle4):
    rows = entry_density_test(oracle4, 4, label="oracle")
    assert all(r.passed for r in rows)
    rec, table = entry_moment_test(oracle4, 4)
    assert rec.passed and np.allclose(table, 0.25, atol=0.01)


def test_oracle_trace_moment():
    ens = haar_oracle_ensemble(4, 100_000, seed=8)
    assert trace_moment_test(ens).passed


def test_oracle_left_invariance(oracle4):
    v = haar_oracle_sample(4, np.random.default_rng(77))
    assert all(r.passed for r in left_invariance_rows(oracle4, v))


def test_m2_entry_uniform():
    ens = sample_unitaries(2, "triangular-adjacent", "reflectivity", 2, 20_000)
    x = np.abs(ens[:, 0, 0]) ** 2
    assert ks_one_sample(x, lambda t: t) < ks_critical(x.size)
    assert np.allclose(entry_cdf(2)(np.array([0.3])), 0.3)


def test_mesh_ensemble_vs_oracle(oracle4):
    ens = sample_unitaries(4, "triangular-adjacent", "reflectivity", 12, 20_000)
    assert all(r.passed for r in entry_density_test(ens, 4, reference=oracle4))


def test_trace_identity_fails():
    rec = trace_moment_test(np.broadcast_to(np.eye(4), (1000, 4, 4)))
    assert not rec.passed and rec.statistic == pytest.approx(15.0)


def test_rectangular_six_trace():
    ens = sample_unitaries(6, "rectangular", "reflectivity", 13, 100_000)
    assert trace_moment_test(ens).passed


def test_shape_error():
    with pytest.raises(ShapeError):
        entry_density_test(np.zeros((5, 3, 3)), 4)


def test_record_and_report():
    r = TestRecord("x", 0.5, 0.5)
    assert r.passed
    with pytest.raises(ValueError):
        TestRecord("y", float("nan"), 1.0)
    rep = EnsembleReport(2, 10, [r, TestRecord("z", 2.0, 1.0)])
    assert not rep.passed
    text = rep.to_text()
    assert "FAIL" in text and text.splitlines()[-1] == "overall: FAIL"


def test_battery_deterministic_and_biased():
    a = run_battery(3, 2000, seed=5)
    b = run_battery(3, 2000, seed=5, jobs=2)
    assert a.to_json() == b.to_json()

    def zero(values, phis, terminal):
        return values, 0 * phis, 0 * terminal

    assert not run_battery(3, 2000, seed=5, param_hook=zero).passed


# -- Jacobian ----------------------------------------------------------------


def test_cartesian_map():
    assert np.allclose(cartesian_from_physical([2.0, 0.25]), [0.5, 1.5])
    x = cartesian_from_physical([1.0, 0.3, 0.6, 0.2])
    assert x.sum() == pytest.approx(1.0)


def test_closed_form_examples():
    assert jacobian_closed_form(JacobianPoint((3.0, 0.4))) == pytest.approx(3.0)
    assert abs_det(jacobian_numeric([3.0, 0.4])) == pytest.approx(3.0, rel=1e-9)
    p = JacobianPoint((1.0, 1e-9, 1e-9, 1e-9))
    assert jacobian_closed_form(p) == pytest.approx(1.0, rel=1e-8)


def test_closed_form_frozen():
    # |det J| at n=3, r=(2, 0.5, 0.25): 2^2 * (1-0.5)^1 * (1-0.25)^0 = 2
    p = JacobianPoint((2.0, 0.5, 0.25))
    assert jacobian_closed_form(p) == 2.0
    assert abs(np.linalg.det(jacobian_analytic(p.r))) == pytest.approx(2.0, rel=1e-14)


@pytest.mark.parametrize("n", range(2, 9))
def test_closed_form_vs_numeric(n):
    rng = np.random.default_rng(n)
    for _ in range(30):
        p = random_jacobian_point(n, rng)
        num = jacobian_numeric(p.r)
        assert np.allclose(num, jacobian_analytic(p.r), atol=1e-8)
        assert abs(abs_det(num) - jacobian_closed_form(p)) / jacobian_closed_form(p) < 1e-5


def test_abs_det():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(6, 6))
    assert abs_det(a) == pytest.approx(abs(np.linalg.det(a)), rel=1e-12)
    assert abs_det(np.zeros((3, 3))) == 0.0


def test_jacobian_is_lower_hessenberg():
    j = jacobian_analytic([1.5, 0.2, 0.7, 0.4, 0.9])
    assert np.all(np.triu(j, 2) == 0)


def test_hessenberg_reduction():
    assert hessenberg_reduction_check(JacobianPoint((1.7, 0.3)))
    rng = np.random.default_rng(5)
    assert hessenberg_reduction_check(random_jacobian_point(5, rng))
    hist, shifted = hessenberg_reduction(JacobianPoint((1.0, 0.5, 0.5)))
    assert np.allclose(hist[-1], [0, 0, 1])
    assert np.allclose(np.triu(shifted, 1), 0)


def test_hessenberg_zero_pivot():
    with pytest.raises(DegenerateInputError):
        hessenberg_reduction(JacobianPoint((1.0, 0.5)), jacobian=np.array([[0.5, 0.0], [0.5, 0.0]]))


def test_point_domain():
    with pytest.raises(DomainError):
        JacobianPoint((0.0, 0.5))
    with pytest.raises(DomainError):
        JacobianPoint((1.0, 1.0))


# -- normalisation ---------------------------------------------------------------


def test_normalization_all_pass():
    rows = pdf_normalization_check(20)
    assert rows and all(r.passed for r in rows)
    assert sum("unit-vector" in r.name for r in rows) == 7


def test_phase_pdf_example():
    val, _ = integrate.quad(lambda t: 3 * math.cos(t / 2) * math.sin(t / 2) ** 5, 0, math.pi)
    assert val == pytest.approx(1.0, abs=1e-12)


def test_unit_vector_pdf_n4():
    # 3! * int (1-r1)^2 (1-r2) dr = 6 * 1/3 * 1/2 = 1
    val, _ = integrate.nquad(lambda a, b, c: unit_vector_pdf([a, b, c]), [[0, 1]] * 3)
    assert val == pytest.approx(1.0, abs=1e-7)
    with pytest.raises(DomainError):
        pdf_normalization_check(1)
