"""Independent certification of the mesh-sampled ensembles.

Three kinds of check live here:

* a Ginibre-QR reference sampler (``haar_oracle_*``) that shares no code
  path with the mesh sampler apart from dense linear algebra;
* a Kolmogorov-Smirnov / moment battery comparing ensembles;
* the change-of-variables identities behind the marginal densities: the
  closed-form Jacobian determinant, the column reduction of the lower
  Hessenberg Jacobian, and quadrature normalisation of every density.

KS tests use the fixed alpha = 0.01 critical values ``1.63/sqrt(N)`` and
``1.63 sqrt((N1 + N2)/(N1 N2))``. For pooled matrix entries ``N`` is the
pooled count; within-matrix entries are negatively dependent, which makes
that threshold conservative.
"""
from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from .circuit import Convention, Scheme
from .errors import DegenerateInputError, DomainError, ShapeError
from .linalg import batch_householder_qr
from .sampler import CHUNK, sample_unitaries

KS_C_ALPHA = 1.63
Z_LIMIT = 5.0


# -- reference sampler --------------------------------------------------------


def _ginibre(m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    re = rng.standard_normal((count, m, m))
    im = rng.standard_normal((count, m, m))
    return (re + 1j * im) / np.sqrt(2.0)


def _qr_to_haar(z: np.ndarray) -> np.ndarray:
    q, r = batch_householder_qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def haar_oracle_sample(m: int, rng: np.random.Generator) -> np.ndarray:
    """One Haar unitary from QR of a Ginibre matrix with phase correction.

    ``Q`` is multiplied column-wise by ``R_ii/|R_ii|``, which is the same as
    dividing ``R`` by its diagonal phases so that ``R`` has a positive
    diagonal.
    """
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    return _qr_to_haar(_ginibre(m, 1, rng))[0]


def haar_oracle_ensemble(m: int, count: int, seed: int, jobs: int = 1) -> np.ndarray:
    """``count`` reference unitaries; chunk ``c`` draws from ``SeedSequence(seed, spawn_key=(c,))``."""
    out = np.empty((count, m, m), dtype=np.complex128)

    def work(c):
        lo, hi = c * CHUNK, min((c + 1) * CHUNK, count)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(c,)))
        out[lo:hi] = _qr_to_haar(_ginibre(m, hi - lo, rng))

    chunks = range((count + CHUNK - 1) // CHUNK)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(work, chunks))
    else:
        for c in chunks:
            work(c)
    return out


# -- KS statistics ------------------------------------------------------------


def ks_one_sample(samples, cdf) -> float:
    """Sup distance between the empirical CDF of ``samples`` and ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = x.size
    if n == 0:
        raise DomainError("ks_one_sample needs at least one sample")
    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_two_sample(x, y) -> float:
    x = np.sort(np.asarray(x, dtype=np.float64).ravel())
    y = np.sort(np.asarray(y, dtype=np.float64).ravel())
    if x.size == 0 or y.size == 0:
        raise DomainError("ks_two_sample needs non-empty samples")
    grid = np.concatenate([x, y])
    fx = np.searchsorted(x, grid, side="right") / x.size
    fy = np.searchsorted(y, grid, side="right") / y.size
    return float(np.max(np.abs(fx - fy)))


def ks_critical(n: int) -> float:
    return KS_C_ALPHA / math.sqrt(n)


def ks_critical_two(n1: int, n2: int) -> float:
    return KS_C_ALPHA * math.sqrt((n1 + n2) / (n1 * n2))


def entry_cdf(m: int):
    """CDF of ``|U_ij|^2`` for Haar ``U(m)``: ``1 - (1 - x)^(m-1)``."""
    return lambda x: 1.0 - (1.0 - np.clip(x, 0.0, 1.0)) ** (m - 1)


# -- reports ------------------------------------------------------------------


@dataclass
class TestRecord:
    __test__ = False  # not a pytest class

    name: str
    statistic: float
    threshold: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.statistic = float(self.statistic)
        self.threshold = float(self.threshold)
        if not math.isfinite(self.statistic):
            raise ValueError(f"{self.name}: non-finite statistic")
        self.passed = self.statistic <= self.threshold


@dataclass
class EnsembleReport:
    m: int
    sample_count: int
    records: list = field(default_factory=list)
    entry_moment_table: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "sample_count": self.sample_count,
            "passed": self.passed,
            "records": [asdict(r) for r in self.records],
            "entry_moment_table": self.entry_moment_table,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        """Aligned table rendered from the JSON form."""
        d = json.loads(self.to_json())
        width = max([len(r["name"]) for r in d["records"]] + [4])
        lines = [f"m={d['m']}  samples={d['sample_count']}",
                 f"{'test':<{width}}  {'statistic':>12}  {'threshold':>12}  result"]
        for r in d["records"]:
            verdict = "pass" if r["passed"] else "FAIL"
            lines.append(
                f"{r['name']:<{width}}  {r['statistic']:>12.6g}  {r['threshold']:>12.6g}  {verdict}"
            )
        lines.append("overall: " + ("pass" if d["passed"] else "FAIL"))
        return "\n".join(lines)


def _check_ensemble(ensemble, m: int) -> np.ndarray:
    ensemble = np.asarray(ensemble)
    if ensemble.ndim != 3 or ensemble.shape[1:] != (m, m):
        raise ShapeError(f"ensemble of shape {ensemble.shape} is not a stack of {m}x{m} matrices")
    return ensemble


def entry_density_test(ensemble, m: int, reference=None, label: str = "ensemble") -> list:
    """Pooled ``|U_ij|^2`` against ``1 - (1-x)^(m-1)``, and optionally
    against a reference ensemble (two-sample)."""
    ensemble = _check_ensemble(ensemble, m)
    pooled = np.abs(ensemble.reshape(len(ensemble), -1)) ** 2
    rows = [TestRecord(f"entry_density[{label}]", ks_one_sample(pooled, entry_cdf(m)),
                       ks_critical(pooled.size))]
    if reference is not None:
        reference = _check_ensemble(reference, m)
        ref = np.abs(reference.reshape(len(reference), -1)) ** 2
        rows.append(TestRecord(f"entry_density_vs_reference[{label}]",
                               ks_two_sample(pooled, ref), ks_critical_two(pooled.size, ref.size)))
    return rows


def entry_moment_test(ensemble, m: int, label: str = "ensemble"):
    """Largest z-score of ``E|U_ij|^2`` against ``1/m``; returns ``(record, table)``."""
    ensemble = _check_ensemble(ensemble, m)
    p = np.abs(ensemble) ** 2
    mean = p.mean(axis=0)
    se = p.std(axis=0, ddof=1) / math.sqrt(len(p))
    z = np.max(np.abs(mean - 1.0 / m) / se)
    return TestRecord(f"entry_moments[{label}]", z, Z_LIMIT), mean.tolist()


def trace_moment_test(ensemble, label: str = "ensemble") -> TestRecord:
    """``E|Tr U|^2 = 1``; statistic ``|mean - 1|``, threshold ``5 SE``."""
    ensemble = np.asarray(ensemble)
    t = np.abs(np.trace(ensemble, axis1=1, axis2=2)) ** 2
    se = t.std(ddof=1) / math.sqrt(len(t))
    # A deterministic ensemble has zero spread; keep the threshold positive.
    return TestRecord(f"trace_moment[{label}]", abs(t.mean() - 1.0), Z_LIMIT * max(se, 1e-12))


def _features(ensemble):
    flat = np.abs(ensemble.reshape(len(ensemble), -1)) ** 2
    return {
        "abs2_pooled": flat,
        "re_u00": ensemble[:, 0, 0].real,
        "im_u01": ensemble[:, 0, 1].imag if ensemble.shape[1] > 1 else ensemble[:, 0, 0].imag,
    }


def two_sample_rows(name_a: str, ens_a, name_b: str, ens_b) -> list:
    fa, fb = _features(np.asarray(ens_a)), _features(np.asarray(ens_b))
    rows = []
    for key in fa:
        a, b = fa[key], fb[key]
        rows.append(TestRecord(f"two_sample[{key}:{name_a}~{name_b}]",
                               ks_two_sample(a, b), ks_critical_two(a.size, b.size)))
    return rows


def left_invariance_rows(ensemble, v, label: str = "ensemble") -> list:
    """Compare ``(V U)_00`` on one half of the ensemble with ``U_00`` on the other."""
    ensemble = np.asarray(ensemble)
    half = len(ensemble) // 2
    vu = np.einsum("ij,bjk->bik", v, ensemble[:half])
    ref = ensemble[half:]
    rows = []
    for key, fn in (("re", np.real), ("abs2", lambda z: np.abs(z) ** 2)):
        a, b = fn(vu[:, 0, 0]), fn(ref[:, 0, 0])
        rows.append(TestRecord(f"left_invariance[{key}:{label}]",
                               ks_two_sample(a, b), ks_critical_two(a.size, b.size)))
    return rows


ALL_SCHEMES = tuple(s.value for s in Scheme)


def run_battery(m: int, samples: int, seed: int, schemes=ALL_SCHEMES,
                convention="reflectivity", jobs: int = 1, param_hook=None) -> EnsembleReport:
    """Full certification battery for mesh-sampled ensembles against the reference.

    Each mesh scheme and the reference get ``samples`` unitaries. Runs
    the pooled entry density test, per-entry second moments, the trace
    moment, left invariance under a fixed reference unitary, and pairwise
    two-sample tests across all ensembles.
    """
    if samples < 10:
        raise DomainError("battery needs at least 10 samples")
    ensembles = {"oracle": haar_oracle_ensemble(m, samples, seed ^ 0x5EED, jobs=jobs)}
    for k, scheme in enumerate(schemes):
        scheme = Scheme(scheme).value
        ensembles[scheme] = sample_unitaries(m, scheme, convention, seed + k, samples,
                                             jobs=jobs, param_hook=param_hook)
    v = haar_oracle_sample(m, np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(999,))))

    report = EnsembleReport(m=m, sample_count=samples)
    for label, ens in ensembles.items():
        report.records.extend(entry_density_test(ens, m, label=label))
        rec, table = entry_moment_test(ens, m, label=label)
        report.records.append(rec)
        if label == "oracle":
            report.entry_moment_table = table
        report.records.append(trace_moment_test(ens, label=label))
        if label != "oracle":
            report.records.extend(left_invariance_rows(ens, v, label=label))
    for (la, ea), (lb, eb) in itertools.combinations(ensembles.items(), 2):
        report.records.extend(two_sample_rows(la, ea, lb, eb))
    return report


# -- Jacobian of the Cartesian -> physical map -----------------------------------


@dataclass(frozen=True)
class JacobianPoint:
    """``r[0]`` is the input power, ``r[1:]`` the reflectivities; ``r_n = 1``."""

    r: tuple

    def __post_init__(self):
        r = tuple(float(v) for v in self.r)
        object.__setattr__(self, "r", r)
        if len(r) < 1:
            raise DomainError("JacobianPoint needs at least r_0")
        if not r[0] > 0:
            raise DomainError("r_0 must be positive")
        if any(not 0.0 < v < 1.0 for v in r[1:]):
            raise DomainError("reflectivities must lie strictly inside (0, 1)")

    @property
    def n(self) -> int:
        return len(self.r)


def cartesian_from_physical(r) -> np.ndarray:
    """``x_i = r_0 r_{i+1} prod_{k<=i} (1 - r_k)`` with ``r_n = 1``."""
    r = np.asarray(r, dtype=np.float64)
    n = r.size
    ext = np.append(r, 1.0)
    x = np.empty(n)
    carry = r[0]
    for i in range(n):
        x[i] = carry * ext[i + 1]
        if i + 1 < n:
            carry *= 1.0 - ext[i + 1]
    return x


def jacobian_analytic(r) -> np.ndarray:
    """``J[i, j] = dx_i/dr_j`` from the element formulas (lower Hessenberg)."""
    r = np.asarray(r, dtype=np.float64)
    n = r.size
    ext = np.append(r, 1.0)
    J = np.zeros((n, n))
    for i in range(n):
        prod = np.prod(1.0 - ext[1:i + 1])
        J[i, 0] = ext[i + 1] * prod
        for j in range(1, i + 1):
            J[i, j] = -r[0] * ext[i + 1] * prod / (1.0 - ext[j])
        if i + 1 < n:
            J[i, i + 1] = r[0] * prod
    return J


def jacobian_numeric(r, h: float = 1e-6) -> np.ndarray:
    """Central finite differences of ``cartesian_from_physical``."""
    r = np.asarray(r, dtype=np.float64)
    n = r.size
    J = np.empty((n, n))
    for j in range(n):
        up, dn = r.copy(), r.copy()
        up[j] += h
        dn[j] -= h
        J[:, j] = (cartesian_from_physical(up) - cartesian_from_physical(dn)) / (2 * h)
    return J


def abs_det(a) -> float:
    """``|det a|`` by Gaussian elimination with partial pivoting."""
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    det = 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if a[p, k] == 0.0:
            return 0.0
        if p != k:
            a[[k, p]] = a[[p, k]]
        det *= a[k, k]
        a[k + 1:, k:] -= np.outer(a[k + 1:, k] / a[k, k], a[k, k:])
    return abs(det)


def jacobian_closed_form(p: JacobianPoint) -> float:
    """``|det J| = r_0^(n-1) prod_{k=1}^{n-1} (1 - r_k)^(n-1-k)``."""
    r, n = p.r, p.n
    out = r[0] ** (n - 1)
    for k in range(1, n):
        out *= (1.0 - r[k]) ** (n - 1 - k)
    return out


def column_reduction_entry(r, i: int, k: int) -> float:
    """Entry ``i`` of column 0 after ``k`` reduction steps, in closed form."""
    if i < k:
        return 0.0
    ext = np.append(np.asarray(r, dtype=np.float64), 1.0)
    return float(ext[i + 1] * np.prod(1.0 - ext[k + 1:i + 1]))


def hessenberg_reduction(p: JacobianPoint, jacobian=None):
    """Run the column operations that zero column 0 of the Jacobian.

    Step ``k`` (1-based) subtracts column ``k`` scaled by
    ``J[k-1, 0] / J[k-1, k]``. Returns the column-0 history (one vector per
    step, starting with the untouched column) and the shifted matrix with
    column 0 moved to the right.
    """
    J = jacobian_analytic(p.r) if jacobian is None else np.array(jacobian, dtype=np.float64)
    n = p.n
    history = [J[:, 0].copy()]
    for k in range(1, n):
        pivot = J[k - 1, k]
        if pivot == 0.0:
            raise DegenerateInputError(f"zero pivot J[{k - 1},{k}]")
        J[:, 0] = J[:, 0] - J[:, k] * (J[k - 1, 0] / pivot)
        history.append(J[:, 0].copy())
    shifted = np.concatenate([J[:, 1:], J[:, :1]], axis=1)
    return history, shifted


def hessenberg_reduction_check(p: JacobianPoint, tol: float = 1e-10) -> bool:
    """True iff the reduction leaves column 0 as ``(0, ..., 0, 1)``, the shifted
    matrix is lower triangular, and every intermediate column matches the
    closed form."""
    history, shifted = hessenberg_reduction(p)
    n = p.n
    final = history[-1]
    if np.any(np.abs(final[:-1]) >= tol) or abs(final[-1] - 1.0) >= tol:
        return False
    if np.any(np.abs(np.triu(shifted, 1)) >= tol):
        return False
    for k, col in enumerate(history):
        expect = [column_reduction_entry(p.r, i, k) for i in range(n)]
        if np.max(np.abs(col - expect)) >= tol:
            return False
    # Product of the shifted diagonal is the determinant up to sign.
    diag = np.prod(np.diagonal(shifted))
    closed = jacobian_closed_form(p)
    return bool(abs(abs(diag) - closed) < tol * max(1.0, closed))


def random_jacobian_point(n: int, rng: np.random.Generator, h: float = 1e-6) -> JacobianPoint:
    margin = 10 * h
    r0 = rng.uniform(margin, 10.0)
    rest = rng.uniform(margin, 1.0 - margin, size=n - 1)
    return JacobianPoint((r0, *rest))


def jacobian_relative_error(p: JacobianPoint, h: float = 1e-6) -> float:
    closed = jacobian_closed_form(p)
    return abs(abs_det(jacobian_numeric(p.r, h)) - closed) / closed


# -- density normalisation ------------------------------------------------------


def unit_vector_pdf(r) -> np.ndarray:
    """``(n-1)! prod_k (1 - r_k)^(n-k-1)`` over the last axis of ``r`` (length n-1)."""
    r = np.asarray(r, dtype=np.float64)
    n = r.shape[-1] + 1
    k = np.arange(1, n)
    return math.factorial(n - 1) * np.prod((1.0 - r) ** (n - k - 1), axis=-1)


def _tensor_quadrature(fn, dim: int, points: int) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(points)
    nodes, weights = (nodes + 1.0) / 2.0, weights / 2.0
    grid = np.stack(np.meshgrid(*([nodes] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    w = np.prod(np.stack(np.meshgrid(*([weights] * dim), indexing="ij"), axis=-1).reshape(-1, dim), axis=1)
    return float(np.sum(w * fn(grid)))


def pdf_normalization_check(n_max: int = 20, unit_n_max: int = 8) -> list:
    """Quadrature of every marginal density (``n <= n_max``) and of the
    unit-vector density (``n <= unit_n_max``); one record per density."""
    from .sampler import reflectivity_pdf, theta_pdf

    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    rows = []
    for n in range(2, n_max + 1):
        for i in range(1, n):
            val, _ = integrate.quad(lambda r: float(reflectivity_pdf(n, i, r)), 0.0, 1.0,
                                    epsabs=1e-13, epsrel=1e-13)
            rows.append(TestRecord(f"norm[reflectivity n={n} i={i}]", abs(val - 1.0), 1e-9))
            for conv in (Convention.MZI_BEAMSPLITTER, Convention.MZI_DIRECTIONAL_COUPLER):
                val, _ = integrate.quad(lambda t: float(theta_pdf(n, i, t, conv)), 0.0, math.pi,
                                        epsabs=1e-13, epsrel=1e-13, limit=200)
                rows.append(TestRecord(f"norm[{conv.value} n={n} i={i}]", abs(val - 1.0), 1e-9))
    for n in range(2, min(unit_n_max, n_max) + 1):
        dim = n - 1
        # degree per axis is at most n-2, so ceil((n-1)/2) Gauss points are exact
        val = _tensor_quadrature(unit_vector_pdf, dim, max(2, (n + 1) // 2))
        rows.append(TestRecord(f"norm[unit-vector n={n}]", abs(val - 1.0), 1e-7))
    return rows
