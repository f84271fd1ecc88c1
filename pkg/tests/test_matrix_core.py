import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from symlab.errors import GapViolatedError, HypothesisViolation, NotHyperbolicError, NotSemisimpleError
from symlab.matrix_core import (
    batch_canonical_symmetrizer,
    canonical_symmetrizer,
    eigendecompose,
    exponential_probe,
    functional_calculus,
    invertibility_margin,
    random_hermitian,
    random_jordan,
    random_semisimple_real,
    random_sum_instance,
    resolvent_probe,
    spectral_projector,
    strip_condition_probe,
    strong_hyperbolicity_certificate,
    sum_bound_check,
    sum_bound_constant,
)

P_EX = np.array([[1.0, 1.0], [0.0, 1.0]])
A_EX = P_EX @ np.diag([0.0, 1.0]) @ np.linalg.inv(P_EX)
PI0 = np.array([[1.0, -1.0], [0.0, 0.0]])
PI1 = np.array([[0.0, 1.0], [0.0, 1.0]])

seeds = st.integers(0, 2**32 - 1)


def herm_defect(M):
    return np.linalg.norm(M - M.conj().T, 2)


# -- eigendecompose -------------------------------------------------------

def test_identity_single_semisimple_cluster():
    spec = eigendecompose(np.eye(2))
    assert len(spec.clusters) == 1
    c = spec.clusters[0]
    assert c.eigenvalue == pytest.approx(1.0)
    assert c.multiplicity == 2 and c.semisimple
    np.testing.assert_allclose(c.projector, np.eye(2), atol=1e-14)


def test_jordan_block_is_defective():
    spec = eigendecompose([[0, 1], [0, 0]])
    assert len(spec.clusters) == 1
    assert spec.clusters[0].multiplicity == 2
    assert not spec.clusters[0].semisimple


def test_diagonal_projectors():
    spec = eigendecompose(np.diag([1.0, 2.0]))
    assert [c.eigenvalue.real for c in spec.clusters] == pytest.approx([1.0, 2.0])
    np.testing.assert_allclose(spec.clusters[0].projector, np.diag([1.0, 0.0]), atol=1e-14)
    np.testing.assert_allclose(spec.clusters[1].projector, np.diag([0.0, 1.0]), atol=1e-14)


def test_explicit_diagonalization_projector():
    spec = eigendecompose(A_EX)
    np.testing.assert_allclose(spec.clusters[0].projector, PI0, atol=1e-13)
    np.testing.assert_allclose(spec.clusters[1].projector, PI1, atol=1e-13)


def test_rejects_nonfinite():
    with pytest.raises(ValueError):
        eigendecompose([[np.nan, 0], [0, 1]])


@settings(max_examples=60, deadline=None)
@given(seed=seeds, n=st.integers(1, 6), kind=st.sampled_from(["herm", "semi", "jordan"]))
def test_spectral_data_invariants(seed, n, kind):
    rng = np.random.default_rng(seed)
    if kind == "herm":
        A = random_hermitian(rng, n)
    elif kind == "semi":
        A = random_semisimple_real(rng, n)
    else:
        if n < 2:
            n = 2
        A = random_jordan(rng, n)
    spec = eigendecompose(A)
    assert sum(c.multiplicity for c in spec.clusters) == n
    # projectors of a non-normal matrix carry its eigenvector conditioning
    scale = max(np.linalg.norm(c.projector, 2) for c in spec.clusters) ** 2
    assert spec.projector_sum_defect() <= 10 * spec.rel_tol * scale
    assert spec.orthogonality_defect() <= 10 * spec.rel_tol * scale
    if kind != "jordan":
        assert spec.semisimple
    else:
        assert not spec.semisimple


def test_semisimple_rank_test_matches_margin():
    A = np.diag([2.0, 2.0, 5.0])
    c = eigendecompose(A).clusters[0]
    s = np.linalg.svd(A - c.eigenvalue * np.eye(3), compute_uv=False)
    assert c.multiplicity == 2 and c.semisimple
    assert s[3 - 2] <= c.margin


# -- contour projector -----------------------------------------------------

def test_contour_diagonal():
    P, defect = spectral_projector(np.diag([0.0, 1.0]), [0.0], 1.0)
    np.testing.assert_allclose(P, np.diag([1.0, 0.0]), atol=1e-12)
    assert defect < 1e-12


def test_contour_hermitian_is_orthogonal():
    rng = np.random.default_rng(3)
    H = random_hermitian(rng, 4)
    w = np.linalg.eigvalsh(H)
    gap = min(np.diff(w))
    P, _ = spectral_projector(H, [w[0]], gap)
    assert herm_defect(P) < 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_contour_matches_eigendecompose(seed):
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((4, 4))
    lam = np.array([-1.5, 0.0, 1.0, 2.5])
    A = V @ np.diag(lam) @ np.linalg.inv(V)
    spec = eigendecompose(A)
    for c in spec.clusters:
        P, defect = spectral_projector(A, [c.eigenvalue], 1.0)
        np.testing.assert_allclose(P, c.projector, atol=1e-10 * max(1, np.linalg.norm(c.projector, 2)))


def test_contour_gap_violation():
    with pytest.raises(GapViolatedError, match="gap violated"):
        spectral_projector(np.diag([0.0, 0.7]), [0.0], 1.0)


# -- probes ------------------------------------------------------------------

def test_resolvent_probe_normal():
    re = np.linspace(-1, 2, 31)
    im = np.concatenate([-np.logspace(-6, 1, 30), np.logspace(-6, 1, 30)])
    val = resolvent_probe(np.diag([0.0, 1.0]), re, im)
    assert val == pytest.approx(1.0, abs=1e-9)


def test_resolvent_probe_jordan_diverges():
    J = np.array([[0.0, 1.0], [0.0, 0.0]])
    vals = [resolvent_probe(J, [0.0], [10.0 ** -k]) for k in range(1, 6)]
    assert all(b > 5 * a for a, b in zip(vals, vals[1:]))


def test_resolvent_probe_example_matrix_stable_under_refinement():
    # Example 1 symbol at x = 1, a = 0.5, xi = 0.6, eta = 0.8
    A = np.array([[0, 0.6 + 0.4, 0.8], [0.6 - 0.4, 0, 0], [0.8 * 1.25, 0, 0]])
    prev = None
    for n in (9, 17, 33, 65):
        re = np.linspace(-2, 2, n)
        im = np.concatenate([-np.logspace(-8, 1, n), np.logspace(-8, 1, n)])
        v = resolvent_probe(A, re, im)
        if prev is not None:
            last = abs(v - prev) / v
        prev = v
    assert np.isfinite(prev) and last < 0.01


def test_exponential_probe_hermitian_is_one():
    rng = np.random.default_rng(1)
    H = random_hermitian(rng, 4)
    assert exponential_probe(H, np.linspace(-30, 30, 41)).value == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_hermitian_probe_shortcut_matches_svd(n, seed):
    rng = np.random.default_rng(seed)
    H = random_hermitian(rng, n)
    re = np.linspace(-3, 3, 7)
    im = np.array([-1.0, -1e-3, 1e-6, 0.5])
    z = (re[:, None] + 1j * im[None, :]).ravel()
    smin = np.linalg.svd(H[None] - z[:, None, None] * np.eye(n), compute_uv=False)[:, -1]
    assert resolvent_probe(H, re, im) == pytest.approx(np.max(np.abs(z.imag) / smin), rel=1e-9)
    t = np.linspace(-5, 5, 5)
    E = [np.linalg.norm(expm(1j * s * H), 2) for s in t]
    assert exponential_probe(H, t).value == pytest.approx(max(E), abs=1e-12)


def test_exponential_probe_nilpotent_growth():
    J = np.array([[0.0, 1.0], [0.0, 0.0]])
    for T in (1.0, 10.0, 100.0):
        val = exponential_probe(J, np.linspace(-T, T, 11)).value
        # |exp(itJ)| = |[[1, it], [0, 1]]| = (T + sqrt(T^2 + 4)) / 2
        assert val == pytest.approx((T + np.sqrt(T * T + 4)) / 2, rel=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_exponential_bounded_by_projector_sum(seed):
    rng = np.random.default_rng(seed)
    A = random_semisimple_real(rng, 4)
    spec = eigendecompose(A)
    C2 = max(np.linalg.norm(c.projector, 2) for c in spec.clusters)
    assert exponential_probe(A).value <= 4 * C2 * (1 + 1e-8)


# -- symmetrizers and functional calculus -----------------------------------

def test_canonical_hermitian_is_identity():
    rng = np.random.default_rng(2)
    S = canonical_symmetrizer(eigendecompose(random_hermitian(rng, 5)))
    np.testing.assert_allclose(S, np.eye(5), atol=1e-12)


def test_canonical_explicit_example():
    S = canonical_symmetrizer(eigendecompose(A_EX))
    expected = PI0.T @ PI0 + PI1.T @ PI1
    np.testing.assert_allclose(S, expected, atol=1e-12)
    assert herm_defect(S @ A_EX) < 1e-12


def test_canonical_example_one_lower_bound():
    A = np.array([[0, 0.3 + 0.5 * 0.7, 0.7], [0.3 - 0.5 * 0.7, 0, 0], [0.7 * 1.25, 0, 0]])
    S = canonical_symmetrizer(eigendecompose(A))
    assert np.linalg.eigvalsh(S)[0] >= 1 / 3 - 1e-12


def test_canonical_errors():
    with pytest.raises(NotSemisimpleError, match="not semi-simple"):
        canonical_symmetrizer(eigendecompose([[0, 1], [0, 0]]))
    with pytest.raises(NotHyperbolicError, match="not hyperbolic"):
        canonical_symmetrizer(eigendecompose([[0, 1], [-1, 0]]))


@settings(max_examples=50, deadline=None)
@given(seed=seeds, n=st.integers(1, 6))
def test_canonical_symmetrizer_bounds(seed, n):
    rng = np.random.default_rng(seed)
    A = random_semisimple_real(rng, n)
    spec = eigendecompose(A)
    S = canonical_symmetrizer(spec)
    C2 = max(np.linalg.norm(c.projector, 2) for c in spec.clusters)
    nS, nA = np.linalg.norm(S, 2), np.linalg.norm(A, 2)
    assert herm_defect(S) <= 1e-8 * nS
    assert np.linalg.eigvalsh(S)[0] >= 1 / n - 1e-8
    assert nS <= n * C2**2 * (1 + 1e-8)
    assert herm_defect(S @ A) <= 1e-8 * nS * nA


def test_batch_symmetrizer_matches_single():
    rng = np.random.default_rng(5)
    mats = np.stack([random_semisimple_real(rng, 3, repeat_prob=0.0) for _ in range(20)]
                    + [np.diag([1.0, 1.0, 2.0])])
    batch = batch_canonical_symmetrizer(mats)
    for M, S in zip(mats, batch):
        ref = canonical_symmetrizer(eigendecompose(M))
        np.testing.assert_allclose(S, ref, atol=1e-8 * np.linalg.norm(ref, 2))


def test_functional_calculus_basic():
    spec = eigendecompose(np.diag([1.0, 2.0]))
    np.testing.assert_allclose(functional_calculus(spec, lambda z: z), np.diag([1.0, 2.0]), atol=1e-14)
    rng = np.random.default_rng(0)
    spec = eigendecompose(random_semisimple_real(rng, 4))
    np.testing.assert_allclose(functional_calculus(spec, lambda z: 1.0), np.eye(4), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 5))
def test_functional_calculus_square_and_product(seed, n):
    rng = np.random.default_rng(seed)
    A = random_semisimple_real(rng, n, cond_max=100)
    spec = eigendecompose(A)
    sq = functional_calculus(spec, lambda z: z * z)
    assert np.linalg.norm(sq - A @ A, 2) <= 1e-10 * max(1.0, np.linalg.norm(A, 2) ** 2) * 100
    f = functional_calculus(spec, np.exp)
    g = functional_calculus(spec, np.sin)
    fg = functional_calculus(spec, lambda z: np.exp(z) * np.sin(z))
    assert np.linalg.norm(fg - f @ g, 2) <= 1e-9 * max(1.0, np.linalg.norm(f, 2) * np.linalg.norm(g, 2))


def test_functional_calculus_defective():
    with pytest.raises(NotSemisimpleError):
        functional_calculus(eigendecompose([[0, 1], [0, 0]]), lambda z: z)


# -- sum bound ----------------------------------------------------------------

def test_sum_bound_constant_recursion():
    C = [None, 0]
    for m in range(2, 8):
        C.append(1 + 2 * C[-1])
    assert [sum_bound_constant(m) for m in range(1, 8)] == C[1:]


def test_sum_bound_single_term_void():
    res = sum_bound_check([np.eye(2)], [np.zeros((2, 2))], [0.0], 1.0, 1.0, 1.0)
    assert res.holds and res.lhs == 0.0 and res.bound == 0.0


def test_sum_bound_two_terms_tight():
    eps, K1, K2 = 0.5, 2.0, 3.0
    mu = [0.0, 0.25]
    d = 0.25
    E = np.zeros((2, 2))
    E[0, 0] = 1.0
    p = E * K2 * eps / d
    S1 = np.zeros((2, 2))
    S2 = K1 * d * E
    res = sum_bound_check([S1, S2], [p, -p], mu, eps, K1, K2)
    assert res.hypotheses_ok
    assert res.lhs == pytest.approx(K1 * K2 * eps, rel=1e-12)
    assert res.ratio == pytest.approx(1.0, rel=1e-12)
    assert res.holds


def test_sum_bound_reports_violations():
    res = sum_bound_check([np.eye(2), 3 * np.eye(2)], [np.eye(2), np.eye(2)], [0.0, 1.0], 1.0, 1.0, 1.0)
    assert not res.hypotheses_ok
    assert any("Lipschitz" in v for v in res.violations)
    assert any("sum of p_j" in v for v in res.violations)
    with pytest.raises(HypothesisViolation):
        sum_bound_check([np.eye(2)] * 2, [np.eye(2), -np.eye(2)], [1.0, 1.0], 1.0, 1.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(seed=seeds, m=st.integers(1, 5))
def test_sum_bound_random_instances(seed, m):
    rng = np.random.default_rng(seed)
    eps, K1, K2 = rng.uniform(0.1, 2, 3)
    S, p, mu = random_sum_instance(rng, m, eps=eps, K1=K1, K2=K2)
    res = sum_bound_check(S, p, mu, eps, K1, K2)
    assert res.hypotheses_ok, res.violations
    assert res.holds


# -- invertibility and certificates -----------------------------------------

def test_invertibility_margin_examples():
    m = invertibility_margin(np.eye(3))
    assert m.kappa == pytest.approx(1.0) and m.radius == pytest.approx(1.0)
    assert invertibility_margin(np.diag([1.0, 1e-3])).radius == pytest.approx(1e-3)


@pytest.mark.parametrize("seed", range(10))
def test_invertibility_witness_is_singular(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    m = invertibility_margin(A)
    assert m.radius * m.kappa == pytest.approx(1.0)
    assert np.linalg.norm(m.B, 2) == pytest.approx(m.radius, rel=1e-12)
    assert m.det_residual <= 1e-8 * np.linalg.norm(A, 2) ** 4


def test_certificate_hermitian():
    rng = np.random.default_rng(4)
    cert = strong_hyperbolicity_certificate(random_hermitian(rng, 4))
    assert cert.passed and cert.reason == "ok"
    assert cert.C1 == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(cert.S, np.eye(4), atol=1e-10)


def test_certificate_jordan_defective():
    cert = strong_hyperbolicity_certificate([[0, 1], [0, 0]])
    assert not cert.passed and cert.reason == "defective"


def test_certificate_rotation_not_hyperbolic():
    cert = strong_hyperbolicity_certificate([[0, 1], [-1, 0]])
    assert not cert.passed and cert.reason == "not hyperbolic"


def test_certificate_near_jordan_scaling():
    # eigenvectors (1, +-sqrt(e)): projector norms ~ (1 + 1/e)^(1/2) / 2 ~ e^(-1/2) / 2
    eps_list = [1e-2, 1e-4, 1e-6]
    C2 = []
    for e in eps_list:
        cert = strong_hyperbolicity_certificate([[0, 1], [e, 0]])
        assert cert.passed, cert.reason
        C2.append(cert.C2)
        assert cert.C2 == pytest.approx(0.5 * (np.sqrt(e) + 1 / np.sqrt(e)), rel=1e-6)
    slope = np.polyfit(np.log(eps_list), np.log(C2), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.01)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 6))
def test_certificate_cross_checks_on_semisimple(seed, n):
    rng = np.random.default_rng(seed)
    A = random_semisimple_real(rng, n)
    cert = strong_hyperbolicity_certificate(A)
    assert cert.passed, cert.reason
    assert cert.C1 <= n * cert.C2 * (1 + 1e-6)
    assert cert.C2 <= cert.C3 * (1 + 1e-5)
    assert cert.C3 <= cert.C4 / cert.c4 * (1 + 1e-6)
    assert cert.C3 >= 1 - 1e-9


def test_strip_condition_on_hermitian():
    rng = np.random.default_rng(0)
    H = random_hermitian(rng, 4)
    # eigenvalues of rho H + B stay within |B| of the real axis
    assert strip_condition_probe(H, 1.0, rng, samples=100) <= 1.0 + 1e-12
