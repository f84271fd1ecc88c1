import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symlab.errors import HypothesisViolation, NotHyperbolicError
from symlab.matrix_core import batch_canonical_symmetrizer
from symlab.regularity import (ReducedFamily, directional_derivative_defect, discontinuity_gap,
                               eigenvalue_field, eigenvalue_regularity, holder_fit, lipschitz_estimate,
                               one_sided_defect, path_gap, projector_modulus, sample_field, symmetrizer_field,
                               taylor_obstruction)
from symlab.symbols import friedrichs, load_builtin

NU = [1.0, 0.0, 0.0]


def levels(n0=64, k=3, lo=-1.0, hi=1.0):
    return [[np.linspace(lo, hi, n0 * 2 ** j + 1)] for j in range(k)]


def scalar(fn):
    return lambda p: fn(p[:, 0])


def slice_xy(fam, **fixed):
    return ReducedFamily(fam, NU, ["x", "xi1"], fixed_params=fixed, fixed_xi=[0, 0, 1])


def oracle_symmetrizer(A):
    # sum of P* P over rank-one eigenprojectors v w^T / (w^T v)
    w, V = np.linalg.eig(A)
    W = np.linalg.inv(V)
    S = np.zeros_like(A, dtype=complex)
    for k in range(len(w)):
        P = np.outer(V[:, k], W[k])
        S += P.conj().T @ P
    return S


# -- eigenvalue branches -----------------------------------------------------

def test_diag_branches_sorted_and_lipschitz_one():
    A = lambda p: np.einsum("i,jk->ijk", p[:, 0], np.diag([1.0, -1.0]))
    fields = [eigenvalue_field(A, ax) for ax in levels()]
    a = fields[-1].axes[0]
    np.testing.assert_allclose(fields[-1].values[:, 0], -np.abs(a), atol=1e-14)
    np.testing.assert_allclose(fields[-1].values[:, 1], np.abs(a), atol=1e-14)
    for j in range(2):
        rep = lipschitz_estimate([f.branch(j) for f in fields])
        assert rep.lipschitz_constant == pytest.approx(1.0, abs=1e-12)
        assert rep.stable


def test_constant_matrix_zero_lipschitz():
    M = np.array([[0.0, 2.0], [0.5, 0.0]])
    A = lambda p: np.broadcast_to(M, (len(p), 2, 2))
    rep = lipschitz_estimate([eigenvalue_field(A, ax) for ax in levels()])
    assert rep.lipschitz_constant == 0.0
    assert rep.stable


def test_complex_eigenvalue_raises():
    A = lambda p: np.einsum("i,jk->ijk", p[:, 0], np.array([[0.0, 1.0], [-1.0, 0.0]]))
    with pytest.raises(NotHyperbolicError):
        eigenvalue_field(A, [np.linspace(0.1, 1, 5)])


def test_example2_branches_stable_under_refinement():
    rf = slice_xy(load_builtin("example2"))
    fields = [eigenvalue_field(rf, [np.linspace(-1, 1, n), [0.0]]) for n in (101, 201, 401)]
    rep = lipschitz_estimate(fields)
    assert rep.stable
    # branches are x * {-sqrt(1+..)} etc; sup slope along xi=0 is bounded
    assert rep.lipschitz_constant < 10


def test_example1_eigenvalues_below_theory_bound():
    rf = ReducedFamily(load_builtin("example1", a="x"), NU, ["x", "xi1"], fixed_xi=[0, 0, 1])
    ax = [[np.linspace(-0.5, 0.5, n), np.linspace(-0.5, 0.5, n)] for n in (21, 41)]
    rep = eigenvalue_regularity(rf, ax)
    assert rep.lipschitz_constant <= rep.theory_bound
    assert rep.stable


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_branches_match_spectrum(seed):
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    D0, D1 = np.diag(rng.standard_normal(3)), np.diag(rng.standard_normal(3))
    Vi = np.linalg.inv(V)
    A = lambda p: V @ (D0 + p[:, 0, None, None] * D1) @ Vi
    f = eigenvalue_field(A, [np.linspace(-1, 1, 17)])
    a = f.axes[0]
    exact = np.sort(np.diag(D0)[None, :] + a[:, None] * np.diag(D1)[None, :], axis=1)
    np.testing.assert_allclose(f.values, exact, atol=1e-10 * max(1.0, np.linalg.cond(V)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 4))
def test_coarsening_does_not_increase_constant(seed, stride):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(4)
    fn = scalar(lambda a: np.sin(c[0] * a) + c[1] * np.abs(a - c[2]) + c[3] * a ** 2)
    ax = np.linspace(-1, 1, 4 * 24 + 1)
    fine = sample_field(fn, [ax])
    coarse = sample_field(fn, [ax[::stride]])
    rep = lipschitz_estimate([coarse, fine])
    assert rep.lipschitz_levels[0] <= rep.lipschitz_levels[1] + 1e-12


# -- Lipschitz and Hölder probes ---------------------------------------------

def test_abs_has_constant_one():
    rep = lipschitz_estimate([sample_field(scalar(np.abs), ax) for ax in levels()])
    assert rep.lipschitz_constant == pytest.approx(1.0, abs=1e-3)
    assert rep.stable


def test_sqrt_abs_detected_non_lipschitz():
    rep = lipschitz_estimate([sample_field(scalar(lambda a: np.sqrt(np.abs(a))), ax) for ax in levels()])
    L = rep.lipschitz_levels
    # constant grows like h^{-1/2}: ratio sqrt(2) per halving
    assert L[1] / L[0] == pytest.approx(np.sqrt(2), rel=0.02)
    assert not rep.stable
    assert "not Lipschitz at this resolution" in rep.flags


@pytest.mark.parametrize("beta", [0.25, 0.5, 0.7, 0.75, 1.0])
def test_holder_calibration(beta):
    f = sample_field(scalar(lambda a: np.abs(a) ** beta), [np.linspace(-1, 1, 2049)])
    alpha, r2, flags = holder_fit(f, [0.0])
    assert alpha == pytest.approx(beta, abs=0.05)
    assert r2 > 0.99 and not flags


def test_smooth_field_exponent_near_one():
    f = sample_field(scalar(lambda a: a), [np.linspace(-1, 1, 513)])
    assert holder_fit(f, [0.3])[0] >= 0.95


def test_constant_field_flag():
    f = sample_field(scalar(np.zeros_like), [np.linspace(-1, 1, 513)])
    assert holder_fit(f, [0.0]) == (1.0, 1.0, ["constant field"])


def test_holder_needs_wide_radii():
    f = sample_field(scalar(np.abs), [np.linspace(-1, 1, 513)])
    with pytest.raises(HypothesisViolation):
        holder_fit(f, [0.0], radii=[0.1, 0.12, 0.14, 0.16, 0.2])


# -- projectors --------------------------------------------------------------

def test_constant_projector_modulus_zero():
    M = np.diag([1.0, -1.0])
    pm = projector_modulus(lambda p: np.broadcast_to(M, (len(p), 2, 2)), [1], [np.linspace(0, 1, 11)])
    assert pm.quotient == 0.0


def test_closed_form_projector_quotient():
    # P_+(a) = 1/2 [[1, a^{-1/2}], [a^{1/2}, 1]]; |dP/da| = max(a^{-3/2}, a^{-1/2}) / 4
    A = lambda p: np.stack([np.array([[0.0, 1.0], [v, 0.0]]) for v in p[:, 0]])
    a = np.linspace(0.9, 1.1, 2001)
    pm = projector_modulus(A, [1], [a])
    assert pm.quotient == pytest.approx(0.25 * 0.9 ** -1.5, rel=1e-3)
    assert pm.delta == pytest.approx(2 * np.sqrt(0.9), rel=1e-12)
    assert pm.quotient <= pm.bound
    assert not pm.flags


def test_example2_projector_scales_inverse_gap():
    rf = slice_xy(load_builtin("example2"))
    qs, ds = [], []
    for d in (0.1, 0.05, 0.025, 0.0125):
        pm = projector_modulus(rf, [2], [[d], np.linspace(-0.2, 0.2, 801)])
        qs.append(pm.quotient)
        ds.append(pm.delta)
        assert pm.quotient <= pm.bound
    slope = np.polyfit(np.log(ds), np.log(qs), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.05)
    prod = np.array(qs) * np.array(ds)
    assert prod.max() / prod.min() < 1.1


def test_gap_collapse_flagged():
    rf = slice_xy(load_builtin("example2"))
    pm = projector_modulus(rf, [2], [[0.0], np.linspace(-0.1, 0.1, 21)])
    assert pm.flags and pm.flags[0].startswith("delta->0 region")


# -- symmetrizer fields ------------------------------------------------------

def test_symmetric_family_gives_identity():
    fam = friedrichs(3, 2, seed=4)
    rf = ReducedFamily(fam, NU, ["xi1", "xi2"])
    ax = np.linspace(-1, 1, 9)
    f = symmetrizer_field(rf, [ax, ax])
    vals = f.flat_values()
    ok = np.isfinite(vals).all(axis=(1, 2))
    assert f.invalid == 0
    np.testing.assert_allclose(vals[ok], np.broadcast_to(np.eye(3), vals[ok].shape), atol=1e-10)


def test_example1_holder_symmetrizer():
    rf = slice_xy(load_builtin("example1", a="holder", alpha=0.5))
    ax = np.linspace(-0.005, 0.005, 257)
    f = symmetrizer_field(rf, [ax, ax])
    alpha, r2, _ = holder_fit(f, [0.0, 0.0])
    assert 0.4 <= alpha <= 0.6
    assert r2 > 0.99


def test_constant_coupling_has_surviving_gap():
    a = 0.5
    rf = slice_xy(load_builtin("example1"), a=a)
    lv = [symmetrizer_field(rf, [np.linspace(-0.1, 0.1, 2 * n + 1)] * 2) for n in (16, 32, 64)]
    gap, gaps, survives = discontinuity_gap(lv, [0.0, 0.0])
    assert survives and gap > 0.1
    # path limits: S = Id along x = 0, S = S_B along xi = 0
    B = np.array([[0, a, 1], [-a, 0, 0], [1 + a * a, 0, 0]], dtype=float)
    expected = np.linalg.norm(np.eye(3) - oracle_symmetrizer(B), 2)
    S = lambda p: batch_canonical_symmetrizer(rf(p))
    pg = path_gap(S, [0, 0], [0, 1], [1, 0], [1e-2, 1e-4, 1e-6])
    np.testing.assert_allclose(pg, expected, rtol=1e-8)
    assert gap >= expected - 1e-8


def test_example2_lipschitz_but_not_c1():
    rf = slice_xy(load_builtin("example2"))
    lv = [symmetrizer_field(rf, [np.linspace(-0.2, 0.2, n)] * 2) for n in (41, 81, 161)]
    assert lipschitz_estimate(lv).stable
    ax = np.linspace(-0.05, 0.05, 257)
    assert holder_fit(symmetrizer_field(rf, [ax, ax]), [0, 0])[0] == pytest.approx(1.0, abs=0.05)
    S = lambda p: batch_canonical_symmetrizer(rf(np.atleast_2d(p)))
    steps = [1e-2, 1e-3, 1e-4]
    at_origin = directional_derivative_defect(S, [0, 0], steps)
    elsewhere = directional_derivative_defect(S, [0.3, 0.2], steps)
    assert at_origin.min() > 0.3
    assert abs(at_origin[-1] - at_origin[-2]) < 0.01 * at_origin[-1]
    assert elsewhere[-1] < 1e-3
    # each line through the origin sees an odd restriction, so one-sided
    # differences alone miss the corner
    assert one_sided_defect(S, [0, 0], [1, 0], steps)[-1] < 1e-3


def test_taylor_obstruction():
    t = taylor_obstruction()
    assert t["sylvester_min_singular_omega1"] == pytest.approx(1.0)
    assert t["sylvester_min_singular_omega2"] == pytest.approx(1.0)
    assert t["obstruction"]


def test_csv_layout():
    f = sample_field(scalar(np.abs), [np.linspace(-1, 1, 3)], names=["a"])
    assert f.to_csv().splitlines() == ["a,v0", "-1,1", "0,0", "1,1"]
