import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symlab.cauchy import (
    EvolutionProblem, bump, energy_monitor, evolve, first_order_shift, first_order_shift_gamma,
    growth_constant, growth_rate, illposed_packet, localize, mode_growth, oscillator_eigen, power_fit,
    refinement_growth,
)
from symlab.errors import ConvergenceError, DomainError, EvolutionError, HypothesisViolation
from symlab.grid import GridFunction
from symlab.symbols import load_builtin
from symlab.symbols.family import Parameter, SymbolFamily
from symlab.wavepacket import constant_field

IM_BETA0 = 2 ** 0.25 * np.sin(np.pi / 8)


def wave_family():
    # A_1 = [[0, c^2], [1, 0]], c = 2 + x^2/10: speeds +-c, symmetrizer diag(1, c^2)
    c2 = "(2 + x^2/10)^2"
    return SymbolFamily("wave", 2, 1, [Parameter("x", -10.0, 10.0)],
                        [[["1", "0"], ["0", "1"]], [["0", c2], ["1", "0"]]])


def wave_symmetrizer(x, xi):
    c2 = (2 + x ** 2 / 10) ** 2
    S = np.zeros((len(x), len(xi), 2, 2), dtype=complex)
    S[:, :, 0, 0] = 1.0
    S[:, :, 1, 1] = c2[:, None]
    return S


def packet(n, L=np.pi, k0=0.0, width=0.3, ncomp=2):
    amps = np.array([1.0, 0.4j, 0.2 - 0.1j])[:ncomp]
    return GridFunction.from_function(
        lambda x: np.outer(amps, np.exp(-(x / width) ** 2 / 2 + 1j * k0 * x)), n, L)


# -- evolve -----------------------------------------------------------------------


def test_localize_profile():
    x = np.linspace(-np.pi, np.pi, 401)
    xe = localize(x, np.pi)
    inner = np.abs(x) <= 0.8 * np.pi
    assert np.array_equal(xe[inner], x[inner])
    assert abs(xe[0]) < 1e-12 and abs(xe[-1]) < 1e-12
    with pytest.raises(DomainError):
        localize(x, np.pi, 1.5)


def test_friedrichs_conserves_norm():
    fam = load_builtin("friedrichs", N=3, d=1, seed=2)
    tr = evolve(EvolutionProblem(fam, packet(512, ncomp=3), 1.0, stride=50))
    assert tr.diagnostics["conservation_defect"] < 1e-6
    assert tr.times[-1] == pytest.approx(1.0)


def test_zero_data_stays_zero():
    fam = load_builtin("example1", a="x")
    tr = evolve(EvolutionProblem(fam, GridFunction(np.zeros((3, 128))), 0.5, eta=8.0))
    assert not np.any(tr.snaps[-1].values)


def test_cfl_violation_rejected():
    fam = load_builtin("friedrichs", N=2, d=1)
    with pytest.raises(HypothesisViolation, match="CFL"):
        evolve(EvolutionProblem(fam, packet(128), 1.0, dt=1.0))


def test_blowup_aborts_with_last_state():
    fam = load_builtin("friedrichs", N=2, d=1)
    with pytest.raises(EvolutionError) as info:
        evolve(EvolutionProblem(fam, packet(64), 2.0, B=-2000 * np.eye(2)))
    assert info.value.last is not None
    assert np.all(np.isfinite(info.value.last.values))


def test_missing_eta_and_mismatch():
    fam = load_builtin("example1", a="x")
    with pytest.raises(HypothesisViolation):
        evolve(EvolutionProblem(fam, GridFunction(np.ones((3, 64))), 0.1))
    with pytest.raises(DomainError):
        evolve(EvolutionProblem(fam, GridFunction(np.ones((2, 64))), 0.1, eta=1.0))


def test_forcing_matches_exact_solution():
    # u_t + u_x = f with u = sin(x - t) + t: f = 1
    fam = SymbolFamily("advect", 1, 1, [], [[["1"]], [["1"]]])
    u0 = GridFunction.from_function(np.sin, 64)
    tr = evolve(EvolutionProblem(fam, u0, 1.0, f=lambda t: np.ones((1, 64)), taper=None))
    exact = np.sin(u0.x - 1.0) + 1.0
    assert np.abs(tr.snaps[-1].values[0] - exact).max() < 1e-6
    assert tr.f_norms[0] == pytest.approx(np.sqrt(2 * np.pi))


def test_example1_x_growth_constant_stable():
    rows = refinement_growth(load_builtin("example1", a="x"), 16.0, T=1.0)
    gammas = [r["gamma"] for r in rows]
    assert max(gammas) - min(gammas) <= 0.2 * max(abs(g) for g in gammas)
    Cs = [r["C"] for r in rows]
    assert max(Cs) / min(Cs) < 1.2


def test_growth_constant_of_pure_exponential():
    fam = SymbolFamily("decay", 1, 1, [], [[["1"]], [["0"]]])
    tr = evolve(EvolutionProblem(fam, packet(64, ncomp=1), 1.0, B=[[-0.7]], dt=0.01, taper=None))
    C, gamma = growth_constant(tr)
    assert gamma == pytest.approx(0.7, rel=1e-8)
    assert C == pytest.approx(1.0, abs=1e-8)
    assert growth_rate(tr) == pytest.approx(0.7, rel=1e-8)


# -- energy monitor ------------------------------------------------------------------


def wave_trajectory(n, k0):
    u0 = packet(n, L=2 * np.pi, k0=k0, width=0.6)
    return evolve(EvolutionProblem(wave_family(), u0, 0.5, stride=max(1, n // 64), taper=None))


def test_monitor_identity_symmetric_is_flat():
    fam = load_builtin("friedrichs", N=2, d=1, seed=5)
    u0 = packet(128, L=2 * np.pi, width=0.6)
    tr = evolve(EvolutionProblem(fam, u0, 0.5, stride=8))
    mon = energy_monitor(tr, None, fam)
    assert mon.max_ratio < 1e-6


def test_monitor_symmetrizer_bounded_under_refinement():
    fam = wave_family()
    r1 = energy_monitor(wave_trajectory(128, 4.0), wave_symmetrizer, fam).max_ratio
    r2 = energy_monitor(wave_trajectory(256, 4.0), wave_symmetrizer, fam).max_ratio
    assert r1 < 2 and abs(r1 - r2) <= 0.2 * max(r1, r2)


def test_monitor_broken_symmetrizer_grows_with_frequency():
    fam = wave_family()
    low = energy_monitor(wave_trajectory(256, 2.0), None, fam).max_ratio
    high = energy_monitor(wave_trajectory(256, 16.0), None, fam).max_ratio
    good = energy_monitor(wave_trajectory(256, 16.0), wave_symmetrizer, fam).max_ratio
    assert high > 3 * low
    assert high > 5 * good


# -- oscillator -----------------------------------------------------------------------


def test_oscillator_harmonic():
    res = oscillator_eigen(0.0, 0.0)
    assert res.beta_sq == pytest.approx(1.0, abs=1e-10)
    z = np.linspace(-4, 4, 81)
    g = res.groundstate(z)
    assert np.abs(g - np.pi ** -0.25 * np.exp(-z * z / 2)).max() < 1e-10


def test_oscillator_gaussian_sign_convention():
    res = oscillator_eigen(0.0, 1.0)
    assert abs(res.beta_sq - (1 + 1j)) < 1e-10
    assert res.residual <= 1e-8
    assert res.direct_residuals["mu"] < 1e-8 < res.direct_residuals["minus_conj_mu"]
    assert res.beta.imag == pytest.approx(-IM_BETA0, abs=1e-10)


def test_oscillator_holder_converges():
    res = oscillator_eigen(0.5, 0.3)
    assert res.residual <= 1e-8
    (m1, mu1, _), (m2, mu2, _) = res.history[-2:]
    assert m2 == 2 * m1 and abs(mu2 - mu1) <= 1e-8
    assert res.direct_residuals["mu"] < 0.05 < res.direct_residuals["minus_conj_mu"]


def test_oscillator_perturbative_slope():
    lam1 = first_order_shift(0.5)
    eps = np.array([0.005, 0.01])
    im = [oscillator_eigen(0.5, e, max_modes=4096, tol=1e-7).beta_sq.imag for e in eps]
    slope = (im[1] - im[0]) / (eps[1] - eps[0])
    assert slope == pytest.approx(lam1, rel=1e-3)


def test_oscillator_errors():
    with pytest.raises(DomainError):
        oscillator_eigen(0.5, 0.3, n_modes=16)
    with pytest.raises(ConvergenceError) as info:
        oscillator_eigen(0.5, 0.3, max_modes=64)
    assert len(info.value.history) >= 2


@pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 0.75])
def test_first_order_shift_matches_gamma(alpha):
    assert abs(first_order_shift(alpha) - first_order_shift_gamma(alpha)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 0.99))
def test_first_order_shift_positive(alpha):
    assert first_order_shift(alpha) > 0


def test_first_order_shift_domain():
    assert first_order_shift(0.0) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        first_order_shift(1.0)


# -- mode growth -------------------------------------------------------------------------


def test_mode_growth_alpha0():
    rep = mode_growth(0.0, [16, 64, 256, 1024], 2.0)
    assert rep.fit_exponent == pytest.approx(0.5, abs=0.02)
    assert rep.fit_prefactor == pytest.approx(IM_BETA0, rel=0.05)
    assert "eta,sigma" in rep.to_csv()


def test_mode_growth_symmetric_control():
    eye = [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]
    A1 = [["0", "1", "0"], ["1", "0", "0"], ["0", "0", "0"]]
    A2 = [["0", "x", "x"], ["x", "0", "0"], ["x", "0", "0"]]
    fam = SymbolFamily("symmetric-control", 3, 2, [Parameter("x", -1.0, 1.0)], [eye, A1, A2])
    rep = mode_growth(0.0, [16, 64, 256, 1024], 1.0, fam=fam)
    assert max(abs(s) for s in rep.sigma) < 1e-6
    assert np.isnan(rep.fit_exponent) and rep.flags


def test_mode_growth_needs_four_frequencies():
    rep = mode_growth(0.0, [16, 64], 1.0)
    assert np.isnan(rep.fit_exponent)
    assert any("four" in f for f in rep.flags)


def test_power_fit_exact():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    p, g, r2 = power_fit(x, 3 * x ** 0.3)
    assert p == pytest.approx(0.3) and g == pytest.approx(3.0) and r2 == pytest.approx(1.0)


# -- growing packets ----------------------------------------------------------------------


def test_bump_support():
    s = np.linspace(0, 3, 301)
    b = bump(s)
    assert np.all(b[(s <= 1) | (s >= 2)] == 0) and b.max() == pytest.approx(1.0)


def test_packet_solves_system():
    pk = illposed_packet(128.0)
    assert pk.residual(0.0) < 1e-4 and pk.residual(0.7) < 1e-4


def test_packet_without_z_factor_fails():
    assert illposed_packet(128.0, w_factor="none").residual(0.0) > 0.1


def test_packet_initial_concentration():
    pk = illposed_packet(256.0)
    P = pk.profiles(0.0)
    mass = np.sum(np.abs(P) ** 2, axis=(0, 1))
    assert np.isfinite(pk.norm(0.0))
    assert mass[np.abs(pk.x) < 0.5].sum() > 0.999 * mass.sum()


def test_packet_amplification():
    pk = illposed_packet(256.0)
    assert pk.amplification(1.0) >= np.exp(0.9 * IM_BETA0 * np.sqrt(256.0) * 1.0)
    r = np.log(illposed_packet(512.0).amplification(1.0)) / np.log(pk.amplification(1.0))
    assert r == pytest.approx(np.sqrt(2), rel=0.03)


def test_packet_grid_synthesis_parseval():
    pk = illposed_packet(8.0)
    g = pk.to_grid(0.3)
    assert g.norm() == pytest.approx(pk.norm(0.3), rel=1e-10)
    with pytest.raises(DomainError):
        illposed_packet(256.0).to_grid(0.0)


def test_packet_requires_alpha0():
    with pytest.raises(HypothesisViolation):
        illposed_packet(64.0, alpha=0.5)
