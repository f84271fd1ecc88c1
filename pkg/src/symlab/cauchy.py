"""Desk-scale Cauchy problems for A_0 u_t + sum_k A_k(x) d_k u + B u = f on
periodic grids, and the harmonic-oscillator eigenproblem that produces
exponentially growing modes of Example 1 with a = |x|^alpha.

Growing modes. Seeking U = e^{i beta sqrt(eta) t + i eta y} V(sqrt(eta) x)
with z = sqrt(eta) x and a~ = eps |z|^alpha, eps = eta^{-alpha/2}, gives

    v = (i / beta) (d_z - i z a~) u,    w = -(z / beta) (1 + a~^2) u,
    (-d_z^2 + z^2 + i eps (alpha + 1) |z|^alpha) u = beta^2 u.

The mode grows when Im beta < 0, i.e. beta = -sqrt(mu) for the lowest
eigenvalue mu, at the rate sqrt(eta) Im sqrt(mu).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
from scipy import integrate, special

from .errors import (ConvergenceError, DomainError, EvolutionError, FitError, HypothesisViolation)
from .grid import GridFunction
from .symbols.builtins import example1
from .symbols.family import SymbolFamily
from .wavepacket import DyadicFrame, SymField, energy, line_coefficients

TAPER_START = 0.8


def quintic(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10 - 15 * t + 6 * t * t)


def localize(x: np.ndarray, L: float, start: float = TAPER_START) -> np.ndarray:
    """x * chi(x) with chi = 1 on |x| <= start*L, tapering to 0 at |x| = L."""
    if not 0 < start < 1:
        raise DomainError("taper start must lie in (0, 1)")
    chi = 1.0 - quintic((np.abs(x) - start * L) / ((1 - start) * L))
    return x * chi


# ---------------------------------------------------------------------------
# time stepping


@dataclass
class EvolutionProblem:
    """Cauchy problem on the grid of ``u0``.

    A two-dimensional family on a one-dimensional grid acts on the
    y-mode e^{i eta y}. ``B`` is a constant matrix or a callable of x
    returning (n, N, N); ``f(t)`` returns values shaped like ``u0``.

    After every step the exponential filter exp(-36 (|k|/k_Nyquist)^order)
    is applied; it suppresses aliasing-driven grid-scale growth that
    collocation of non-symmetric variable coefficients otherwise shows.
    """

    fam: SymbolFamily
    u0: GridFunction
    T: float
    dt: float | None = None
    params: dict | None = None
    eta: float | None = None
    B: np.ndarray | Callable | None = None
    f: Callable | None = None
    stride: int = 1
    taper: float | None = TAPER_START  # None: coefficients used as given (periodic ones)
    filter_order: int | None = 36
    scheme: str = "rk4"


@dataclass
class Trajectory:
    times: list[float]
    snaps: list[GridFunction]
    t_steps: np.ndarray  # time of every step, including 0
    norms: np.ndarray  # ||u|| at every step
    f_norms: np.ndarray
    dt: float
    dt_max: float
    diagnostics: dict = field(default_factory=dict)


def _spectral_radius(M: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvals(M)).max()) if M.size else 0.0


def evolve(p: EvolutionProblem) -> Trajectory:
    """Pseudospectral RK4. Raises EvolutionError on non-finite values."""
    if p.scheme != "rk4":
        raise DomainError(f"unknown scheme {p.scheme!r}")
    if not p.T > 0:
        raise DomainError("final time must be positive")
    u0 = p.u0
    fam = p.fam
    if u0.ncomp != fam.N:
        raise DomainError(f"initial data has {u0.ncomp} components, family has N={fam.N}")
    reduced = u0.dims == 1 and fam.d == 2
    if reduced and p.eta is None:
        raise HypothesisViolation("a y-wavenumber eta is required for a 2-D family on a 1-D grid")
    if not reduced and u0.dims != fam.d:
        raise HypothesisViolation(f"family has {fam.d} space dimensions, grid has {u0.dims}")

    x = u0.x if p.taper is None else localize(u0.x, u0.L, p.taper)
    C = line_coefficients(fam, x, p.params)
    A0inv = np.linalg.inv(C[:, 0])
    A = np.einsum("xij,xkjl->xkil", A0inv, C[:, 1:])
    Bm = None
    if p.B is not None:
        Braw = p.B(x) if callable(p.B) else np.broadcast_to(np.asarray(p.B, dtype=complex), C[:, 0].shape)
        Bm = np.einsum("xij,xjl->xil", A0inv, np.asarray(Braw, dtype=complex))

    h = u0.h
    rho = [_spectral_radius(A[:, k]) for k in range(fam.d)]
    if reduced:
        c_eff = rho[0] + abs(p.eta) * h * rho[1]
    else:
        c_eff = sum(rho)
    if Bm is not None:
        c_eff += h * _spectral_radius(Bm) / np.pi
    dt_max = 0.5 * h / c_eff if c_eff > 0 else p.T
    if p.dt is None:
        steps = int(np.ceil(p.T / dt_max - 1e-9))
    else:
        if p.dt > dt_max * (1 + 1e-12):
            raise HypothesisViolation(f"CFL violated: dt={p.dt:.4g} exceeds 0.5*h/c = {dt_max:.4g}")
        steps = int(np.ceil(p.T / p.dt - 1e-9))
    steps = max(steps, 1)
    dt = p.T / steps

    axes = tuple(range(1, u0.dims + 1))
    ks = [k for k in u0.kmesh()]
    for k in ks:
        k[np.isclose(np.abs(k), u0.nyquist)] = 0.0
    ik = [1j * k for k in ks]
    filt = None
    if p.filter_order:
        kr = np.sqrt(sum(k * k for k in u0.kmesh())) / u0.nyquist
        filt = np.exp(-36.0 * kr ** p.filter_order)
    if u0.dims == 1:
        op_sum = "xij,jx->ix"
    else:
        op_sum = "xij,jxy->ixy"

    def operator(v):
        vh = np.fft.fftn(v, axes=axes)
        out = np.einsum(op_sum, A[:, 0], np.fft.ifftn(ik[0] * vh, axes=axes))
        if reduced:
            out += 1j * p.eta * np.einsum(op_sum, A[:, 1], v)
        elif u0.dims == 2:
            out += np.einsum(op_sum, A[:, 1], np.fft.ifftn(ik[1] * vh, axes=axes))
        if Bm is not None:
            out += np.einsum(op_sum, Bm, v)
        return out

    def forcing(t):
        if p.f is None:
            return None
        fv = np.asarray(p.f(t), dtype=complex)
        if fv.shape != u0.values.shape:
            raise DomainError("forcing must match the shape of the initial data")
        if u0.dims == 1:
            return np.einsum("xij,jx->ix", A0inv, fv)
        return np.einsum("xij,jxy->ixy", A0inv, fv)

    def rhs(t, v):
        out = -operator(v)
        g = forcing(t)
        return out if g is None else out + g

    def fnorm(t):
        if p.f is None:
            return 0.0
        return float(np.sqrt(np.sum(np.abs(np.asarray(p.f(t))) ** 2) * h ** u0.dims))

    vol = h ** u0.dims
    v = u0.values.copy()
    norms = np.empty(steps + 1)
    fns = np.empty(steps + 1)
    norms[0] = np.sqrt(np.sum(np.abs(v) ** 2) * vol)
    fns[0] = fnorm(0.0)
    times, snaps = [0.0], [u0.like(v.copy())]
    stride = max(1, int(p.stride))
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(steps):
            t = n * dt
            k1 = rhs(t, v)
            k2 = rhs(t + dt / 2, v + dt / 2 * k1)
            k3 = rhs(t + dt / 2, v + dt / 2 * k2)
            k4 = rhs(t + dt, v + dt * k3)
            new = v + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            if filt is not None:
                new = np.fft.ifftn(filt * np.fft.fftn(new, axes=axes), axes=axes)
            if not np.all(np.isfinite(new)):
                raise EvolutionError(f"non-finite values at t={t + dt:.6g}; last finite state at t={t:.6g}",
                                     last=u0.like(v), t=t)
            v = new
            norms[n + 1] = np.sqrt(np.sum(np.abs(v) ** 2) * vol)
            fns[n + 1] = fnorm(t + dt)
            if (n + 1) % stride == 0 or n + 1 == steps:
                times.append((n + 1) * dt)
                snaps.append(u0.like(v.copy()))
    ratio = norms / norms[0] if norms[0] > 0 else np.zeros_like(norms)
    diag = {
        "steps": steps,
        "norm_initial": float(norms[0]),
        "norm_final": float(norms[-1]),
        "max_norm_ratio": float(ratio.max()),
        "conservation_defect": float(np.abs(ratio - 1).max()) if norms[0] > 0 else 0.0,
        "cfl_number": float(dt / dt_max),
        "filter_order": p.filter_order or 0,
    }
    return Trajectory(times, snaps, np.arange(steps + 1) * dt, norms, fns, dt, dt_max, diag)


def growth_rate(traj: Trajectory, window: tuple[float, float] = (1 / 3, 2 / 3)) -> float:
    """Least-squares slope of log ||u(t)|| over the given fraction of [0, T]."""
    t, nrm = traj.t_steps, traj.norms
    T = t[-1]
    sel = (t >= window[0] * T) & (t <= window[1] * T) & (nrm > 0)
    if sel.sum() < 2:
        raise FitError("fewer than two samples in the growth window")
    return float(np.polyfit(t[sel], np.log(nrm[sel]), 1)[0])


def growth_constant(traj: Trajectory) -> tuple[float, float]:
    """(C, gamma) with gamma the least-squares slope of log(||u||/||u0||) over
    [0, T] and C the smallest constant giving ||u(t)|| <= C e^{gamma t} ||u0||."""
    t, nrm = traj.t_steps, traj.norms
    if nrm[0] == 0:
        return 1.0, 0.0
    lr = np.log(nrm / nrm[0])
    gamma = float(np.polyfit(t, lr, 1)[0])
    C = float(np.exp(np.max(lr - gamma * t)))
    return C, gamma


# ---------------------------------------------------------------------------
# energy monitor


@dataclass
class EnergyMonitor:
    times: np.ndarray
    E: np.ndarray
    dEdt: np.ndarray
    ratio: np.ndarray
    max_ratio: float


def energy_monitor(traj: Trajectory, S_field: SymField | None = None, fam: SymbolFamily | None = None,
                   frame: DyadicFrame | None = None) -> EnergyMonitor:
    """E_t on every snapshot, centred differences dE/dt, and the ratios
    |dE/dt| / (||f|| ||u|| + ||u||^2)."""
    if len(traj.snaps) < 3:
        raise HypothesisViolation("energy monitor needs at least three snapshots")
    if fam is not None and traj.snaps[0].ncomp != fam.N:
        raise DomainError("trajectory and family disagree on the number of components")
    times = np.asarray(traj.times)
    frame = frame or DyadicFrame.for_grid(traj.snaps[0])
    E = np.array([energy(s, S_field, frame).E for s in traj.snaps])
    dE = np.gradient(E, times, edge_order=2)
    unorm = np.array([s.norm() for s in traj.snaps])
    fn = np.interp(times, traj.t_steps, traj.f_norms)
    denom = fn * unorm + unorm ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0, np.abs(dE) / denom, 0.0)
    return EnergyMonitor(times, E, dE, ratio, float(ratio.max()))


# ---------------------------------------------------------------------------
# oscillator eigenproblem


def hermite_functions(nmax: int, z: np.ndarray) -> np.ndarray:
    """Orthonormal Hermite functions psi_0..psi_{nmax-1} at ``z``."""
    z = np.asarray(z, dtype=float)
    psi = np.zeros((nmax,) + z.shape)
    psi[0] = np.pi ** -0.25 * np.exp(-z * z / 2)
    if nmax > 1:
        psi[1] = np.sqrt(2.0) * z * psi[0]
    for n in range(2, nmax):
        psi[n] = np.sqrt(2.0 / n) * z * psi[n - 1] - np.sqrt((n - 1) / n) * psi[n - 2]
    return psi


def potential_matrix(alpha: float, n_modes: int) -> np.ndarray:
    """<psi_2j, |z|^alpha psi_2k> on the even Hermite functions.

    Gauss-Jacobi on the half line with weight (1+s)^alpha absorbs the
    singular factor, so the rule is exact up to the truncation at
    |z| = sqrt(4 n_modes + 1) + 10, beyond which the functions are negligible.
    """
    nfull = 2 * n_modes
    Z = np.sqrt(2 * nfull + 1) + 10
    s, w = special.roots_jacobi(nfull + 200, 0.0, alpha)
    z = (s + 1) * Z / 2
    w = w * (Z / 2) ** (alpha + 1)
    psi = hermite_functions(nfull, z)[0::2]
    return 2 * (psi * w) @ psi.T


@dataclass
class OscillatorResult:
    alpha: float
    eps: float
    beta_sq: complex
    beta: complex  # growing root, Im beta < 0
    coeffs: np.ndarray  # even Hermite coefficients of the ground state
    n_modes: int
    residual: float
    history: list[tuple[int, complex, float]]
    direct_residuals: dict  # candidate beta^2 -> residual of the ODE

    def groundstate(self, z) -> np.ndarray:
        psi = hermite_functions(2 * len(self.coeffs), np.asarray(z, dtype=float))[0::2]
        return np.tensordot(self.coeffs, psi, axes=1)


def _lowest_eigenpair(H: np.ndarray, shift: complex, tol: float = 1e-13, maxit: int = 50):
    """Inverse iteration with the complex-symmetric Rayleigh quotient (H = H^T)."""
    n = len(H)
    x = np.zeros(n, dtype=complex)
    x[0] = 1.0
    shift = shift - 0.1  # never exactly on an eigenvalue
    lu = sla.lu_factor(H - shift * np.eye(n))
    mu = shift
    for _ in range(maxit):
        x = sla.lu_solve(lu, x)
        x /= np.linalg.norm(x)
        mu = (x @ H @ x) / (x @ x)
        res = np.linalg.norm(H @ x - mu * x)
        if res < tol * max(1.0, abs(mu)):
            break
    return mu, x, float(np.linalg.norm(H @ x - mu * x))


def _ode_residual(res: OscillatorResult, beta_sq: complex) -> float:
    """|| (beta^2 + d_z^2 - z^2 - i eps (alpha+1) |z|^alpha) u || / ||u|| on a fine grid."""
    n, Lz = 2048, 16.0
    g = GridFunction.from_function(lambda z: res.groundstate(z), n, Lz)
    z = g.x
    u = g.values[0]
    upp = g.derivative().derivative().values[0]
    r = beta_sq * u + upp - z * z * u - 1j * res.eps * (res.alpha + 1) * np.abs(z) ** res.alpha * u
    return float(np.linalg.norm(r) / np.linalg.norm(u))


def oscillator_eigen(alpha: float, eps: float, n_modes: int = 32, max_modes: int = 2048,
                     tol: float = 1e-8) -> OscillatorResult:
    """Lowest eigenvalue of -d^2 + z^2 + i eps (alpha+1) |z|^alpha on even functions.

    The Hermite basis is doubled until the eigenvalue moves by at most
    ``tol``. The sign convention is settled by substituting the ground
    state into the ODE for beta^2 = mu and for beta^2 = -conj(mu).
    """
    if n_modes < 32:
        raise DomainError("at least 32 Hermite modes are required")
    if alpha < 0:
        raise DomainError("alpha must be non-negative")
    history: list[tuple[int, complex, float]] = []
    prev = None
    m = n_modes
    while True:
        V = potential_matrix(alpha, m)
        H = np.diag(4.0 * np.arange(m) + 1.0).astype(complex) + 1j * eps * (alpha + 1) * V
        shift = 1.0 + 1j * eps * (alpha + 1) * V[0, 0] if prev is None else prev
        mu, x, resid = _lowest_eigenpair(H, shift)
        history.append((m, complex(mu), resid))
        if prev is not None and abs(mu - prev) <= tol:
            break
        if 2 * m > max_modes:
            raise ConvergenceError(f"oscillator eigenvalue not settled at {m} modes "
                                   f"(last change {abs(mu - prev) if prev is not None else float('nan'):.2e})",
                                   history)
        prev = mu
        m *= 2
    if resid > tol:
        raise ConvergenceError(f"eigenpair residual {resid:.2e} above {tol:.0e}", history)
    # normalize the ground state: real positive value at z = 0
    psi0 = hermite_functions(2 * m, np.zeros(1))[0::2, 0]
    x = x / (x @ psi0)
    x = x / np.linalg.norm(x)
    mu = complex(mu)
    beta = -np.sqrt(mu)
    out = OscillatorResult(float(alpha), float(eps), mu, complex(beta), x, m, resid, history, {})
    out.direct_residuals = {"mu": _ode_residual(out, mu), "minus_conj_mu": _ode_residual(out, -np.conj(mu))}
    return out


def first_order_shift(alpha: float) -> float:
    """lambda_1 = (alpha+1) int |x|^alpha e^{-x^2} dx / int e^{-x^2} dx."""
    if not 0 <= alpha < 1:
        raise DomainError("alpha must lie in [0, 1)")
    num, _ = integrate.quad(lambda x: x ** alpha * np.exp(-x * x), 0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
    return float((alpha + 1) * 2 * num / np.sqrt(np.pi))


def first_order_shift_gamma(alpha: float) -> float:
    """Closed form (alpha+1) Gamma((alpha+1)/2) / Gamma(1/2)."""
    return float((alpha + 1) * special.gamma((alpha + 1) / 2) / special.gamma(0.5))


# ---------------------------------------------------------------------------
# mode growth


def mode_profile(z: np.ndarray, u: np.ndarray, beta: complex, alpha: float, eps: float) -> np.ndarray:
    """(u, v, w) on a periodic z-grid from the first component."""
    g = GridFunction(u[None], float(-z[0]))
    du = g.derivative().values[0]
    at = eps * np.abs(z) ** alpha
    v = 1j / beta * (du - 1j * z * at * u)
    w = -z / beta * (1 + at * at) * u
    return np.stack([u, v, w])


@dataclass
class GrowthReport:
    alpha: float
    eta_list: list[float]
    sigma: list[float]
    fit_exponent: float
    fit_prefactor: float
    r2: float
    dropped: list[float] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eta", "sigma"])
        for e, s in zip(self.eta_list, self.sigma):
            w.writerow([f"{e:.10g}", f"{s:.10g}"])
        return buf.getvalue()

    def summary(self) -> dict:
        return {"alpha": self.alpha, "eta": list(self.eta_list), "sigma": list(self.sigma),
                "fit_exponent": self.fit_exponent, "fit_prefactor": self.fit_prefactor,
                "r2": self.r2, "dropped": list(self.dropped), "flags": list(self.flags)}


def power_fit(xs, ys) -> tuple[float, float, float]:
    """ys ~ g xs^p by least squares in log-log; returns (p, g, r2)."""
    lx, ly = np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float))
    p, c = np.polyfit(lx, ly, 1)
    pred = p * lx + c
    ss = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1 - float(np.sum((ly - pred) ** 2)) / ss if ss > 0 else 1.0
    return float(p), float(np.exp(c)), r2


def zframe_problem(fam: SymbolFamily, alpha: float, eta: float, T: float, n: int = 256, Lz: float = 16.0,
                   data: str = "gaussian", dt: float | None = None) -> EvolutionProblem:
    """y-mode problem on [-Lz, Lz) / sqrt(eta), a fixed grid in z = sqrt(eta) x."""
    if data not in ("ansatz", "gaussian"):
        raise DomainError(f"unknown data {data!r}")
    if data == "ansatz" and fam.N != 3:
        raise DomainError("ansatz data needs the 3x3 Example 1 system")
    g = GridFunction(np.zeros((fam.N, n)), Lz / np.sqrt(eta))
    z = g.x * np.sqrt(eta)
    if data == "ansatz":
        eps = eta ** (-alpha / 2)
        osc = oscillator_eigen(alpha, eps)
        vals = mode_profile(z, osc.groundstate(z).astype(complex), osc.beta, alpha, eps)
    else:
        vals = np.zeros((fam.N, n), dtype=complex)
        vals[0] = np.exp(-z * z / 2)
    return EvolutionProblem(fam, g.like(vals), T, dt=dt, eta=eta, stride=10 ** 9)


def refinement_growth(fam: SymbolFamily, eta: float, T: float = 1.0, n_list: Sequence[int] = (256, 512),
                      Lz: float = 16.0) -> list[dict]:
    """(C, gamma) of ||u(t)|| <= C e^{gamma t} ||u0|| for each n, at the CFL step and at half of it."""
    rows = []
    for n in n_list:
        base = evolve(zframe_problem(fam, 0.0, eta, T, n, Lz))
        half = evolve(zframe_problem(fam, 0.0, eta, T, n, Lz, dt=base.dt / 2))
        for tr in (base, half):
            C, gamma = growth_constant(tr)
            rows.append({"n": int(n), "dt": tr.dt, "C": C, "gamma": gamma,
                         "max_norm_ratio": tr.diagnostics["max_norm_ratio"]})
    return rows


def _mode_sigma(job: tuple) -> tuple[float, float | None, str | None]:
    fam, alpha, eta, T, n, Lz, data, saturation = job
    try:
        traj = evolve(zframe_problem(fam, alpha, eta, T, n, Lz, data))
    except EvolutionError:
        return eta, None, f"eta={eta:g}: non-finite values, dropped"
    if traj.norms.max() > saturation * traj.norms[0]:
        return eta, None, f"eta={eta:g}: growth saturated, dropped"
    return eta, growth_rate(traj), None


def mode_growth(alpha: float, eta_list: Sequence[float], T: float, n: int = 256, Lz: float = 16.0,
                data: str = "gaussian", fam: SymbolFamily | None = None, saturation: float = 1e200,
                mapper: Callable = map) -> GrowthReport:
    """Growth rates sigma(eta) of the y-mode e^{i eta y} and the fit sigma = g eta^p.

    Each eta is evolved on the x-interval [-Lz, Lz) / sqrt(eta), i.e. one
    fixed grid in z = sqrt(eta) x. ``data`` is "ansatz" (oscillator ground
    state completed by the mode relations) or "gaussian" (e^{-z^2/2} e_1).
    ``mapper`` runs the independent evolutions (``map`` or an executor's).
    """
    fam = fam if fam is not None else example1(a="holder", alpha=alpha)
    jobs = [(fam, float(alpha), float(eta), T, n, Lz, data, saturation) for eta in eta_list]
    sig, kept, dropped, flags = [], [], [], []
    for eta, s, flag in mapper(_mode_sigma, jobs):
        if s is None:
            dropped.append(eta)
            flags.append(flag)
        else:
            kept.append(eta)
            sig.append(s)
    if any(s <= 0 for s in sig) or len(sig) < 4:
        if len(sig) < 4:
            flags.append("fewer than four frequencies kept, no fit")
        else:
            flags.append("no growth at some frequencies, no fit")
        return GrowthReport(float(alpha), kept, sig, float("nan"), float("nan"), float("nan"), dropped, flags)
    p, gpref, r2 = power_fit(kept, sig)
    return GrowthReport(float(alpha), kept, sig, p, gpref, r2, dropped, flags)


# ---------------------------------------------------------------------------
# exact growing packets (alpha = 0)


def bump(s):
    """C-infinity bump supported in [1, 2], maximal value 1 at s = 1.5."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > 1) & (s < 2)
    q = (s[inside] - 1) * (2 - s[inside])
    out[inside] = np.exp(4.0 - 1.0 / q)
    return out


@dataclass
class PacketFamily:
    """U(t, x, y) = sum_k c_k e^{i beta sqrt(eta_k) t + i eta_k y} e^{-eta_k x^2 / 2} (U0 + sqrt(eta_k) x U1).

    The eta_k are multiples of pi / L, so U is periodic in y with the
    period 2L of the x-grid; norms follow from Parseval in y.
    """

    lam: float
    x: np.ndarray
    L: float
    etas: np.ndarray
    c: np.ndarray
    beta: complex
    U0: np.ndarray
    U1: np.ndarray

    def profiles(self, t: float) -> np.ndarray:
        """Mode profiles (K, 3, n) including the time factor and c_k."""
        z = np.sqrt(self.etas)[:, None] * self.x[None]
        base = np.exp(-z * z / 2)[:, None] * (self.U0[None, :, None] + z[:, None] * self.U1[None, :, None])
        amp = self.c * np.exp(1j * self.beta * np.sqrt(self.etas) * t)
        return amp[:, None, None] * base

    def norm(self, t: float) -> float:
        h = self.x[1] - self.x[0]
        P = self.profiles(t)
        return float(np.sqrt(2 * self.L * np.sum(np.abs(P) ** 2) * h))

    def amplification(self, t: float) -> float:
        return self.norm(t) / self.norm(0.0)

    def residual(self, t: float) -> float:
        """|| L U || / (sqrt(2 lam) ||U||), the packet's frequency scale removed."""
        P = self.profiles(t)
        n = len(self.x)
        k = np.fft.fftfreq(n, d=self.x[1] - self.x[0]) * 2 * np.pi
        dP = np.fft.ifft(1j * k * np.fft.fft(P, axis=-1), axis=-1)
        B = np.array([[0, 1, 1], [-1, 0, 0], [2, 0, 0]], dtype=complex)
        A1 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
        R = 1j * self.beta * np.sqrt(self.etas)[:, None, None] * P
        R += np.einsum("ij,kjx->kix", A1, dP)
        R += 1j * self.etas[:, None, None] * self.x[None, None, :] * np.einsum("ij,kjx->kix", B, P)
        h = self.x[1] - self.x[0]
        rn = np.sqrt(2 * self.L * np.sum(np.abs(R) ** 2) * h)
        return float(rn / (np.sqrt(2 * self.lam) * self.norm(t)))

    def to_grid(self, t: float) -> GridFunction:
        """Synthesize on the square grid (x, y); needs Nyquist above 2 lam."""
        n = len(self.x)
        if np.pi * n / (2 * self.L) <= self.etas.max():
            raise DomainError("grid too coarse in y for the packet frequencies")
        P = self.profiles(t)
        ph = np.exp(1j * self.etas[:, None] * self.x[None])  # y-grid equals x-grid
        return GridFunction(np.einsum("kcx,ky->cxy", P, ph), self.L)


def illposed_packet(lam: float, alpha: float = 0.0, phi: Callable | None = None, n: int | None = None,
                    L: float = np.pi, w_factor: str = "z", tol: float = 1e-4) -> PacketFamily:
    """Superposition of exact growing modes with eta in [lam, 2 lam].

    ``w_factor`` "z" uses w = -(2 z / beta) u; "none" drops the factor z
    (kept only to show by residual that it does not solve the system).
    """
    if alpha != 0:
        raise HypothesisViolation("exact packets exist only for alpha = 0")
    if lam < 1:
        raise DomainError("lambda must be >= 1")
    phi = phi or bump
    if n is None:
        need = 20 * L * np.sqrt(2 * lam) / np.pi
        n = 1 << int(np.ceil(np.log2(max(need, 64))))
    x = -L + 2 * L / n * np.arange(n)
    d_eta = np.pi / L
    etas = np.arange(np.ceil(lam / d_eta), np.floor(2 * lam / d_eta) + 1) * d_eta
    weights = phi(etas / lam) * d_eta
    keep = weights > 0
    etas, weights = etas[keep], weights[keep]
    if len(etas) < 2:
        raise DomainError("too few frequency nodes in [lam, 2 lam]; enlarge L")
    beta = -np.sqrt(1 + 1j)
    U0 = np.array([1, 0, 0], dtype=complex)
    if w_factor == "z":
        U1 = np.array([0, (1 - 1j) / beta, -2 / beta], dtype=complex)
    elif w_factor == "none":
        U1 = np.array([0, (1 - 1j) / beta, 0], dtype=complex)
        U0 = U0 + np.array([0, 0, -2 / beta])
    else:
        raise DomainError(f"unknown w_factor {w_factor!r}")
    pk = PacketFamily(float(lam), x, float(L), etas, weights.astype(complex), complex(beta), U0, U1)
    if w_factor == "z":
        r = pk.residual(0.0)
        if r > tol:
            raise ConvergenceError(f"packet residual {r:.2e} above {tol:.0e} "
                                   f"(n={n}, {len(etas)} frequency nodes, spacing {d_eta:.3g})")
    return pk
