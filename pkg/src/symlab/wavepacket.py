"""Gaussian wave packets, dyadic Littlewood-Paley pieces and the energy
built from them.

Conventions. The transform at scale lambda is

    W u(x, xi) = (2 pi)^{-d/2} (lambda/pi)^{d/4} int e^{i(x-y)xi - lambda|x-y|^2/2} u(y) dy,

computed for B = Id as W u(., xi) = (pi lambda)^{-d/4} IFFT(e^{-|xi-eta|^2/(2 lambda)} FFT u).
Frequencies xi are sampled on a half-offset lattice of spacing
sqrt(lambda)/2, so sums over xi carry the weight (sqrt(lambda)/2)^d.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import erfc, logsumexp

from .errors import DomainError, HypothesisViolation, WrapAroundError
from .grid import GridFunction
from .matrix_core import batch_canonical_symmetrizer
from .symbols.family import SymbolFamily

WRAP_TOL = 1e-12
XI_EXTENT = 4.0  # Gaussian widths kept around a frequency shell


# ---------------------------------------------------------------------------
# dyadic frame


def smoothstep(t):
    """Quintic smoothstep composed with itself: flat to second order at 0 and 1."""
    t = np.clip(t, 0.0, 1.0)
    s = t * t * t * (10 - 15 * t + 6 * t * t)
    return s * s * s * (10 - 15 * s + 6 * s * s)


def phi0(r):
    """1 on r <= 1, 0 on r >= 2."""
    return 1.0 - smoothstep(np.asarray(r, dtype=float) - 1.0)


def phi(j: int, r):
    return phi0(np.asarray(r, dtype=float) / 2.0 ** j)


class DyadicFrame:
    """Windows theta_0 = phi_0, theta_j = phi_j - phi_{j-1} on a grid's frequency lattice.

    ``J`` defaults to the first level with phi_J = 1 on the whole lattice,
    so the windows sum to one exactly. With a smaller ``J`` the uncovered
    part is reported by :meth:`tail_mass`.
    """

    def __init__(self, n: int, L: float, dims: int = 1, J: int | None = None):
        probe = GridFunction(np.zeros((1,) + (n,) * dims), L)
        self.n, self.L, self.dims = n, float(L), dims
        self.kabs = probe.kabs()
        kmax = float(self.kabs.max())
        self.J_full = max(0, int(np.ceil(np.log2(max(kmax, 1.0)))))
        self.J = self.J_full if J is None else int(J)
        if self.J < 0:
            raise DomainError("top level must be non-negative")
        phis = [phi(j, self.kabs) for j in range(self.J + 1)]
        self.phis = np.stack(phis)
        self.thetas = np.concatenate([self.phis[:1], np.diff(self.phis, axis=0)])
        sq = np.clip(np.concatenate([self.phis[:1] ** 2, np.diff(self.phis ** 2, axis=0)]), 0.0, None)
        self.tight = np.sqrt(sq)

    @classmethod
    def for_grid(cls, u: GridFunction, J: int | None = None) -> "DyadicFrame":
        return cls(u.n, u.L, u.dims, J)

    @property
    def levels(self) -> range:
        return range(self.J + 1)

    def check(self, u: GridFunction) -> None:
        if (u.n, u.dims) != (self.n, self.dims) or not np.isclose(u.L, self.L):
            raise DomainError(f"frame built for n={self.n}, L={self.L}, dims={self.dims} "
                              f"but grid has n={u.n}, L={u.L}, dims={u.dims}")

    def partition_defect(self) -> float:
        covered = self.phis[-1]
        return float(np.abs(self.thetas.sum(axis=0) - covered).max())

    def tail_mass(self, u: GridFunction) -> float:
        """Relative L^2 mass of u outside the represented levels."""
        self.check(u)
        uh = u.fft()
        tot = np.sum(np.abs(uh) ** 2)
        if tot == 0:
            return 0.0
        return float(np.sqrt(np.sum(np.abs((1 - self.phis[-1]) * uh) ** 2) / tot))

    def apply(self, u: GridFunction, j: int, tight: bool = False) -> GridFunction:
        self.check(u)
        w = (self.tight if tight else self.thetas)[j]
        return u.from_fft(w * u.fft())


def dyadic_decompose(u: GridFunction, frame: DyadicFrame, tight: bool = False) -> list[GridFunction]:
    """Theta_j u for j = 0..J (or the square-root windows with ``tight``)."""
    frame.check(u)
    uh = u.fft()
    w = frame.tight if tight else frame.thetas
    return [u.from_fft(w[j] * uh) for j in frame.levels]


# ---------------------------------------------------------------------------
# wave packet transform


@dataclass
class WavePacketGrid:
    lam: float
    x: np.ndarray  # spatial axis (shared by all dims)
    xi: np.ndarray  # (K, d) frequency samples
    weight: float  # quadrature weight per xi sample
    values: np.ndarray  # (ncomp, K, n[, n])

    def norm(self) -> float:
        h = self.x[1] - self.x[0]
        d = self.xi.shape[1]
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.weight * h ** d))


def check_wrap(L: float, lam: float) -> float:
    """Gaussian window mass outside [-L, L); raises when above WRAP_TOL."""
    tail = float(erfc(L * np.sqrt(lam)))
    if tail > WRAP_TOL:
        raise WrapAroundError(
            f"Gaussian wrap-around: window mass {tail:.2e} outside the period for lambda={lam}, L={L}")
    return tail


def xi_lattice(lam: float, dims: int, rmax: float, rmin: float = 0.0, extent: float = XI_EXTENT) -> tuple[np.ndarray, float]:
    """Half-offset lattice of spacing sqrt(lambda)/2 covering the shell
    rmin <= |xi| <= rmax widened by ``extent`` Gaussian widths."""
    h = np.sqrt(lam) / 2
    R = rmax + extent * np.sqrt(lam)
    m = int(np.ceil(R / h))
    ax = (np.arange(-m, m) + 0.5) * h
    mesh = np.meshgrid(*([ax] * dims), indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    r = np.linalg.norm(pts, axis=-1)
    keep = (r <= R) & (r >= rmin - extent * np.sqrt(lam))
    return pts[keep], h ** dims


def _gaussian_rows(xi: np.ndarray, kmesh: list[np.ndarray], lam: float) -> np.ndarray:
    d2 = sum((xi[:, k].reshape((-1,) + (1,) * len(kmesh)) - kmesh[k][None]) ** 2 for k in range(len(kmesh)))
    return np.exp(-d2 / (2 * lam))


def packet_chunks(u: GridFunction, lam: float, xi: np.ndarray, chunk: int = 64):
    """Yield (slice, W) with W of shape (ncomp, chunk, n[, n]) for B = Id."""
    uh = u.fft()
    km = u.kmesh()
    c = (np.pi * lam) ** (-u.dims / 4)
    axes = tuple(range(2, 2 + u.dims))
    for s in range(0, len(xi), chunk):
        sl = slice(s, min(s + chunk, len(xi)))
        G = _gaussian_rows(xi[sl], km, lam)
        yield sl, c * np.fft.ifftn(G[None] * uh[:, None], axes=axes)


def wavepacket_transform(u: GridFunction, lam: float, B: Callable | None = None, xi: np.ndarray | None = None,
                         extent: float = XI_EXTENT) -> WavePacketGrid:
    """W_{lambda,B} u on the x-grid of ``u`` and a frequency lattice.

    With ``B`` None the FFT path is used. Otherwise ``B(x, y)`` returns the
    kernel on the grid (shape (n, n) in 1D, (n, n, n, n) in 2D) and the
    integral is summed directly with periodically wrapped x - y. The
    direct sum is a trapezoid rule, so it aliases for |xi| close to twice
    the Nyquist wavenumber minus the band of u.
    """
    if lam < 1:
        raise DomainError("scale lambda must be >= 1")
    check_wrap(u.L, lam)
    if xi is None:
        xi, weight = xi_lattice(lam, u.dims, float(u.kabs().max()), extent=extent)
    else:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        if xi.shape[1] != u.dims:
            xi = xi.reshape(-1, u.dims)
        weight = (np.sqrt(lam) / 2) ** u.dims
    if B is None:
        vals = np.concatenate([W for _, W in packet_chunks(u, lam, xi)], axis=1)
    else:
        vals = _direct_transform(u, lam, B, xi)
    return WavePacketGrid(lam, u.x, xi, weight, vals)


def _direct_transform(u: GridFunction, lam: float, B: Callable, xi: np.ndarray) -> np.ndarray:
    d, h, L, x = u.dims, u.h, u.L, u.x
    diff = (x[:, None] - x[None, :] + L) % (2 * L) - L
    c = (2 * np.pi) ** (-d / 2) * (lam / np.pi) ** (d / 4) * h ** d
    if d == 1:
        Bm = np.asarray(B(x[:, None], x[None, :]), dtype=complex) * np.ones((u.n, u.n))
        G = np.exp(-0.5 * lam * diff ** 2) * Bm
        ph = np.exp(1j * diff[None] * xi[:, 0, None, None])
        return c * np.einsum("kxy,xy,cy->ckx", ph, G, u.values)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    Bm = np.asarray(B((X1[:, :, None, None], X2[:, :, None, None]), (X1[None, None], X2[None, None])), dtype=complex)
    Bm = Bm * np.ones((u.n,) * 4)
    D1 = diff[:, None, :, None]
    D2 = diff[None, :, None, :]
    G = np.exp(-0.5 * lam * (D1 ** 2 + D2 ** 2)) * Bm
    out = np.empty((u.ncomp, len(xi), u.n, u.n), dtype=complex)
    for k, (a, b) in enumerate(xi):
        K = G * np.exp(1j * (D1 * a + D2 * b))
        out[:, k] = c * np.einsum("xzyw,cyw->cxz", K, u.values)
    return out


def isometry_defect(u: GridFunction, lam: float) -> float:
    """| ||W u||^2 - ||u||^2 | / ||u||^2 computed chunk by chunk."""
    check_wrap(u.L, lam)
    xi, weight = xi_lattice(lam, u.dims, float(u.kabs().max()))
    tot = 0.0
    for _, W in packet_chunks(u, lam, xi):
        tot += float(np.sum(np.abs(W) ** 2))
    tot *= weight * u.h ** u.dims
    n2 = u.norm() ** 2
    return abs(tot - n2) / n2


# ---------------------------------------------------------------------------
# localization


@dataclass
class LocalizationResult:
    j: int
    ratio: float
    log2_ratio: float
    skipped: bool = False


def localization_probe(u: GridFunction, j: int, n: int, m: int = 0, alpha: Sequence[int] | int = 0,
                       frame: DyadicFrame | None = None) -> LocalizationResult:
    """|| |xi|^m (1 - phi_{j+2}) W_{2^j} d^alpha Theta_j u || / (2^{-jn} ||Theta_j u||).

    The left side is evaluated in log space from the frequency-side
    Gaussian identity, so super-exponentially small values stay finite.
    """
    frame = frame or DyadicFrame.for_grid(u)
    if not 0 <= j <= frame.J:
        raise DomainError(f"level {j} outside frame range 0..{frame.J}")
    lam = 2.0 ** j
    check_wrap(u.L, lam)
    alpha = (alpha,) if np.isscalar(alpha) else tuple(alpha)
    alpha = alpha + (0,) * (u.dims - len(alpha))
    uh = u.fft()
    base = frame.thetas[j] * uh
    theta_norm = np.sqrt(np.sum(np.abs(base) ** 2) * u.h ** u.dims / u.n ** u.dims)
    if theta_norm == 0:
        return LocalizationResult(j, float("nan"), float("nan"), True)
    km = u.kmesh()
    mult = np.ones_like(km[0], dtype=complex)
    for k, a in enumerate(alpha):
        mult = mult * (1j * km[k]) ** a
    mass = np.sum(np.abs(mult * base) ** 2, axis=0) * u.h ** u.dims / u.n ** u.dims
    sel = mass > 0
    if not np.any(sel):
        return LocalizationResult(j, 0.0, float("-inf"))
    eta = np.stack([k[sel] for k in km], axis=-1)
    logm = np.log(mass[sel])
    # xi samples where 1 - phi_{j+2} > 0
    r_lo = 2.0 ** (j + 2)
    r_hi = float(np.linalg.norm(eta, axis=-1).max()) + r_lo + 40 * np.sqrt(lam)
    hxi = np.sqrt(lam) / 8
    ax = np.arange(-r_hi, r_hi + hxi, hxi)
    mesh = np.meshgrid(*([ax] * u.dims), indexing="ij")
    xi = np.stack([g.ravel() for g in mesh], axis=-1)
    r = np.linalg.norm(xi, axis=-1)
    cut = 1.0 - phi(j + 2, r)
    keep = cut > 0
    xi, r, cut = xi[keep], r[keep], cut[keep]
    with np.errstate(divide="ignore"):
        wlog = 2 * m * np.log(np.where(r > 0, r, 1.0)) + 2 * np.log(cut)
    log_terms = []
    for s in range(0, len(xi), 256):
        d2 = np.sum((xi[s:s + 256, None, :] - eta[None]) ** 2, axis=-1)
        log_terms.append(logsumexp(wlog[s:s + 256, None] - d2 / lam + logm[None]))
    log_lhs2 = logsumexp(log_terms) + u.dims * np.log(hxi) - (u.dims / 2) * np.log(np.pi * lam)
    log_ratio = 0.5 * log_lhs2 + j * n * np.log(2) - np.log(theta_norm)
    return LocalizationResult(j, float(np.exp(log_ratio)), float(log_ratio / np.log(2)))


def trend_slope(xs, ys) -> float:
    """Least-squares slope, ignoring non-finite samples (-inf means 'vanishes')."""
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    ok = np.isfinite(ys)
    if ok.sum() < 2:
        return float("-inf") if np.any(ys == -np.inf) else float("nan")
    return float(np.polyfit(xs[ok], ys[ok], 1)[0])


# ---------------------------------------------------------------------------
# symmetrizer fields on (x, xi)

SymField = Callable[[np.ndarray, np.ndarray], np.ndarray]
"""S(x, xi_unit): x of shape (M,) (first spatial coordinate), xi_unit of
shape (K, d); returns (M, K, N, N)."""


def constant_field(S) -> SymField:
    S = np.atleast_2d(np.asarray(S, dtype=complex))

    def fn(x, xi):
        return np.broadcast_to(S, (len(x), len(xi)) + S.shape)

    return fn


def line_coefficients(fam: SymbolFamily, x: np.ndarray, params: dict | None = None) -> np.ndarray:
    """A_0(x), ..., A_d(x) on the points ``x``; shape (M, d+1, N, N).

    The parameter named "x" follows the spatial coordinate; other
    parameters come from ``params``.
    """
    params = dict(params or {})
    x = np.asarray(x, dtype=float)
    names = [p.name for p in fam.params]
    a = np.zeros((len(x), len(names)))
    for k, name in enumerate(names):
        if name == "x":
            a[:, k] = x
        elif name in params:
            a[:, k] = params[name]
        else:
            raise HypothesisViolation(f"no value for parameter {name!r}")
    return fam.coefficients(a, check=False)


def coefficient_matrices(fam: SymbolFamily, x: np.ndarray, params: dict | None = None) -> np.ndarray:
    """A_0^{-1} A_k(x) for k = 1..d; shape (M, d, N, N)."""
    C = line_coefficients(fam, x, params)
    return np.linalg.solve(C[:, :1], C[:, 1:])


def canonical_field(fam: SymbolFamily, params: dict | None = None, cache_size: int = 64) -> SymField:
    """Canonical symmetrizer of sum_k xi_k A_0^{-1} A_k(x) on unit frequencies.

    Recent evaluations are memoised so that probes of derived fields on the
    same samples do not repeat the eigendecompositions.
    """
    cache: OrderedDict = OrderedDict()

    def fn(x, xi):
        x = np.ascontiguousarray(x, dtype=float)
        xi = np.ascontiguousarray(xi, dtype=float)
        key = (x.tobytes(), xi.tobytes())
        if key in cache:
            cache.move_to_end(key)
            return cache[key]
        A = coefficient_matrices(fam, x, params)
        M = np.einsum("kd,mdij->mkij", xi, A)
        S = batch_canonical_symmetrizer(M.reshape((-1,) + M.shape[2:])).reshape(M.shape)
        cache[key] = S
        if len(cache) > cache_size:
            cache.popitem(last=False)
        return S

    return fn


# ---------------------------------------------------------------------------
# energy


@dataclass
class EnergyResult:
    E: float
    norm2: float
    ratio: float
    c_meas: float
    C_meas: float
    min_eig: float
    max_eig: float
    tail_mass: float
    levels: list[tuple[int, float, float]] = field(default_factory=list)  # (j, E_j, mass_j)


def energy(u: GridFunction, S_field: SymField | None = None, frame: DyadicFrame | None = None,
           tol: float = 1e-10) -> EnergyResult:
    """Sum over levels of (S W_{2^j} Theta_j u, W_{2^j} Theta_j u) with S at (x, xi/|xi|).

    The square-root windows sqrt(phi_j^2 - phi_{j-1}^2) are used so that
    S = Id returns ||u||^2. c_meas and C_meas are the smallest and
    largest per-level ratios E_j / ||W Theta_j u||^2.
    """
    frame = frame or DyadicFrame.for_grid(u)
    frame.check(u)
    uh = u.fft()
    kmax = float(u.kabs().max())
    x = u.x
    E, emin, emax = 0.0, np.inf, -np.inf
    levels = []
    for j in frame.levels:
        lam = 2.0 ** j
        check_wrap(u.L, lam)
        v = u.from_fft(frame.tight[j] * uh)
        if not np.any(v.values):
            continue
        rmin = 0.0 if j == 0 else 2.0 ** (j - 1)
        xi, weight = xi_lattice(lam, u.dims, min(2.0 ** (j + 1), kmax), rmin)
        unit = xi / np.linalg.norm(xi, axis=-1, keepdims=True)
        Ej = mj = 0.0
        for sl, W in packet_chunks(v, lam, xi):
            # Gram over all but the first spatial axis
            if u.dims == 1:
                G = np.einsum("ckx,dkx->xkcd", W, W.conj())
            else:
                G = np.einsum("ckxy,dkxy->xkcd", W, W.conj())
            mj += float(np.real(np.einsum("xkcc->", G)))
            if S_field is None:
                Ej += float(np.real(np.einsum("xkcc->", G)))
                emin, emax = min(emin, 1.0), max(emax, 1.0)
                continue
            S = np.asarray(S_field(x, unit[sl]))
            ev = np.linalg.eigvalsh(0.5 * (S + np.swapaxes(S, -1, -2).conj()))
            if ev.min() <= tol:
                raise HypothesisViolation(f"non-positive symmetrizer sample (min eigenvalue {ev.min():.3g})")
            emin, emax = min(emin, float(ev.min())), max(emax, float(ev.max()))
            Ej += float(np.real(np.einsum("xkcd,xkdc->", S, G)))
        scale = weight * u.h ** u.dims
        Ej, mj = Ej * scale, mj * scale
        levels.append((j, Ej, mj))
        E += Ej
    n2 = u.norm() ** 2
    ratios = [e / m for _, e, m in levels if m > 1e-14 * n2]
    return EnergyResult(E, n2, E / n2 if n2 else float("nan"), min(ratios, default=float("nan")),
                        max(ratios, default=float("nan")), emin, emax, frame.tail_mass(u), levels)


# ---------------------------------------------------------------------------
# commutator probe


def apply_operator(fam: SymbolFamily, u: GridFunction, params: dict | None = None, eta: float | None = None) -> GridFunction:
    """sum_k A_0^{-1} A_k(x) d_k u.

    For a two-dimensional family acting on a one-dimensional grid the
    second derivative is the Fourier mode i*eta (coefficients must not
    depend on the second coordinate).
    """
    return apply_coefficients(coefficient_matrices(fam, u.x, params), u, eta)


def apply_coefficients(A: np.ndarray, u: GridFunction, eta: float | None = None) -> GridFunction:
    """sum_k A[:, k] d_k u for precomputed coefficients A of shape (n, d, N, N)."""
    d = A.shape[1]
    if u.dims == 1 and d == 2:
        if eta is None:
            raise HypothesisViolation("a y-wavenumber eta is required for a 2-D family on a 1-D grid")
        out = np.einsum("xij,jx->ix", A[:, 0], u.derivative(0).values)
        out += 1j * eta * np.einsum("xij,jx->ix", A[:, 1], u.values)
        return u.like(out)
    if u.dims != d:
        raise HypothesisViolation(f"family has {d} space dimensions, grid has {u.dims}")
    if d == 1:
        return u.like(np.einsum("xij,jx->ix", A[:, 0], u.derivative(0).values))
    out = np.einsum("xij,jxy->ixy", A[:, 0], u.derivative(0).values)
    out += np.einsum("xij,jxy->ixy", A[:, 1], u.derivative(1).values)
    return u.like(out)


@dataclass
class CommutatorProbe:
    lam: float
    ratio: float
    signed: float
    n_x: int
    n_xi: int


def commutator_energy_probe(u: GridFunction, S_field: SymField, fam: SymbolFamily, lam: float,
                            params: dict | None = None, eta: float | None = None,
                            mass_floor: float = 1e-14) -> CommutatorProbe:
    """|Re(psi_lambda S W u, W A u)| / ||u||^2 with A = sum_k A_0^{-1} A_k d_k.

    One-dimensional grids only. A two-dimensional family is reduced to the
    y-mode e^{i eta y}: the packet transform in y of that mode is the
    Gaussian (pi lambda)^{-1/4} e^{-(zeta-eta)^2/(2 lambda)}, so the zeta
    integral becomes a weighted sum. psi_lambda = phi_0(|xi| / lambda).
    Samples with negligible packet mass are not evaluated.
    """
    if u.dims != 1:
        raise HypothesisViolation("commutator probe implemented on one-dimensional grids")
    check_wrap(u.L, lam)
    Au = apply_operator(fam, u, params, eta)
    kmax = float(u.kabs().max())
    xi, wxi = xi_lattice(lam, 1, kmax)
    Wu = np.concatenate([W for _, W in packet_chunks(u, lam, xi)], axis=1)  # (N, K, n)
    WA = np.concatenate([W for _, W in packet_chunks(Au, lam, xi)], axis=1)
    mass = np.sum(np.abs(Wu) ** 2 + np.abs(WA) ** 2 / max(lam, 1.0) ** 2, axis=0)
    rows = mass.sum(axis=1) > mass_floor * mass.sum()
    cols = mass.sum(axis=0) > mass_floor * mass.sum()
    Wu, WA, xi = Wu[:, rows][:, :, cols], WA[:, rows][:, :, cols], xi[rows]
    x = u.x[cols]
    if fam.d == 1:
        zetas, zw = np.zeros(1), np.ones(1)
    else:
        hz = np.sqrt(lam) / 2
        m = int(np.ceil(XI_EXTENT * 2))
        zetas = eta + hz * np.arange(-m, m + 1)
        zw = hz * (np.pi * lam) ** -0.5 * np.exp(-(zetas - eta) ** 2 / lam)
    total = 0.0
    for zeta, w in zip(zetas, zw):
        full = xi if fam.d == 1 else np.column_stack([xi[:, 0], np.full(len(xi), zeta)])
        r = np.linalg.norm(full, axis=-1)
        psi = phi0(r / lam)
        on = psi > 0
        if not np.any(on):
            continue
        unit = full[on] / r[on, None]
        S = np.asarray(S_field(x, unit))  # (n_x, K, N, N)
        val = np.einsum("xkij,jkx,ikx->k", S, Wu[:, on], WA[:, on].conj())
        total += w * float(np.sum(psi[on] * val.real))
    total *= wxi * u.h
    n2 = u.norm() ** 2
    return CommutatorProbe(lam, abs(total) / n2, total / n2, int(cols.sum()), int(rows.sum()))


# ---------------------------------------------------------------------------
# discrete commutators


def discrete_commutator(fam: SymbolFamily, u: GridFunction, frame: DyadicFrame, j: int,
                        params: dict | None = None) -> GridFunction:
    """g_j = A(x, d)(Theta_j u) - Theta_j(A(x, d) u)."""
    frame.check(u)
    return apply_operator(fam, frame.apply(u, j), params) - frame.apply(apply_operator(fam, u, params), j)


def rough_control_field(base: SymField, R, amplitude: float = 0.5, center: float = 0.0) -> SymField:
    """base(x, xi) - amplitude * min(sqrt|x - center|, 1) * R.

    With R Hermitian but not symmetrizing the system, this is the Hölder-1/2
    negative control for :func:`commutator_energy_probe`.
    """
    R = np.asarray(R, dtype=complex)

    def fn(x, xi):
        w = amplitude * np.minimum(np.sqrt(np.abs(np.asarray(x) - center)), 1.0)
        return base(x, xi) - w[:, None, None, None] * R

    return fn
