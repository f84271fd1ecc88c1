"""Full symmetrizers, their kernel positivity and the passage to ordinary
symmetrizers in a (possibly new) time direction."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import (CharacteristicDirectionError, CutoffTooWideError, HypothesisViolation,
                      InconsistentSymmetrizerError, NotSemisimpleError)
from ..matrix_core import eigendecompose
from .analysis import (ConeChart, _direction_matrix, _unit, complement_basis, direction_certificate,
                       gradient_bound, sphere_samples)
from .family import SymbolFamily

KER_RTOL = 1e-8


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + np.swapaxes(M, -1, -2).conj())


def kernel_basis(L: np.ndarray, rtol: float = KER_RTOL) -> np.ndarray:
    """Orthonormal columns spanning the numerical kernel of ``L``."""
    _, s, Vh = np.linalg.svd(L)
    k = int(np.sum(s <= rtol * max(s[0], 1e-300)))
    return Vh[len(s) - k:].conj().T


class FullSymmetrizerField:
    """(a, xi_tilde) -> S(a, xi_tilde), homogeneous of degree zero.

    The frequency is normalised to the unit sphere before ``fn`` is called.
    ``c`` records a known positivity constant when available.
    """

    def __init__(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], c: float | None = None,
                 name: str = "full symmetrizer"):
        self._fn = fn
        self.c = c
        self.name = name

    def __call__(self, a, xi_tilde) -> np.ndarray:
        xi_tilde = np.asarray(xi_tilde, dtype=float)
        r = np.linalg.norm(xi_tilde)
        if r == 0:
            raise ValueError("full symmetrizer evaluated at the zero frequency")
        return np.asarray(self._fn(np.asarray(a, dtype=float), xi_tilde / r))

    def scaled(self, factor: complex) -> "FullSymmetrizerField":
        return FullSymmetrizerField(lambda a, x: factor * self._fn(a, x),
                                    None if self.c is None else self.c * float(np.real(factor)), self.name)

    @classmethod
    def constant(cls, S: np.ndarray, c: float | None = None) -> "FullSymmetrizerField":
        S = np.asarray(S)
        return cls(lambda a, x: S, c, "constant")


def characteristic_samples(fam: SymbolFamily, a, nu, n_sphere: int = 200) -> np.ndarray:
    """Unit frequencies xi + lambda nu on the characteristic set.

    For each xi on the unit sphere of the complement of ``nu`` the real
    roots lambda of det L(xi + lambda nu) = 0 are added.
    """
    nu = np.asarray(nu, dtype=float)
    Lnu = _direction_matrix(fam, a, nu)
    basis = complement_basis(nu)
    xis = sphere_samples(basis.shape[1], n_sphere) @ basis.T
    roots = np.linalg.eigvals(-np.linalg.solve(Lnu, fam.symbol(a, xis)))
    out = []
    for xi, rs in zip(xis, roots):
        for lam in rs:
            if abs(lam.imag) <= 1e-9 * (1 + abs(lam)):
                v = xi + lam.real * nu
                out.append(v / np.linalg.norm(v))
    return np.array(out).reshape(-1, fam.d + 1)


@dataclass
class PositivityReport:
    c: float
    worst_sample: np.ndarray | None
    n_characteristic: int
    per_sample: np.ndarray = field(default_factory=lambda: np.zeros(0))


def full_positivity_check(F: FullSymmetrizerField, fam: SymbolFamily, a, nu, samples,
                          ker_rtol: float = KER_RTOL) -> PositivityReport:
    """min over characteristic samples of min-eig(Q^* Herm(S L(nu)) Q), Q a kernel basis."""
    nu = np.asarray(nu, dtype=float)
    Lnu = fam.symbol(a, nu)
    vals = []
    worst = None
    best = np.inf
    for xt in np.atleast_2d(np.asarray(samples, dtype=float)):
        Q = kernel_basis(fam.symbol(a, xt), ker_rtol)
        if Q.shape[1] == 0:
            continue
        S = F(a, xt)
        m = float(np.linalg.eigvalsh(Q.conj().T @ hermitian_part(S @ Lnu) @ Q)[0])
        vals.append(m)
        if m < best:
            best, worst = m, xt.copy()
    if not vals:
        warnings.warn("no characteristic samples: positivity is vacuous", RuntimeWarning, stacklevel=2)
        return PositivityReport(float("inf"), None, 0)
    return PositivityReport(best, worst, len(vals), np.array(vals))


# ---------------------------------------------------------------------------
# kernel identities for a full symmetrizer at one characteristic point


@dataclass
class KernelIdentities:
    """Defects of the projector identities at one kernel of L.

    ``projector_identity``: |P^* S J P - P^* S J| / |S J|.
    ``norm_ratio``: |P| / (|S J| / c), must be <= 1.
    ``range_defect``: |Q^* S R| / |S| for orthonormal kernel Q and range R.
    ``range_rank_ok``: rank(Q^* S) equals dim ker L.
    """

    c: float
    projector_identity: float
    projector_norm: float
    norm_bound: float
    range_defect: float
    range_rank_ok: bool

    @property
    def norm_ratio(self) -> float:
        return self.projector_norm / self.norm_bound


def kernel_identities(L: np.ndarray, S: np.ndarray, J: np.ndarray, ker_rtol: float = KER_RTOL) -> tuple[np.ndarray, KernelIdentities]:
    """Eigenprojector P of J^{-1} L at 0 and the identity checks around it.

    P projects on ker L along the range of J^{-1} L.
    """
    U, s, Vh = np.linalg.svd(L)
    N = len(s)
    k = int(np.sum(s <= ker_rtol * max(s[0], 1e-300)))
    if k == 0:
        raise HypothesisViolation("L has trivial kernel")
    Q = Vh[N - k:].conj().T
    R = U[:, :N - k]
    SJ = S @ J
    G = Q.conj().T @ SJ @ Q
    c = float(np.linalg.eigvalsh(hermitian_part(G))[0])
    # P = Q (W^* J^{-1}... ) : kernel along J^{-1} range, via the left kernel of J^{-1} L
    JR = np.linalg.solve(J, R)
    basis = np.hstack([Q, JR])
    if np.linalg.cond(basis) > 1e12:
        raise NotSemisimpleError("0 is not a semisimple eigenvalue of J^{-1} L")
    coords = np.linalg.inv(basis)
    P = Q @ coords[:k]
    scale = max(np.linalg.norm(SJ, 2), 1e-300)
    ident = float(np.linalg.norm(P.conj().T @ SJ @ P - P.conj().T @ SJ, 2) / scale)
    bound = scale / c if c > 0 else np.inf
    range_defect = float(np.linalg.norm(Q.conj().T @ S @ R, 2) / max(np.linalg.norm(S, 2), 1e-300)) if N > k else 0.0
    sv = np.linalg.svd(Q.conj().T @ S, compute_uv=False)
    rank_ok = bool(sv[-1] > 1e-8 * max(sv[0], 1e-300))
    return P, KernelIdentities(c, ident, float(np.linalg.norm(P, 2)), bound, range_defect, rank_ok)


@dataclass
class SymmetrizerFromFull:
    S: np.ndarray
    taus: np.ndarray
    identities: list[KernelIdentities]
    symmetry_defect: float
    positivity: float


def symmetrizer_from_full(F: FullSymmetrizerField, fam: SymbolFamily, a, nu, xi,
                          tol: float = 1e-8) -> SymmetrizerFromFull:
    """S = sum over tau of P(tau)^* S(xi + tau nu) J P(tau), returned as S J^{-1}.

    J = L(a, nu). The result satisfies S J = (S J)^* > 0 and S L(a, xi)
    hermitian. Each eigenvalue tau of -J^{-1} L(xi) is checked against the
    kernel identities; a defect above ``tol`` raises
    :class:`InconsistentSymmetrizerError`.
    """
    nu = np.asarray(nu, dtype=float)
    xi = np.asarray(xi, dtype=float)
    J = _direction_matrix(fam, a, nu)
    Lxi = fam.symbol(a, xi)
    AJ = -np.linalg.solve(J, Lxi)
    spec = eigendecompose(AJ)
    if not spec.semisimple:
        raise NotSemisimpleError("J^{-1} L(xi) is not diagonalizable")
    if np.max(np.abs(spec.eigenvalues.imag)) > spec.rel_tol * max(spec.norm, 1.0) * 1e3:
        raise HypothesisViolation("non-real characteristic roots")
    total = np.zeros_like(J)
    taus = []
    idents = []
    for cl in spec.clusters:
        tau = float(cl.eigenvalue.real)
        point = xi + tau * nu
        if np.linalg.norm(point) == 0:
            raise HypothesisViolation("xi is parallel to nu")
        Sf = F(a, point)
        L = Lxi + tau * J
        # rank-revealing tolerance matched to the cluster size
        ker_rtol = max(KER_RTOL, 10 * cl.margin / max(np.linalg.norm(L, 2), 1e-300)) if cl.multiplicity > 1 else KER_RTOL
        try:
            _, ids = kernel_identities(L, Sf, J, ker_rtol)
        except HypothesisViolation:
            ids = None
        P = cl.projector
        if ids is None or ids.c <= 0 or ids.projector_identity > tol or ids.norm_ratio > 1 + 1e-6 or not ids.range_rank_ok:
            raise InconsistentSymmetrizerError(
                f"full symmetrizer inconsistent at a={np.asarray(a).tolist()}, xi={xi.tolist()}, tau={tau:.6g}: "
                + ("no kernel" if ids is None else
                   f"c={ids.c:.3g}, identity defect={ids.projector_identity:.3g}, norm ratio={ids.norm_ratio:.3g}"))
        taus.append(tau)
        idents.append(ids)
        total += P.conj().T @ Sf @ J @ P
    total = hermitian_part(total)
    S = total @ np.linalg.inv(J)
    M = S @ Lxi
    sym = float(np.linalg.norm(M - M.conj().T, 2) / max(np.linalg.norm(S, 2) * np.linalg.norm(Lxi, 2), 1e-300))
    pos = float(np.linalg.eigvalsh(total)[0])
    return SymmetrizerFromFull(S, np.array(taus), idents, sym, pos)


# ---------------------------------------------------------------------------
# symmetrizer -> full symmetrizer


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    f = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    g = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1 - t, 1.0)), 0.0)
    return f / (f + g)


def cone_radius(fam: SymbolFamily, a, nu, K: float | None = None) -> float:
    """Radius |det L(a, nu)| / K of the certified ball around unit ``nu``."""
    if K is None:
        K = gradient_bound(fam, a)
    return float(abs(np.linalg.det(fam.symbol(a, _unit(nu))))) / K


def full_from_symmetrizer(S_field: Callable, fam: SymbolFamily, nu, support: float | None = None,
                          K: float | None = None, c: float | None = None) -> FullSymmetrizerField:
    """S(xi + tau nu) = (1 - chi) S(xi) + chi L(xi + tau nu)^{-1}.

    ``S_field(a, xi)`` is a symmetrizer in direction ``nu`` for xi in the
    complement of nu. chi is a smooth bump in the distance of the unit
    frequency to {nu, -nu}, equal to one on half of ``support`` and zero
    beyond ``support``. ``support`` defaults to half the certified cone
    radius; ``K`` is then the gradient bound, computed per parameter when
    not supplied.
    """
    nu_hat = _unit(nu)
    cache: dict[bytes, float] = {}

    def max_support(a):
        key = np.asarray(a, dtype=float).tobytes()
        if key not in cache:
            cache[key] = cone_radius(fam, a, nu_hat, K)
        return cache[key]

    def fn(a, x):
        eps = max_support(a)
        rho = 0.5 * eps if support is None else float(support)
        if rho > eps:
            raise CutoffTooWideError(f"cutoff support {rho:.4g} exceeds the certified cone radius {eps:.4g}")
        dist = min(np.linalg.norm(x - nu_hat), np.linalg.norm(x + nu_hat))
        chi = 1.0 - smooth_step(2.0 * dist / rho - 1.0)
        tau = float(x @ nu_hat)
        xi = x - tau * nu_hat
        out = 0
        if chi < 1:
            out = (1 - chi) * np.asarray(S_field(a, xi))
        if chi > 0:
            out = out + chi * np.linalg.inv(fam.symbol(a, x))
        return out

    return FullSymmetrizerField(fn, c, "extended symmetrizer")


def canonical_direction_symmetrizer(fam: SymbolFamily, nu) -> Callable:
    """xi -> S_A(xi) L(nu)^{-1} with S_A the canonical symmetrizer of L(nu)^{-1} L(xi)."""
    def S_field(a, xi):
        dc = direction_certificate(fam, a, nu, xi, probes=False)
        if dc.S is None:
            raise HypothesisViolation(f"no symmetrizer at a={np.asarray(a).tolist()}, xi={np.asarray(xi).tolist()}: "
                                      f"{dc.certificate.reason}")
        return dc.S

    return S_field


# ---------------------------------------------------------------------------
# homotopy of positivity between two J


def homotopy_positivity(fam: SymbolFamily, a, xi_tilde, J0: np.ndarray, J1: np.ndarray,
                        F: FullSymmetrizerField, t_grid, c: float | None = None,
                        tol: float = 1e-8) -> np.ndarray:
    """Kernel-compressed minimum of Herm(S J_t) for J_t = (1-t) J0 + t J1.

    Checks invertibility of J_t and semisimplicity of 0 for J_t^{-1} L, and
    that the value stays above (1 - t) c - tol with c the value at t = 0.
    """
    L = fam.symbol(a, xi_tilde)
    Q = kernel_basis(L)
    if Q.shape[1] == 0:
        raise HypothesisViolation("xi_tilde is not characteristic")
    S = F(a, xi_tilde)
    out = []
    for t in np.asarray(t_grid, dtype=float):
        Jt = (1 - t) * np.asarray(J0) + t * np.asarray(J1)
        s = np.linalg.svd(Jt, compute_uv=False)
        if s[-1] <= 1e-12 * s[0]:
            raise CharacteristicDirectionError(f"J_t singular at t={t:.6g}")
        if t < 1:
            A = np.linalg.solve(Jt, L)
            spec = eigendecompose(A)
            zero = [cl for cl in spec.clusters if abs(cl.eigenvalue) <= 1e3 * spec.tol + 1e-12]
            if zero and not zero[0].semisimple:
                raise NotSemisimpleError(f"0 is not semisimple for J_t^(-1) L at t={t:.6g}")
        out.append(float(np.linalg.eigvalsh(Q.conj().T @ hermitian_part(S @ Jt) @ Q)[0]))
    out = np.array(out)
    t = np.asarray(t_grid, dtype=float)
    c0 = out[0] if c is None else c
    if np.any(out < (1 - t) * c0 - tol):
        k = int(np.argmax((1 - t) * c0 - tol - out))
        raise HypothesisViolation(f"positivity lower bound fails at t={t[k]:.6g}: {out[k]:.6g} < {(1 - t[k]) * c0:.6g}")
    return out


# ---------------------------------------------------------------------------
# change of time direction


def certify_segment(fam: SymbolFamily, a, nu, nu_prime, K: float, max_steps: int = 10000) -> int:
    """Chain of certified balls from ``nu`` to ``nu_prime`` along the segment.

    Returns the number of balls; raises if the chain stalls, which happens
    when ``nu_prime`` is outside the cone (or too close to its boundary).
    """
    p0, p1 = _unit(nu), _unit(nu_prime)
    s = 0.0
    N = fam.N
    for steps in range(1, max_steps + 1):
        x = (1 - s) * p0 + s * p1
        rx = np.linalg.norm(x)
        radius = abs(np.linalg.det(fam.symbol(a, x))) / (K * rx ** (N - 1))
        ds = 0.9 * radius / np.linalg.norm(p1 - p0) if np.any(p1 != p0) else 1.0
        if s + ds >= 1:
            return steps
        if ds < 1e-9:
            break
        s += ds
    raise CharacteristicDirectionError(f"direction {np.asarray(nu_prime).tolist()} is not certified in the cone")


class TimeDirectionChange:
    """Reduced system L(a, nu')^{-1} L(a, xi) with its symmetrizer.

    ``xi`` ranges over the complement of the original direction ``nu``. The
    symmetrizer is produced by extending the canonical symmetrizer in the
    direction ``nu`` to a full symmetrizer and compressing it in the
    direction ``nu'``.
    """

    def __init__(self, fam: SymbolFamily, nu, nu_prime, K: float, chart: ConeChart | None = None,
                 support: float | None = None):
        self.fam = fam
        self.nu = np.asarray(nu, dtype=float)
        self.nu_prime = np.asarray(nu_prime, dtype=float)
        self.K = float(K)
        self.chart = chart
        self.full = full_from_symmetrizer(canonical_direction_symmetrizer(fam, self.nu), fam, self.nu,
                                          support=support, K=self.K)
        self._checked: set[bytes] = set()

    def _check(self, a) -> None:
        key = np.asarray(a, dtype=float).tobytes()
        if key in self._checked:
            return
        if self.chart is not None:
            if not self.chart.contains(self.nu_prime):
                raise CharacteristicDirectionError("new direction is not in the certified cone")
        else:
            certify_segment(self.fam, a, self.nu, self.nu_prime, self.K)
        self._checked.add(key)

    def matrix(self, a, xi) -> np.ndarray:
        self._check(a)
        J = _direction_matrix(self.fam, a, self.nu_prime)
        return np.linalg.solve(J, self.fam.symbol(a, xi))

    def symmetrizer(self, a, xi, tol: float = 1e-8) -> SymmetrizerFromFull:
        """Symmetrizer S of L(nu')^{-1} L(xi): S L(nu') and S L(xi) hermitian, S L(nu') > 0."""
        self._check(a)
        return symmetrizer_from_full(self.full, self.fam, a, self.nu_prime, xi, tol)

    def reduced_symmetrizer(self, a, xi, tol: float = 1e-8) -> np.ndarray:
        """S L(nu'): hermitian positive and symmetrizes the reduced matrix."""
        res = self.symmetrizer(a, xi, tol)
        return res.S @ self.fam.symbol(a, self.nu_prime)


def change_time_direction(fam: SymbolFamily, nu, nu_prime, param_samples=None, K: float | None = None,
                          chart: ConeChart | None = None, support: float | None = None) -> TimeDirectionChange:
    """Reduced family in the direction ``nu_prime`` with its symmetrizer field.

    ``K`` defaults to the largest gradient bound over ``param_samples``
    (or the chart's K). Cone membership is certified for every parameter at
    first use.
    """
    if K is None:
        if chart is not None:
            K = chart.K
        else:
            params = np.zeros((1, 0)) if fam.n_params == 0 else np.atleast_2d(np.asarray(param_samples, dtype=float))
            K = max(gradient_bound(fam, a, n_sphere=600, polish=2) for a in params)
    change = TimeDirectionChange(fam, nu, nu_prime, K, chart, support)
    if param_samples is not None and fam.n_params:
        for a in np.atleast_2d(np.asarray(param_samples, dtype=float)):
            change._check(a)
    return change


# ---------------------------------------------------------------------------
# random instances for the kernel identities


@dataclass
class KernelInstance:
    L: np.ndarray
    S: np.ndarray
    J: np.ndarray
    kernel_dim: int


def random_kernel_instance(rng: np.random.Generator, N: int = 4, k: int | None = None) -> KernelInstance:
    """Random (L, S, J) with S L hermitian, dim ker L = k and S J positive on ker L.

    Built as H hermitian with kernel K, S invertible, L = S^{-1} H and
    J = S^{-1} G with G hermitian, positive on K.
    """
    if k is None:
        k = int(rng.integers(1, N))
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    U, _ = np.linalg.qr(X)
    d = np.concatenate([np.zeros(k), rng.uniform(0.5, 2.0, N - k) * rng.choice([-1, 1], N - k)])
    H = (U * d) @ U.conj().T
    S = np.eye(N) + 0.4 * (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(N)
    Y = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    G = hermitian_part(Y) + 0.0j
    Kb = U[:, :k]
    comp = Kb.conj().T @ G @ Kb
    shift = max(0.0, -float(np.linalg.eigvalsh(comp)[0])) + rng.uniform(0.3, 1.5)
    G = G + shift * (Kb @ Kb.conj().T)
    if abs(np.linalg.det(G)) < 1e-6:
        G = G + 0.1 * np.eye(N)
    Sinv = np.linalg.inv(S)
    return KernelInstance(Sinv @ H, S, Sinv @ G, k)
