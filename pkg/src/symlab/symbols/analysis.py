"""Hyperbolicity of symbol families in a time direction, cone exploration
and resolvent probes."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ..errors import CharacteristicDirectionError
from ..matrix_core import HyperbolicityCertificate, strong_hyperbolicity_certificate
from .family import SymbolFamily

_GOLDEN = (1 + 5 ** 0.5) / 2


def sphere_samples(dim: int, n: int) -> np.ndarray:
    """Deterministic nearly uniform points on the unit sphere of R^dim."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        th = 2 * np.pi * (np.arange(n) + 0.5) / n
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    if dim == 3:
        k = np.arange(n) + 0.5
        z = 1 - 2 * k / n
        r = np.sqrt(np.maximum(0.0, 1 - z * z))
        phi = 2 * np.pi * k / _GOLDEN
        return np.stack([z, r * np.cos(phi), r * np.sin(phi)], axis=-1)
    # tensor product of angles for higher dimensions
    per = max(2, int(round(n ** (1.0 / (dim - 1)))))
    grids = np.meshgrid(*[np.linspace(0, np.pi, per + 2)[1:-1]] * (dim - 2),
                        2 * np.pi * (np.arange(per) + 0.5) / per, indexing="ij")
    angles = np.stack([g.ravel() for g in grids], axis=-1)
    pts = np.ones((angles.shape[0], dim))
    for k in range(dim - 1):
        pts[:, k] *= np.cos(angles[:, k])
        pts[:, k + 1:] *= np.sin(angles[:, k])[:, None]
    return pts


def complement_basis(nu) -> np.ndarray:
    """Orthonormal basis (columns) of the hyperplane orthogonal to ``nu``."""
    nu = np.asarray(nu, dtype=float)
    nu = nu / np.linalg.norm(nu)
    _, _, Vh = np.linalg.svd(nu[None, :])
    return Vh[1:].T


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def _direction_matrix(fam: SymbolFamily, a, nu) -> np.ndarray:
    Lnu = fam.symbol(a, np.asarray(nu, dtype=float), check=True)
    s = np.linalg.svd(Lnu, compute_uv=False)
    if s[-1] <= 1e-12 * max(s[0], 1e-300):
        raise CharacteristicDirectionError("nu not noncharacteristic: det L(a, nu) vanishes")
    return Lnu


def char_roots(fam: SymbolFamily, a, nu, xi) -> np.ndarray:
    """Roots lambda of det L(a, xi + lambda nu) = 0, sorted by real part.

    ``xi`` may carry leading batch axes; the roots are the eigenvalues of
    -L(a, nu)^{-1} L(a, xi).
    """
    Lnu = _direction_matrix(fam, a, nu)
    Lxi = fam.symbol(a, np.asarray(xi, dtype=float))
    M = -np.linalg.solve(Lnu, Lxi)
    roots = np.linalg.eigvals(M)
    order = np.argsort(roots.real + 1e-9 * roots.imag, axis=-1)
    return np.take_along_axis(roots, order, axis=-1)


@dataclass
class HyperbolicityReport:
    max_imag: float
    worst_param: np.ndarray
    worst_xi: np.ndarray
    n_checked: int
    passed: bool


def hyperbolicity_check(fam: SymbolFamily, nu, param_samples, n_sphere: int = 1000,
                        tol: float = 1e-8) -> HyperbolicityReport:
    """Largest |Im root| over parameter samples times sphere samples."""
    params = np.atleast_2d(np.asarray(param_samples, dtype=float))
    if fam.n_params == 0:
        params = np.zeros((1, 0))
    xis = sphere_samples(fam.d + 1, n_sphere)
    worst = -1.0
    wp = wx = None
    for a in params:
        roots = char_roots(fam, a, nu, xis)
        im = np.abs(roots.imag).max(axis=-1)
        k = int(np.argmax(im))
        if im[k] > worst:
            worst, wp, wx = float(im[k]), a.copy(), xis[k].copy()
    return HyperbolicityReport(worst, wp, wx, len(params) * len(xis), worst <= tol)


@dataclass
class DirectionCertificate:
    certificate: HyperbolicityCertificate
    S: np.ndarray | None
    L_nu: np.ndarray
    A: np.ndarray


def direction_certificate(fam: SymbolFamily, a, nu, xi, probes: bool = True) -> DirectionCertificate:
    """Certificate for A = L(a,nu)^{-1} L(a,xi) with S = S_A L(a,nu)^{-1}.

    On success ``S L(a,nu)`` is hermitian positive and ``S L(a,xi)`` is
    hermitian.
    """
    Lnu = _direction_matrix(fam, a, nu)
    A = np.linalg.solve(Lnu, fam.symbol(a, np.asarray(xi, dtype=float), check=True))
    cert = strong_hyperbolicity_certificate(A, probes=probes)
    S = None
    if cert.passed:
        S = cert.S @ np.linalg.inv(Lnu)
    return DirectionCertificate(cert, S, Lnu, A)


@dataclass
class DirectionSweep:
    """Uniform constants of a sweep over parameter and frequency samples."""

    passed: bool
    n_samples: int
    C1: float
    C2: float
    C3: float
    C4: float
    c4: float
    min_det: float
    symmetry_defect: float
    positivity: float
    failures: list = field(default_factory=list)

    def summary(self) -> dict:
        return {k: getattr(self, k) for k in
                ("passed", "n_samples", "C1", "C2", "C3", "C4", "c4", "min_det", "symmetry_defect", "positivity")} | {
            "failures": [dict(f) for f in self.failures[:20]]}


def strong_hyperbolicity_in_direction(fam: SymbolFamily, nu, param_samples, n_sphere: int = 64,
                                      probes: bool = True) -> DirectionSweep:
    """Run the matrix certificate at every (a, xi) with xi on the unit sphere
    of the complement of ``nu`` and collect uniform constants.

    ``symmetry_defect`` is the largest |S L(xi) - (S L(xi))^*| / (|S||L(xi)|)
    and ``positivity`` the smallest eigenvalue of the hermitian part of
    S L(nu) over passing samples.
    """
    nu = np.asarray(nu, dtype=float)
    params = np.atleast_2d(np.asarray(param_samples, dtype=float))
    if fam.n_params == 0:
        params = np.zeros((1, 0))
    basis = complement_basis(nu)
    xis = sphere_samples(basis.shape[1], n_sphere) @ basis.T
    consts = dict(C1=0.0, C2=0.0, C3=0.0, C4=0.0)
    c4 = np.inf
    min_det = np.inf
    sym = 0.0
    pos = np.inf
    failures = []
    for a in params:
        try:
            Lnu = _direction_matrix(fam, a, nu)
        except CharacteristicDirectionError:
            raise CharacteristicDirectionError(
                f"nu not noncharacteristic at parameter {a.tolist()}") from None
        min_det = min(min_det, float(abs(np.linalg.det(Lnu))))
        for xi in xis:
            dc = direction_certificate(fam, a, nu, xi, probes=probes)
            cert = dc.certificate
            if not cert.passed:
                failures.append({"a": a.tolist(), "xi": xi.tolist(), "reason": cert.reason})
                continue
            for k in consts:
                consts[k] = max(consts[k], float(getattr(cert, k)))
            c4 = min(c4, float(cert.c4))
            Lxi = fam.symbol(a, xi)
            M = dc.S @ Lxi
            scale = np.linalg.norm(dc.S, 2) * max(np.linalg.norm(Lxi, 2), 1e-300)
            sym = max(sym, float(np.linalg.norm(M - M.conj().T, 2) / scale))
            H = dc.S @ Lnu
            pos = min(pos, float(np.linalg.eigvalsh(0.5 * (H + H.conj().T))[0]))
    n = len(params) * len(xis)
    return DirectionSweep(not failures, n, consts["C1"], consts["C2"], consts["C3"], consts["C4"],
                          float(c4), float(min_det), sym, float(pos), failures)


# ---------------------------------------------------------------------------
# determinant gradient and cone exploration


def adjugate(M: np.ndarray) -> np.ndarray:
    """Adjugate (transposed cofactor matrix) of a stack of square matrices."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[-1]
    if n == 1:
        return np.ones_like(M)
    cof = np.empty_like(M)
    idx = np.arange(n)
    for r in range(n):
        rows = idx[idx != r]
        for c in range(n):
            cols = idx[idx != c]
            minor = M[..., rows[:, None], cols[None, :]]
            cof[..., r, c] = (-1) ** (r + c) * np.linalg.det(minor)
    return np.swapaxes(cof, -1, -2)


def det_gradient(fam: SymbolFamily, a, xi) -> np.ndarray:
    """d/dxi_j det L(a, xi) = trace(adj(L) A_j), batched over ``xi``."""
    coeffs = fam.coefficients(a)
    L = np.einsum("...j,jrc->...rc", np.asarray(xi, dtype=float), coeffs)
    adj = adjugate(L)
    return np.einsum("...rc,jcr->...j", adj, coeffs)


def gradient_bound(fam: SymbolFamily, a, n_sphere: int = 2000, polish: int = 5) -> float:
    """K = max over |xi| <= 2 of |grad det L(a, xi)|.

    The gradient is homogeneous of degree N-1, so the maximum over the ball
    is 2^(N-1) times the maximum over the unit sphere, which is sampled and
    then polished by local optimisation from the best samples.
    """
    dim = fam.d + 1
    pts = sphere_samples(dim, n_sphere)
    g = np.linalg.norm(det_gradient(fam, a, pts), axis=-1)
    best = float(g.max())
    if dim > 1:
        def neg(v):
            u = v / max(np.linalg.norm(v), 1e-300)
            return -float(np.linalg.norm(det_gradient(fam, a, u)))

        for k in np.argsort(g)[::-1][:polish]:
            res = minimize(neg, pts[k], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 400})
            best = max(best, -float(res.fun))
    return 2.0 ** (fam.N - 1) * best


@dataclass
class ConeChart:
    """Certified unit directions of the hyperbolicity cone around ``base``.

    Each certified direction v carries ``radius = |det L(a, v)| / K``; the
    open ball of that radius around v lies in the cone.
    """

    base: np.ndarray
    points: np.ndarray
    detvals: np.ndarray
    radii: np.ndarray
    K: float
    complete: bool

    @property
    def c(self) -> float:
        return float(self.detvals.min())

    @property
    def certified(self) -> list[tuple[np.ndarray, float, float]]:
        return [(p, float(dv), float(r)) for p, dv, r in zip(self.points, self.detvals, self.radii)]

    def witness(self, direction) -> int | None:
        """Index of the certified point whose ball contains ``direction``."""
        q = _unit(direction)
        d = np.linalg.norm(self.points - q, axis=-1)
        ok = np.flatnonzero(d < self.radii)
        return int(ok[np.argmin(d[ok])]) if len(ok) else None

    def contains(self, direction) -> bool:
        return self.witness(direction) is not None


def _tangent_directions(v: np.ndarray, k: int) -> np.ndarray:
    """k unit vectors spread over the tangent space of the sphere at v."""
    T = complement_basis(v)
    if T.shape[1] == 1:
        return np.stack([T[:, 0], -T[:, 0]])
    if T.shape[1] == 2:
        th = 2 * np.pi * np.arange(k) / k
        return np.cos(th)[:, None] * T[:, 0] + np.sin(th)[:, None] * T[:, 1]
    dirs = sphere_samples(T.shape[1], k) if T.shape[1] == 3 else np.vstack([T.T, -T.T])
    return dirs @ T.T if T.shape[1] == 3 else dirs


def cone_explore(fam: SymbolFamily, a, nu, budget: int = 5000, ring: int = 6,
                 min_radius: float | None = None, K: float | None = None) -> ConeChart:
    """Breadth-first certification of directions in the hyperbolicity cone.

    Starting from ``nu``, every certified unit direction v carries the ball
    of radius |det L(a, v)| / K, which lies in the cone. Children are placed
    on a ring of 0.9 times that radius (then projected to the sphere, which
    keeps them in the ball) and certified in turn; a child too close to an
    existing point is skipped, and points whose radius is below
    ``min_radius`` (default a quarter of the radius at ``nu``) spawn none.
    The chart is flagged incomplete when ``budget`` points were reached.
    """
    report = hyperbolicity_check(fam, nu, np.asarray(a, dtype=float)[None, :], n_sphere=400)
    if not report.passed:
        raise CharacteristicDirectionError(
            f"not hyperbolic in direction {list(nu)}: max |Im root| = {report.max_imag:.3g}")
    if K is None:
        K = gradient_bound(fam, a)
    base = _unit(nu)

    def radius_of(v):
        dv = np.abs(np.linalg.det(fam.symbol(a, v)))
        return dv, dv / K

    d0, r0 = radius_of(base)
    d0, r0 = float(d0), float(r0)
    if min_radius is None:
        min_radius = 0.25 * r0
    pts = np.empty((budget, base.size))
    pts[0] = base
    dets = [d0]
    radii = [r0]
    n = 1
    queue = deque([0])
    complete = True
    while queue and complete:
        i = queue.popleft()
        p, r = pts[i], radii[i]
        if r < min_radius:
            continue
        kids = p + 0.9 * r * _tangent_directions(p, ring)
        kids /= np.linalg.norm(kids, axis=-1, keepdims=True)
        kd, kr = radius_of(kids)
        for child, dc, rc in zip(kids, kd, kr):
            if np.min(np.linalg.norm(pts[:n] - child, axis=-1)) < 0.85 * rc:
                continue
            if n >= budget:
                complete = False
                break
            pts[n] = child
            dets.append(float(dc))
            radii.append(float(rc))
            queue.append(n)
            n += 1
    pts = pts[:n]
    return ConeChart(base, pts, np.asarray(dets), np.asarray(radii), float(K), complete)


def direction_change_constant(fam: SymbolFamily, a, nu, nu_prime, C: float, c: float | None = None,
                              K: float | None = None, chart: ConeChart | None = None) -> float:
    """C1 = K C |nu| / (c |nu'|).

    ``c`` is a lower bound of |det L(a, nu' / |nu'|)| and defaults to that
    value, so the constant scales like the resolvent bound when ``nu`` or
    ``nu_prime`` are rescaled. When ``chart`` is given, ``nu_prime`` must lie
    in it.
    """
    nu = np.asarray(nu, dtype=float)
    nu_prime = np.asarray(nu_prime, dtype=float)
    if chart is not None and not chart.contains(nu_prime):
        raise CharacteristicDirectionError(f"direction {nu_prime.tolist()} is not in the certified cone")
    if K is None:
        K = chart.K if chart is not None else gradient_bound(fam, a)
    det_p = float(abs(np.linalg.det(fam.symbol(a, _unit(nu_prime)))))
    if c is None:
        c = det_p
    if not 0 < c <= det_p * (1 + 1e-12):
        raise CharacteristicDirectionError(f"need 0 < c <= |det L(unit nu')| = {det_p:.6g}, got c = {c:.6g}")
    return K * C * float(np.linalg.norm(nu)) / (c * float(np.linalg.norm(nu_prime)))


def necessary_condition_probe(fam: SymbolFamily, a, nu, n_sphere: int = 2000, gammas=None,
                              xis=None) -> float:
    """sup of |gamma| |(L(a, xi) + i gamma L(a, nu))^{-1}| over sphere samples and gammas."""
    Lnu = _direction_matrix(fam, a, np.asarray(nu, dtype=float))
    if gammas is None:
        gammas = np.logspace(-4, 2, 13)
    gammas = np.asarray(gammas, dtype=float)
    gammas = gammas[gammas != 0]
    if xis is None:
        xis = sphere_samples(fam.d + 1, n_sphere)
    Lxi = fam.symbol(a, xis)
    M = Lxi[:, None] + 1j * gammas[None, :, None, None] * Lnu[None, None]
    smin = np.linalg.svd(M, compute_uv=False)[..., -1]
    if np.any(smin == 0):
        return float("inf")
    return float(np.max(np.abs(gammas)[None, :] / smin))
