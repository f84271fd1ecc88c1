"""Spectral data, projectors, symmetrizers and hyperbolicity certificates
for single complex matrices.

Everything here works on one matrix (or a small stack of matrices) at a
time; parameter families live in :mod:`symlab.symbols`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import (
    GapViolatedError,
    HypothesisViolation,
    NotHyperbolicError,
    NotSemisimpleError,
)

EPS = float(np.finfo(float).eps)
_SQRT_EPS = float(np.sqrt(EPS))
# merging factor for eigenvalues whose condition numbers reveal a
# (nearly) defective cluster: splitting of a k-block is ~ eps*|A|*kappa
_KAPPA_MERGE = 100.0


@dataclass(frozen=True)
class Cluster:
    """One group of numerically equal eigenvalues."""

    eigenvalue: complex
    multiplicity: int
    projector: np.ndarray
    semisimple: bool
    margin: float
    members: tuple[complex, ...] = ()


@dataclass(frozen=True)
class SpectralData:
    matrix: np.ndarray
    clusters: tuple[Cluster, ...]
    tol: float
    norm: float

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([c.eigenvalue for c in self.clusters])

    @property
    def semisimple(self) -> bool:
        return all(c.semisimple for c in self.clusters)

    @property
    def rel_tol(self) -> float:
        """Tolerance relative to the matrix norm (dimensionless)."""
        return self.tol / self.norm if self.norm > 0 else self.tol

    def projector_sum_defect(self) -> float:
        total = sum(c.projector for c in self.clusters)
        return float(np.linalg.norm(total - np.eye(self.size), 2))

    def orthogonality_defect(self) -> float:
        worst = 0.0
        for j, cj in enumerate(self.clusters):
            for k, ck in enumerate(self.clusters):
                target = cj.projector if j == k else 0.0
                worst = max(worst, float(np.linalg.norm(cj.projector @ ck.projector - target, 2)))
        return worst


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def _as_square(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def _schur_projector(A: np.ndarray, centers: np.ndarray, index: int) -> tuple[np.ndarray, int]:
    """Spectral projector of one cluster through a reordered Schur form."""
    n = A.shape[0]

    def pick(z):
        return int(np.argmin(np.abs(centers - z))) == index

    T, Z, sdim = sla.schur(A, output="complex", sort=pick)
    m = int(sdim)
    if m == n:
        return np.eye(n, dtype=complex), m
    if m == 0:
        return np.zeros((n, n), dtype=complex), m
    T11, T12, T22 = T[:m, :m], T[:m, m:], T[m:, m:]
    X = sla.solve_sylvester(T11, -T22, -T12)
    P = np.zeros((n, n), dtype=complex)
    P[:m, :m] = np.eye(m)
    P[:m, m:] = -X
    return Z @ P @ Z.conj().T, m


def eigendecompose(A, cluster_tol: float | None = None) -> SpectralData:
    """Cluster the eigenvalues of ``A`` and compute spectral projectors.

    Eigenvalues closer than ``cluster_tol`` (default ``eps*|A|*N``) are
    merged. Pairs whose eigenvalue condition numbers are large are also
    merged when their distance is below ``100*eps*|A|*kappa``, which is the
    size of the splitting that rounding produces on a Jordan block.

    A cluster is semi-simple when ``A - lambda`` has numerical nullity equal
    to the multiplicity; the rank threshold is stored in ``margin``.
    """
    A = _as_square(A)
    n = A.shape[0]
    nrm = float(np.linalg.norm(A, 2))
    if nrm == 0.0:
        c = Cluster(0j, n, np.eye(n, dtype=complex), True, 0.0, (0j,) * n)
        return SpectralData(A, (c,), 0.0, 0.0)

    base = float(cluster_tol) if cluster_tol is not None else EPS * nrm * n
    hermitian = np.linalg.norm(A - A.conj().T) <= EPS * nrm * n

    if hermitian:
        w, V = np.linalg.eigh(A)
        w = w.astype(complex)
        kappa = np.ones(n)
    else:
        w, vl, vr = sla.eig(A, left=True, right=True)
        overlap = np.abs(np.sum(vl.conj() * vr, axis=0))
        kappa = 1.0 / np.maximum(overlap, EPS)

    uf = _UnionFind(n)
    for i, j in combinations(range(n), 2):
        tol_ij = max(base, _KAPPA_MERGE * EPS * nrm * max(kappa[i], kappa[j]))
        if abs(w[i] - w[j]) <= tol_ij:
            uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), []).append(i)
    members = [groups[k] for k in sorted(groups)]
    means = [complex(np.mean(w[g])) for g in members]
    order = sorted(range(len(members)), key=lambda k: (means[k].real, means[k].imag))
    members = [members[k] for k in order]
    centers = np.array([means[k] for k in order])
    eff_tol = max(base, _KAPPA_MERGE * EPS * nrm * float(np.max(kappa)))
    rank_tol = max(_SQRT_EPS * nrm, 10.0 * (cluster_tol or 0.0))

    projectors: list[np.ndarray] = []
    if hermitian:
        for g in members:
            Vg = V[:, g]
            projectors.append(Vg @ Vg.conj().T)
    else:
        condV = np.linalg.cond(vr)
        if np.isfinite(condV) and condV < 1e8:
            Vinv = np.linalg.inv(vr)
            for g in members:
                projectors.append(vr[:, g] @ Vinv[g, :])
        else:
            for k, g in enumerate(members):
                P, m = _schur_projector(A, centers, k)
                if m != len(g):
                    raise NotSemisimpleError(
                        f"reordered Schur form isolates {m} eigenvalues, expected {len(g)}"
                    )
                projectors.append(P)

    clusters = []
    eye = np.eye(n)
    for g, lam, P in zip(members, centers, projectors):
        m = len(g)
        if hermitian:
            semisimple = True
        else:
            s = np.linalg.svd(A - lam * eye, compute_uv=False)
            semisimple = bool(s[n - m] <= rank_tol)
        clusters.append(Cluster(complex(lam), m, P, semisimple, rank_tol, tuple(complex(v) for v in w[g])))
    return SpectralData(A, tuple(clusters), eff_tol, nrm)


def spectral_projector(A, cluster: Sequence[complex] | complex, gap: float, nodes: int = 64) -> tuple[np.ndarray, float]:
    """Contour-integral projector for the eigenvalues in ``cluster``.

    Integrates the resolvent over circles of radius ``gap/2`` around each
    listed eigenvalue with the trapezoid rule. Returns the projector and
    its idempotency defect ``|P^2 - P|``.
    """
    A = _as_square(A)
    pts = np.atleast_1d(np.asarray(cluster, dtype=complex))
    if gap <= 0:
        raise GapViolatedError("gap violated: gap must be positive")
    eig = np.linalg.eigvals(A)
    for lam in eig:
        d = float(np.min(np.abs(pts - lam)))
        if gap / 4 <= d < gap:
            raise GapViolatedError(f"gap violated: eigenvalue {lam} at distance {d:.3g} from the cluster")
    centre = np.mean(pts)
    if np.max(np.abs(pts - centre)) < gap / 4:
        pts = np.array([centre])
    elif len(pts) > 1 and np.min(np.abs(pts[:, None] - pts[None, :]) + np.eye(len(pts)) * np.inf) < gap:
        raise GapViolatedError("gap violated: cluster points are neither tight nor separated by the gap")
    r = gap / 2.0
    n = A.shape[0]
    theta = 2 * np.pi * np.arange(nodes) / nodes
    P = np.zeros((n, n), dtype=complex)
    eye = np.eye(n)
    for c in pts:
        for th in theta:
            z = c + r * np.exp(1j * th)
            P += r * np.exp(1j * th) * np.linalg.solve(z * eye - A, eye)
    P /= nodes
    defect = float(np.linalg.norm(P @ P - P, 2))
    return P, defect


def default_probe_grid(A, n_re: int = 7, n_im: int = 6, spec: SpectralData | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Real parts near the spectrum and two-sided log-spaced imaginary parts."""
    if spec is None:
        A = _as_square(A)
        scale = max(float(np.linalg.norm(A, 2)), 1e-300)
        ev = np.linalg.eigvals(A).real
    else:
        scale = max(spec.norm, 1e-300)
        ev = spec.eigenvalues.real
    lo, hi = ev.min() - 0.5 * scale, ev.max() + 0.5 * scale
    re = np.unique(np.concatenate([ev, np.linspace(lo, hi, n_re)]))
    im = np.logspace(-8, 0.5, n_im) * scale
    return re, np.concatenate([-im[::-1], im])


def _hermitian_eigenvalues(A: np.ndarray) -> np.ndarray | None:
    """Eigenvalues of ``A`` if it is Hermitian to rounding accuracy, else None.

    Treating such an ``A`` as exactly Hermitian moves its singular values by
    at most ``eps*N*|A|`` (Weyl), far below the probe resolution.
    """
    nrm = float(np.abs(A).sum())
    if np.abs(A - A.conj().T).sum() > EPS * A.shape[0] * nrm:
        return None
    return np.linalg.eigvalsh(0.5 * (A + A.conj().T)).astype(complex)


def resolvent_probe(A, re_grid=None, im_grid=None) -> float:
    """sup of |Im z| * |(A - z)^{-1}| over the grid (points with Im z = 0 are skipped)."""
    A = _as_square(A)
    if re_grid is None or im_grid is None:
        dre, dim = default_probe_grid(A)
        re_grid = dre if re_grid is None else re_grid
        im_grid = dim if im_grid is None else im_grid
    re = np.asarray(re_grid, float)
    im = np.asarray(im_grid, float)
    im = im[im != 0.0]
    z = (re[:, None] + 1j * im[None, :]).ravel()
    n = A.shape[0]
    lam = _hermitian_eigenvalues(A)
    if lam is not None:
        # Hermitian A: the singular values of A - z are |lambda_j - z|
        smin = np.abs(lam[None, :] - z[:, None]).min(axis=1)
    else:
        M = A[None, :, :] - z[:, None, None] * np.eye(n)[None]
        smin = np.linalg.svd(M, compute_uv=False)[:, -1]
    if np.any(smin == 0.0):
        return float("inf")
    with np.errstate(over="ignore"):
        vals = np.abs(z.imag) / smin
    out = float(np.max(vals))
    return out if np.isfinite(out) else float("inf")


@dataclass(frozen=True)
class ExponentialProbe:
    value: float
    saturated: bool


def exponential_probe(A, t_grid=None, norm: float | None = None) -> ExponentialProbe:
    """sup over ``t_grid`` of |exp(itA)| (scaling and squaring)."""
    A = _as_square(A)
    if t_grid is None:
        scale = max(float(np.linalg.norm(A, 2)) if norm is None else norm, 1e-300)
        t_grid = np.linspace(-20.0, 20.0, 9) / scale
    t = np.asarray(t_grid, float)
    lam = _hermitian_eigenvalues(A)
    if lam is not None:
        with np.errstate(over="ignore"):
            value = float(np.exp(-np.outer(t, lam.imag)).max())
        return ExponentialProbe(value, not np.isfinite(value) or value > 1e150)
    with np.errstate(all="ignore"):
        E = sla.expm(1j * t[:, None, None] * A[None])
        if not np.all(np.isfinite(E)):
            return ExponentialProbe(float("inf"), True)
        norms = np.linalg.svd(E, compute_uv=False)[:, 0]
    value = float(np.max(norms))
    saturated = not np.isfinite(value) or value > 1e150
    return ExponentialProbe(value, saturated)


def _hyperbolic_tol(spec: SpectralData) -> float:
    return max(10.0 * spec.tol, _SQRT_EPS * spec.norm)


def canonical_symmetrizer(spec: SpectralData) -> np.ndarray:
    """S = sum of P_j^* P_j over the spectral projectors.

    Requires semi-simple clusters with real eigenvalues. Then S >= I/N,
    |S| <= N * max|P_j|^2 and S A is hermitian.
    """
    if not spec.semisimple:
        raise NotSemisimpleError("not semi-simple")
    tol = _hyperbolic_tol(spec)
    if any(abs(c.eigenvalue.imag) > tol for c in spec.clusters):
        raise NotHyperbolicError("not hyperbolic")
    S = sum(c.projector.conj().T @ c.projector for c in spec.clusters)
    return 0.5 * (S + S.conj().T)


def functional_calculus(spec: SpectralData, f: Callable[[complex], complex]) -> np.ndarray:
    """sum_j f(lambda_j) P_j for a semi-simple decomposition."""
    if not spec.semisimple:
        raise NotSemisimpleError("not semi-simple")
    return sum(np.asarray(f(c.eigenvalue)) * c.projector for c in spec.clusters)


def batch_canonical_symmetrizer(mats: np.ndarray, gap_rtol: float = 1e-9) -> np.ndarray:
    """Canonical symmetrizers of a stack of matrices.

    Matrices with well separated eigenvalues use S = (V V^*)^{-1} for unit
    eigenvectors V, which equals the sum of P_j^* P_j. The rest fall back
    to :func:`canonical_symmetrizer` one by one.
    """
    mats = np.asarray(mats, dtype=complex)
    shape = mats.shape[:-2]
    n = mats.shape[-1]
    flat = mats.reshape(-1, n, n)
    out = np.empty_like(flat)
    norms = np.linalg.norm(flat, axis=(1, 2))
    safe = np.where(norms > 0, norms, 1.0)
    scaled = flat / safe[:, None, None]
    w, V = np.linalg.eig(scaled)
    dw = np.where(np.eye(n, dtype=bool)[None], np.inf, np.abs(w[:, :, None] - w[:, None, :]))
    gap = dw.min(axis=(1, 2)) if n > 1 else np.full(len(flat), np.inf)
    good = (gap > gap_rtol) & (norms > 0) & (np.abs(w.imag).max(axis=1) <= 1e-7)
    if np.any(good):
        Vg = V[good]
        G = Vg @ np.conj(np.swapaxes(Vg, -1, -2))
        S = np.linalg.inv(G)
        out[good] = 0.5 * (S + np.conj(np.swapaxes(S, -1, -2)))
    for i in np.flatnonzero(~good):
        out[i] = canonical_symmetrizer(eigendecompose(flat[i]))
    return out.reshape(shape + (n, n))


# ---------------------------------------------------------------------------
# sum bound for weighted projector-like sums


def sum_bound_constant(m: int) -> int:
    """C_1 = 0, C_m = 1 + 2 C_{m-1}, i.e. 2^(m-1) - 1."""
    return 2 ** (m - 1) - 1


@dataclass(frozen=True)
class SumBoundResult:
    holds: bool
    ratio: float
    lhs: float
    bound: float
    hypotheses_ok: bool
    violations: tuple[str, ...] = ()


def sum_bound_check(S_list, p_list, mu_list, eps: float, K1: float, K2: float,
                    rtol: float = 1e-10) -> SumBoundResult:
    """Check |sum S_j p_j| <= (2^(m-1)-1) K1 K2 eps after validating the hypotheses.

    Hypotheses: |S_j - S_k| <= K1 |mu_j - mu_k|; for every proper nonempty
    subset J, |sum_{j in J} p_j| <= K2 eps / min_{j in J, k not in J}
    |mu_j - mu_k|; and sum_j p_j = 0.
    """
    S = [np.asarray(s, dtype=complex) for s in S_list]
    p = [np.asarray(q, dtype=complex) for q in p_list]
    mu = np.asarray(mu_list, dtype=float)
    m = len(mu)
    if not (len(S) == len(p) == m) or m == 0:
        raise ValueError("S_list, p_list and mu_list must have the same nonzero length")
    if len(np.unique(mu)) != m:
        raise HypothesisViolation("the mu_j must be distinct")
    violations = []
    for j, k in combinations(range(m), 2):
        d = np.linalg.norm(S[j] - S[k], 2)
        if d > K1 * abs(mu[j] - mu[k]) * (1 + rtol) + rtol:
            violations.append(f"Lipschitz bound fails for pair ({j},{k})")
    scale = max(1.0, max(np.linalg.norm(q, 2) for q in p))
    if np.linalg.norm(sum(p), 2) > rtol * scale + rtol * K2 * eps:
        violations.append("sum of p_j is not zero")
    idx = range(m)
    for size in range(1, m):
        for J in combinations(idx, size):
            Jc = [k for k in idx if k not in J]
            gap = min(abs(mu[j] - mu[k]) for j in J for k in Jc)
            pj = np.linalg.norm(sum(p[j] for j in J), 2)
            if pj > K2 * eps / gap * (1 + rtol) + rtol * scale:
                violations.append(f"subset bound fails for J={J}")
    lhs = float(np.linalg.norm(sum(s @ q for s, q in zip(S, p)), 2))
    bound = sum_bound_constant(m) * K1 * K2 * eps
    ok = not violations
    if bound > 0:
        ratio = lhs / bound
    else:
        ratio = 0.0 if lhs <= rtol * scale else float("inf")
    holds = lhs <= bound * (1 + 1e-9) + 1e-12 * scale
    return SumBoundResult(holds, ratio, lhs, bound, ok, tuple(violations))


def random_sum_instance(rng: np.random.Generator, m: int, N: int = 3, eps: float = 1.0,
                        K1: float = 1.0, K2: float = 1.0):
    """Random admissible input for :func:`sum_bound_check`.

    S_j = F(mu_j) for a K1-Lipschitz matrix function F; the p_j have zero
    sum and are scaled until every subset inequality holds.
    """
    mu = np.sort(rng.uniform(-3, 3, size=m))
    while m > 1 and np.min(np.diff(mu)) < 1e-3:
        mu = np.sort(rng.uniform(-3, 3, size=m))
    n_terms = 3
    freqs = rng.uniform(0.2, 3.0, size=n_terms)
    B = rng.standard_normal((n_terms, N, N)) + 1j * rng.standard_normal((n_terms, N, N))
    B /= np.linalg.norm(B, ord=2, axis=(1, 2))[:, None, None]
    weights = rng.dirichlet(np.ones(n_terms + 1))
    lin = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    lin /= np.linalg.norm(lin, 2)
    S0 = rng.standard_normal((N, N))

    def F(t):
        # derivative norm <= weights[-1] + sum_r weights[r] <= 1
        val = S0 + weights[-1] * t * lin
        for r in range(n_terms):
            val = val + weights[r] / freqs[r] * np.sin(freqs[r] * t) * B[r]
        return K1 * val

    S = [F(t) for t in mu]
    q = rng.standard_normal((m, N, N)) + 1j * rng.standard_normal((m, N, N))
    q -= q.mean(axis=0)
    worst = 0.0
    for size in range(1, m):
        for J in combinations(range(m), size):
            Jc = [k for k in range(m) if k not in J]
            gap = min(abs(mu[j] - mu[k]) for j in J for k in Jc)
            worst = max(worst, np.linalg.norm(q[list(J)].sum(axis=0), 2) * gap / (K2 * eps))
    if worst > 0:
        q *= rng.uniform(0.5, 1.0) / worst
    return S, list(q), mu


# ---------------------------------------------------------------------------
# invertibility and certificates


@dataclass(frozen=True)
class InvertibilityMargin:
    kappa: float
    radius: float
    B: np.ndarray
    det_residual: float


def invertibility_margin(A) -> InvertibilityMargin:
    """|A^{-1}| and the smallest perturbation making A singular.

    The rank-one witness is B = (A u) u^* with u the minimal right singular
    vector, so |B| = sigma_min and u lies in the kernel of A - B.
    """
    A = _as_square(A)
    U, s, Vh = np.linalg.svd(A)
    u = Vh[-1].conj()
    B = np.outer(A @ u, u.conj())
    radius = float(s[-1])
    kappa = float("inf") if radius == 0 else 1.0 / radius
    det_res = float(abs(np.linalg.det(A - B)))
    return InvertibilityMargin(kappa, radius, B, det_res)


def strip_condition_probe(A, C5: float, rng: np.random.Generator, samples: int = 200) -> float:
    """Largest |Im lambda| / |B| over eigenvalues of rho A + B for random rho, B.

    A value below ``C5`` is consistent with the strip condition.
    """
    A = _as_square(A)
    n = A.shape[0]
    worst = 0.0
    for _ in range(samples):
        rho = rng.standard_normal() * 10 ** rng.uniform(-2, 3)
        B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        B *= 10 ** rng.uniform(-4, 1) / np.linalg.norm(B, 2)
        lam = np.linalg.eigvals(rho * A + B)
        worst = max(worst, float(np.max(np.abs(lam.imag))) / np.linalg.norm(B, 2))
    return worst


@dataclass
class HyperbolicityCertificate:
    real_residual: float
    C1: float
    C2: float
    C3: float
    c4: float
    C4: float
    S: np.ndarray | None
    passed: bool
    reason: str
    checks: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "real_residual": self.real_residual,
            "C1": self.C1,
            "C2": self.C2,
            "C3": self.C3,
            "c4": self.c4,
            "C4": self.C4,
            "pass": self.passed,
            "reason": self.reason,
            "checks": dict(self.checks),
        }


def strong_hyperbolicity_certificate(A, cluster_tol: float | None = None, probes: bool = True,
                                     re_grid=None, im_grid=None, t_grid=None) -> HyperbolicityCertificate:
    """Certificate for the equivalent conditions of strong hyperbolicity.

    C1 bounds |exp(itA)| (sampled), C2 bounds the projectors, C3 bounds
    |Im z| |(A - z)^{-1}| (sampled), and (c4, C4) bound the canonical
    symmetrizer from below and above. Cross-checks: C1 <= N C2,
    C2 <= C3 and C3 <= C4/c4, each with a small relative slack.
    """
    A = _as_square(A)
    n = A.shape[0]
    spec = eigendecompose(A, cluster_tol)
    tol = _hyperbolic_tol(spec)
    real_residual = max(abs(c.eigenvalue.imag) for c in spec.clusters)
    C2 = float(np.linalg.svd(np.stack([c.projector for c in spec.clusters]), compute_uv=False)[:, 0].max())

    if real_residual > tol:
        reason = "not hyperbolic"
    elif not spec.semisimple:
        reason = "defective"
    else:
        reason = "ok"

    C1 = C3 = float("nan")
    checks: dict = {"tol": tol}
    if probes:
        if re_grid is None or im_grid is None:
            dre, dim = default_probe_grid(A, spec=spec)
            re_grid = dre if re_grid is None else re_grid
            im_grid = dim if im_grid is None else im_grid
        C3 = resolvent_probe(A, re_grid, im_grid)
        ep = exponential_probe(A, t_grid, norm=spec.norm)
        C1 = ep.value
        checks["exp_saturated"] = ep.saturated

    S = None
    c4 = C4 = float("nan")
    if reason == "ok":
        S = canonical_symmetrizer(spec)
        ev = np.linalg.eigvalsh(S)
        c4, C4 = float(ev[0]), float(ev[-1])
        SA = S @ A
        # SA - (SA)* is skew-Hermitian: its 2-norm is the largest |eigenvalue|
        checks["symmetry_defect"] = float(np.abs(np.linalg.eigvalsh(1j * (SA - SA.conj().T))).max())
        checks["lower_bound_ok"] = c4 >= 1.0 / n - 1e-8
        checks["upper_bound_ok"] = C4 <= n * C2 ** 2 * (1 + 1e-8)
        if probes:
            slack = 1e-6
            checks["C1_le_NC2"] = C1 <= n * C2 * (1 + slack)
            checks["C2_le_C3"] = C2 <= C3 * (1 + 1e-5)
            checks["C3_le_C4_over_c4"] = C3 <= C4 / c4 * (1 + slack)
        bad = [k for k, v in checks.items() if isinstance(v, bool) and k != "exp_saturated" and not v]
        if bad:
            reason = "cross-check failed: " + ", ".join(sorted(bad))
    passed = reason == "ok"
    return HyperbolicityCertificate(real_residual, C1, C2, C3, c4, C4, S, passed, reason, checks)


# ---------------------------------------------------------------------------
# random test matrices


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (X + X.conj().T)


def random_semisimple_real(rng: np.random.Generator, n: int, cond_max: float = 1e3,
                           repeat_prob: float = 0.3) -> np.ndarray:
    """P D P^{-1} with real D (possibly repeated entries) and cond(P) <= cond_max."""
    while True:
        P = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if np.linalg.cond(P) <= cond_max:
            break
    d = rng.uniform(-3, 3, size=n)
    if n > 1 and rng.random() < repeat_prob:
        d[1] = d[0]
    return P @ np.diag(d) @ np.linalg.inv(P)


def random_jordan(rng: np.random.Generator, n: int, cond_max: float = 1e3) -> np.ndarray:
    """P J P^{-1} where J contains one Jordan block of size >= 2."""
    n = max(n, 2)
    while True:
        P = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if np.linalg.cond(P) <= cond_max:
            break
    k = int(rng.integers(2, min(n, 3) + 1))
    J = np.diag(rng.uniform(-3, 3, size=n)).astype(complex)
    lam = rng.uniform(-3, 3)
    for i in range(k):
        J[i, i] = lam
    for i in range(k - 1):
        J[i, i + 1] = rng.uniform(0.5, 2.0)
    return P @ J @ np.linalg.inv(P)
