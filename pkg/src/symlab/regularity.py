"""Regularity of eigenvalue, projector and symmetrizer fields sampled on
tensor grids: Lipschitz quotients, Hölder fits, jumps and C^1 defects."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import HypothesisViolation, NotHyperbolicError
from .matrix_core import batch_canonical_symmetrizer, canonical_symmetrizer, eigendecompose
from .symbols.family import SymbolFamily


# ---------------------------------------------------------------------------
# reduced families and sampled fields


class ReducedFamily:
    """Grid coordinates -> A = L(a, nu)^{-1} L(a, xi).

    ``coords`` names what each grid axis drives: a parameter name of the
    family or ``"xi<k>"`` for the k-th frequency component. Everything not
    driven comes from ``fixed_params`` and ``fixed_xi``.
    """

    def __init__(self, fam: SymbolFamily, nu, coords: Sequence[str], fixed_params: dict | None = None,
                 fixed_xi=None):
        self.fam = fam
        self.nu = np.asarray(nu, dtype=float)
        self.coords = list(coords)
        self.fixed_params = dict(fixed_params or {})
        self.fixed_xi = np.zeros(fam.d + 1) if fixed_xi is None else np.asarray(fixed_xi, dtype=float)
        names = [p.name for p in fam.params]
        self._slots = []
        for c in self.coords:
            if c in names:
                self._slots.append(("a", names.index(c)))
            elif c.startswith("xi") and c[2:].isdigit() and int(c[2:]) <= fam.d:
                self._slots.append(("xi", int(c[2:])))
            else:
                raise HypothesisViolation(f"unknown coordinate {c!r}")
        missing = [n for n in names if n not in self.coords and n not in self.fixed_params]
        if missing:
            raise HypothesisViolation(f"parameters without value: {missing}")

    @property
    def N(self) -> int:
        return self.fam.N

    def split(self, points) -> tuple[np.ndarray, np.ndarray]:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = pts.shape[0]
        a = np.zeros((n, self.fam.n_params))
        for k, p in enumerate(self.fam.params):
            if p.name in self.fixed_params:
                a[:, k] = self.fixed_params[p.name]
        xi = np.tile(self.fixed_xi, (n, 1))
        for col, (kind, idx) in enumerate(self._slots):
            if kind == "a":
                a[:, idx] = pts[:, col]
            else:
                xi[:, idx] = pts[:, col]
        return a, xi

    def __call__(self, points) -> np.ndarray:
        a, xi = self.split(points)
        Lnu = self.fam.symbol(a, self.nu)
        Lxi = self.fam.symbol(a, xi)
        return np.linalg.solve(Lnu, Lxi)


MatrixMap = Callable[[np.ndarray], np.ndarray]


@dataclass
class FieldSamples:
    """Values of a scalar, vector or matrix field on a tensor grid.

    ``values`` has shape ``grid_shape + value_shape``; invalid samples are
    NaN and counted in ``invalid``.
    """

    axes: list[np.ndarray]
    values: np.ndarray
    metric: str = "2"
    invalid: int = 0
    names: list[str] = field(default_factory=list)

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return tuple(len(ax) for ax in self.axes)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def spacing(self) -> float:
        return float(max(np.max(np.diff(ax)) for ax in self.axes if len(ax) > 1))

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def flat_values(self) -> np.ndarray:
        n = int(np.prod(self.grid_shape))
        return self.values.reshape((n,) + self.values.shape[self.dim:])

    def norm(self, diff: np.ndarray) -> np.ndarray:
        """Norm of value differences (last value axes)."""
        vshape = diff.shape[self.dim:] if diff.ndim > self.dim else ()
        return value_norm(diff, len(vshape) if vshape else 0, self.metric)

    def branch(self, j: int) -> "FieldSamples":
        """Component j of a vector-valued field (eigenvalue branch j)."""
        return FieldSamples(self.axes, self.values[..., j], self.metric, self.invalid, self.names)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = self.names or [f"x{k}" for k in range(self.dim)]
        vals = self.flat_values().reshape(int(np.prod(self.grid_shape)), -1)
        is_complex = np.iscomplexobj(vals)
        header = list(names)
        for k in range(vals.shape[1]):
            header += [f"re{k}", f"im{k}"] if is_complex else [f"v{k}"]
        w.writerow(header)
        for p, v in zip(self.points(), vals):
            row = [f"{c:.10g}" for c in p]
            for z in v:
                row += [f"{z.real:.10g}", f"{z.imag:.10g}"] if is_complex else [f"{z:.10g}"]
            w.writerow(row)
        return buf.getvalue()


def value_norm(diff: np.ndarray, value_ndim: int, metric: str = "2") -> np.ndarray:
    if value_ndim == 0:
        return np.abs(diff)
    if value_ndim == 1:
        return np.linalg.norm(diff, axis=-1)
    if metric == "fro":
        return np.linalg.norm(diff, axis=(-2, -1))
    return np.linalg.norm(diff, ord=2, axis=(-2, -1))


def sample_field(fn: Callable[[np.ndarray], np.ndarray], axes: Sequence, metric: str = "2",
                 names: Sequence[str] = ()) -> FieldSamples:
    """Evaluate a vectorised ``fn(points)`` on the tensor grid of ``axes``."""
    axes = [np.sort(np.asarray(ax, dtype=float)) for ax in axes]
    fs = FieldSamples(axes, np.zeros(0), metric, 0, list(names))
    vals = np.asarray(fn(fs.points()))
    fs.values = vals.reshape(fs.grid_shape + vals.shape[1:])
    flat = fs.flat_values().reshape(vals.shape[0], -1)
    fs.invalid = int(np.sum(~np.all(np.isfinite(flat), axis=1)))
    return fs


def eigenvalue_field(A: MatrixMap, axes: Sequence, tol: float = 1e-8) -> FieldSamples:
    """Sorted real eigenvalue branches lambda_1 <= ... <= lambda_N per grid point."""
    def fn(pts):
        mats = A(pts)
        w = np.linalg.eigvals(mats)
        scale = np.maximum(1.0, np.linalg.norm(mats, axis=(-2, -1)))
        bad = np.abs(w.imag).max(axis=-1) > np.sqrt(tol) * scale
        if np.any(bad):
            k = int(np.argmax(bad))
            raise NotHyperbolicError(f"complex eigenvalue at grid point {pts[k].tolist()}")
        return np.sort(w.real, axis=-1)

    return sample_field(fn, axes)


def symmetrizer_field(A: MatrixMap, axes: Sequence, names: Sequence[str] = ()) -> FieldSamples:
    """Canonical symmetrizer of A at every grid point; failures become NaN."""
    def fn(pts):
        mats = A(pts)
        try:
            return batch_canonical_symmetrizer(mats)
        except Exception:
            out = np.empty(mats.shape, dtype=complex)
            for i, M in enumerate(mats):
                try:
                    out[i] = canonical_symmetrizer(eigendecompose(M))
                except Exception:
                    out[i] = np.nan
            return out

    return sample_field(fn, axes, names=names)


def projector_field(A: MatrixMap, axes: Sequence, selector: Sequence[int]) -> tuple[FieldSamples, np.ndarray]:
    """Spectral projector on the eigenvalues with sorted positions ``selector``.

    Returns the field and the gap delta between selected and other
    eigenvalues at each grid point.
    """
    sel = np.asarray(selector, dtype=int)

    def fn(pts):
        mats = A(pts)
        w, V = np.linalg.eig(mats)
        order = np.argsort(w.real, axis=-1)
        w = np.take_along_axis(w, order, axis=-1)
        V = np.take_along_axis(V, order[:, None, :], axis=-1)
        Vinv = np.linalg.inv(V)
        return V[:, :, sel] @ Vinv[:, sel, :], w

    fs = FieldSamples([np.sort(np.asarray(ax, dtype=float)) for ax in axes], np.zeros(0))
    P, w = fn(fs.points())
    fs.values = P.reshape(fs.grid_shape + P.shape[1:])
    other = np.setdiff1d(np.arange(w.shape[-1]), sel)
    gaps = np.abs(w[:, sel][:, :, None] - w[:, other][:, None, :]).min(axis=(1, 2))
    return fs, gaps.reshape(fs.grid_shape)


# ---------------------------------------------------------------------------
# reports


@dataclass
class RegularityReport:
    lipschitz_constant: float = float("nan")
    lipschitz_levels: list[float] = field(default_factory=list)
    stable: bool | None = None
    holder_exponent: float | None = None
    holder_r2: float | None = None
    discontinuity_gap: float = 0.0
    gap_levels: list[float] = field(default_factory=list)
    theory_bound: float | None = None
    flags: list[str] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "lipschitz_constant": self.lipschitz_constant,
            "lipschitz_levels": list(self.lipschitz_levels),
            "stable": self.stable,
            "holder_exponent": self.holder_exponent,
            "holder_r2": self.holder_r2,
            "discontinuity_gap": self.discontinuity_gap,
            "gap_levels": list(self.gap_levels),
            "theory_bound": self.theory_bound,
            "flags": list(self.flags),
        }


def difference_quotients(f: FieldSamples) -> float:
    """sup over grid-neighbour pairs of |f(a) - f(a')| / |a - a'|."""
    best = 0.0
    vals = f.values
    for k, ax in enumerate(f.axes):
        if len(ax) < 2:
            continue
        d = np.diff(vals, axis=k)
        h = np.diff(ax).reshape((1,) * k + (-1,) + (1,) * (f.dim - k - 1))
        q = f.norm(d) / h
        q = q[np.isfinite(q)]
        if q.size:
            best = max(best, float(q.max()))
    return best


def lipschitz_estimate(levels: Sequence[FieldSamples], rtol: float = 0.2) -> RegularityReport:
    """Difference-quotient constants per refinement level.

    The reported constant is the last level's; ``stable`` holds when the
    last two levels agree within ``rtol``.
    """
    if len(levels) < 2:
        raise HypothesisViolation("need at least two refinement levels")
    consts = [difference_quotients(f) for f in levels]
    a, b = consts[-2], consts[-1]
    stable = abs(b - a) <= rtol * max(abs(a), abs(b), 1e-300) or max(a, b) == 0.0
    rep = RegularityReport(lipschitz_constant=b, lipschitz_levels=consts, stable=bool(stable))
    if not stable:
        rep.flags.append("not Lipschitz at this resolution")
    return rep


def _center_index(f: FieldSamples, center) -> tuple[int, ...]:
    return tuple(int(np.argmin(np.abs(ax - c))) for ax, c in zip(f.axes, np.atleast_1d(center)))


def oscillation(f: FieldSamples, center, radius: float, exclude_center: bool = False) -> float:
    """max |f(p) - f(center)| over grid points p with |p - center| <= radius.

    With ``exclude_center`` the oscillation is max |f(p) - f(q)| over
    distinct points of the punctured ball.
    """
    idx = _center_index(f, center)
    c = np.array([ax[i] for ax, i in zip(f.axes, idx)])
    pts = f.points()
    vals = f.flat_values()
    dist = np.linalg.norm(pts - c, axis=-1)
    inside = dist <= radius * (1 + 1e-12)
    ok = np.all(np.isfinite(vals.reshape(len(vals), -1)), axis=1)
    vdim = vals.ndim - 1
    if not exclude_center:
        v0 = f.values[idx]
        sel = inside & ok
        return float(np.max(value_norm(vals[sel] - v0, vdim, f.metric), initial=0.0))
    sel = inside & ok & (dist > 0)
    V = vals[sel]
    best = 0.0
    for k in range(len(V)):
        best = max(best, float(np.max(value_norm(V[k + 1:] - V[k], vdim, f.metric), initial=0.0)))
    return best


def holder_fit(f: FieldSamples, center, radii=None) -> tuple[float, float, list[str]]:
    """Slope of log oscillation(r) against log r.

    Default radii are 4h * 2^k, k = 0..5. Returns (alpha, r2, flags); a
    field that does not move gives alpha = 1 and the flag "constant field".
    """
    h = f.spacing
    if radii is None:
        radii = 4 * h * 2.0 ** np.arange(6)
    radii = np.asarray(radii, dtype=float)
    if len(radii) < 5 or np.log10(radii.max() / radii.min()) < 1.5 - 1e-9:
        raise HypothesisViolation("need at least 5 radii spanning 1.5 decades")
    osc = np.array([oscillation(f, center, r) for r in radii])
    if np.all(osc <= 1e-14 * max(1.0, float(np.nanmax(np.abs(f.flat_values()))))):
        return 1.0, 1.0, ["constant field"]
    keep = osc > 0
    x, y = np.log(radii[keep]), np.log(osc[keep])
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 1.0
    flags = [] if keep.all() else ["zero oscillation at some radii"]
    return float(slope), r2, flags


def discontinuity_gap(levels: Sequence[FieldSamples], center, cells: float = 2.0,
                      rtol: float = 0.1) -> tuple[float, list[float], bool]:
    """Jump estimate near ``center`` per level and whether it survives refinement.

    The estimate is the oscillation over the punctured ball of radius
    ``cells`` grid spacings. It survives when the last two levels differ
    by less than ``rtol``.
    """
    gaps = [oscillation(f, center, cells * f.spacing, exclude_center=True) for f in levels]
    a, b = gaps[-2], gaps[-1]
    survives = b > 0 and abs(b - a) <= rtol * max(a, b)
    return b, gaps, bool(survives)


def path_gap(fn: MatrixMap, center, dir1, dir2, steps) -> np.ndarray:
    """|f(center + h dir1) - f(center + h dir2)| for each step h."""
    c = np.asarray(center, dtype=float)
    h = np.asarray(steps, dtype=float)[:, None]
    v1 = np.asarray(fn(c + h * np.asarray(dir1, dtype=float)))
    v2 = np.asarray(fn(c + h * np.asarray(dir2, dtype=float)))
    return value_norm(v1 - v2, v1.ndim - 1, "2")


def one_sided_defect(fn: MatrixMap, point, direction, steps) -> np.ndarray:
    """|(f(p + h e) - f(p)) / h - (f(p) - f(p - h e)) / h| for each step h.

    Tends to zero for a C^1 field and stays positive at a corner.
    """
    p = np.asarray(point, dtype=float)
    e = np.asarray(direction, dtype=float)
    h = np.asarray(steps, dtype=float)[:, None]
    f0 = np.asarray(fn(p[None, :]))[0]
    fp = np.asarray(fn(p + h * e))
    fm = np.asarray(fn(p - h * e))
    d = (fp - f0) / h.reshape((-1,) + (1,) * (fp.ndim - 1)) - (f0 - fm) / h.reshape((-1,) + (1,) * (fp.ndim - 1))
    return value_norm(d, fp.ndim - 1, "2")


def directional_derivative_defect(fn: MatrixMap, point, steps, n_dirs: int = 8) -> np.ndarray:
    """Failure of the directional derivatives at ``point`` to be linear.

    For each step h, D(e) = (f(p + h e) - f(p)) / h and the result is
    max over unit e of |D(e) - sum_k e_k D(e_k)|. It tends to zero at a
    point of differentiability and stays positive at a conical point
    even when every line through the point sees a smooth restriction.
    """
    p = np.asarray(point, dtype=float)
    dim = p.size
    if dim != 2:
        raise HypothesisViolation("directional defect implemented for planar slices")
    th = np.pi * (np.arange(n_dirs) + 0.5) / n_dirs
    dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
    basis = np.eye(2)
    out = []
    f0 = np.asarray(fn(p[None, :]))[0]
    for h in np.asarray(steps, dtype=float):
        Db = (np.asarray(fn(p + h * basis)) - f0) / h
        De = (np.asarray(fn(p + h * dirs)) - f0) / h
        lin = np.tensordot(dirs, Db, axes=(1, 0))
        out.append(float(value_norm(De - lin, De.ndim - 1, "2").max()))
    return np.array(out)


# ---------------------------------------------------------------------------
# theory bounds


def coefficient_lipschitz(A: MatrixMap, axes: Sequence) -> float:
    """Measured Lipschitz constant K of the matrix map itself."""
    return difference_quotients(sample_field(A, axes))


def max_projector_norm(A: MatrixMap, axes: Sequence) -> float:
    """Largest spectral projector norm of A over the grid."""
    fs = FieldSamples([np.asarray(ax, dtype=float) for ax in axes], np.zeros(0))
    best = 0.0
    for M in A(fs.points()):
        spec = eigendecompose(M)
        best = max(best, max(float(np.linalg.norm(c.projector, 2)) for c in spec.clusters))
    return best


def eigenvalue_regularity(A: MatrixMap, axes_levels: Sequence[Sequence]) -> RegularityReport:
    """Lipschitz report of the eigenvalue branches with the bound N C2 K."""
    fields = [eigenvalue_field(A, axes) for axes in axes_levels]
    N = fields[-1].values.shape[-1]
    per_branch = [lipschitz_estimate([f.branch(j) for f in fields]) for j in range(N)]
    rep = max(per_branch, key=lambda r: r.lipschitz_constant)
    fine = axes_levels[-1]
    rep.theory_bound = N * max_projector_norm(A, fine) * coefficient_lipschitz(A, fine)
    return rep


@dataclass
class ProjectorModulus:
    quotient: float
    delta: float
    K: float
    C2: float
    bound: float
    effective_constant: float
    flags: list[str]


def projector_modulus(A: MatrixMap, selector: Sequence[int], axes: Sequence, gap_floor: float = 1e-6) -> ProjectorModulus:
    """Sup quotient of the selected spectral projector against C K / delta.

    C = 2 |selection| N^2 C2^2 follows from the contour representation on
    circles of radius delta/2 and the resolvent bound N C2 / distance.
    """
    fs, gaps = projector_field(A, axes, selector)
    flags = []
    if np.min(gaps) < gap_floor:
        k = np.unravel_index(int(np.argmin(gaps)), gaps.shape)
        loc = [float(ax[i]) for ax, i in zip(fs.axes, k)]
        flags.append(f"delta->0 region near {loc}")
    q = difference_quotients(fs)
    delta = float(np.min(gaps))
    K = coefficient_lipschitz(A, axes)
    C2 = max_projector_norm(A, axes)
    N = fs.values.shape[-1]
    C = 2 * len(selector) * N * N * C2 * C2
    bound = C * K / delta if delta > 0 else float("inf")
    eff = q * delta / K if K > 0 else 0.0
    return ProjectorModulus(q, delta, K, C2, bound, eff, flags)


# ---------------------------------------------------------------------------
# the obstruction to C^1 symmetrizers for the 4x4 block example


def sylvester_operator(Omega: np.ndarray, factor: float = 2.0) -> np.ndarray:
    """Matrix of X -> Omega X - factor X Omega acting on column-stacked X."""
    n = Omega.shape[0]
    eye = np.eye(n)
    return np.kron(eye, Omega) - factor * np.kron(Omega.T, eye)


def taylor_obstruction() -> dict:
    """Exact checks behind the absence of C^1 symmetrizers for the block example.

    With Omega = x Omega1 + xi Omega2, Omega1 = [[0,1],[1,0]] and
    Omega2 = diag(1,-1), a C^1 off-diagonal block Sigma0 + x Sigma1 +
    xi Sigma2 must make all Sigma vanish when X -> Omega_i X - 2 X Omega_i
    is injective, contradicting the x^2 term whose right side
    -2 J0 S11(0,0) has a positive (0,0) entry.
    """
    O1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    O2 = np.diag([1.0, -1.0])
    s1 = float(np.linalg.svd(sylvester_operator(O1), compute_uv=False)[-1])
    s2 = float(np.linalg.svd(sylvester_operator(O2), compute_uv=False)[-1])
    J0 = np.diag([1.0, 0.0])
    # any positive S11 has a positive (0,0) entry, so J0 S11 != 0
    rhs_entry = float((J0 @ np.eye(2))[0, 0])
    return {
        "sylvester_min_singular_omega1": s1,
        "sylvester_min_singular_omega2": s2,
        "forced_zero_taylor_terms": bool(s1 > 1e-12 and s2 > 1e-12),
        "x2_term_rhs_entry": -2.0 * rhs_entry,
        "obstruction": bool(s1 > 1e-12 and s2 > 1e-12 and rhs_entry > 0),
    }
