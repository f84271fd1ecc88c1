"""Smooth symmetrizers for traceless 2x2 blocks near a double eigenvalue.

Near a double point the block is A = phi A1 + psi A2. After conjugating A1
to diag(-1, 1), removing the real part of the diagonal of A2 and making
its upper-right entry real positive, the block reads
phi diag(-1, 1) + psi [[-i m, b], [c, i m]] and

    S' = [[Re c, i m], [-i m, b]]

symmetrizes it, provided the discriminant is real
(2 phi m + psi Im(b c) = 0) and Re(b c) > m^2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import HypothesisViolation, NotHyperbolicError
from ..matrix_core import canonical_symmetrizer, eigendecompose

_D1 = np.diag([-1.0 + 0j, 1.0])


@dataclass
class DoublePointReduction:
    """Reduced data per sample: T with A = T (phi' D1 + psi B) T^{-1}."""

    T: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    m: np.ndarray  # Im of the diagonal entry a2
    b: np.ndarray  # real positive upper-right entry
    c: np.ndarray  # lower-left entry

    @property
    def reality_defect(self) -> np.ndarray:
        """2 phi m + psi Im(b c): vanishes when the discriminant is real."""
        return 2 * self.phi * self.m + self.psi * np.imag(self.b * self.c)

    @property
    def positivity_margin(self) -> np.ndarray:
        """Re(b c) - m^2: positive for strong hyperbolicity at the double point."""
        return np.real(self.b * self.c) - self.m ** 2


def _eigvec_frame(A1: np.ndarray) -> tuple[np.ndarray, float]:
    vals, vecs = np.linalg.eig(A1)
    if np.max(np.abs(vals.imag)) > 1e-10 * max(1.0, np.max(np.abs(vals))):
        raise NotHyperbolicError("A1 must have real eigenvalues")
    order = np.argsort(vals.real)
    vals, vecs = vals.real[order], vecs[:, order]
    mu = 0.5 * (vals[1] - vals[0])
    if mu <= 1e-12 * max(1.0, abs(vals).max()):
        raise NotHyperbolicError("A1 must have distinct eigenvalues")
    for k in range(2):
        v = vecs[:, k]
        j = int(np.argmax(np.abs(v)))
        vecs[:, k] = v / np.linalg.norm(v) * (abs(v[j]) / v[j])
    return vecs, float(mu)


def _align(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    # continuous phase of each eigenvector along the sample grid
    out = cur.copy()
    for k in range(cur.shape[1]):
        z = np.vdot(prev[:, k], cur[:, k])
        if abs(z) > 0:
            out[:, k] *= np.conj(z) / abs(z)
    return out


def reduce_double_point(phi, psi, A1, A2) -> DoublePointReduction:
    """Apply the reductions sample by sample.

    ``A1`` and ``A2`` are 2x2 or broadcast with ``phi``/``psi`` as
    (..., 2, 2) stacks; eigenvector phases follow the sample order.
    """
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    A1 = np.asarray(A1, dtype=complex)
    A2 = np.asarray(A2, dtype=complex)
    shape = np.broadcast_shapes(phi.shape, psi.shape, A1.shape[:-2], A2.shape[:-2])
    A1 = np.broadcast_to(A1, shape + (2, 2)).reshape(-1, 2, 2)
    A2 = np.broadcast_to(A2, shape + (2, 2)).reshape(-1, 2, 2)
    for name, M in (("A1", A1), ("A2", A2)):
        tr = np.abs(M[:, 0, 0] + M[:, 1, 1])
        if np.any(tr > 1e-12 * np.maximum(1.0, np.abs(M).max(axis=(1, 2)))):
            raise HypothesisViolation(f"{name} must be traceless")
    ph = np.broadcast_to(phi, shape).reshape(-1)
    ps = np.broadcast_to(psi, shape).reshape(-1)
    n = A1.shape[0]
    T = np.empty((n, 2, 2), dtype=complex)
    phi_r = np.empty(n)
    m = np.empty(n)
    b = np.empty(n)
    c = np.empty(n, dtype=complex)
    prev = None
    cache = None
    for i in range(n):
        if cache is None or not (np.array_equal(A1[i], cache[0])):
            P, mu = _eigvec_frame(A1[i])
            if prev is not None:
                P = _align(prev, P)
            cache = (A1[i], P, mu)
        _, P, mu = cache
        prev = P
        B = np.linalg.solve(P, A2[i] @ P)
        a2 = B[1, 1]
        phi_r[i] = mu * ph[i] + a2.real * ps[i]
        B = B - a2.real * _D1
        b2 = B[0, 1]
        if b2 == 0:
            raise NotHyperbolicError("not strongly hyperbolic at double point: upper-right entry vanishes")
        phase = b2 / abs(b2)
        Dg = np.diag([phase, 1.0])
        T[i] = P @ Dg
        m[i] = a2.imag
        b[i] = abs(b2)
        c[i] = B[1, 0] * phase
    return DoublePointReduction(T.reshape(shape + (2, 2)), phi_r.reshape(shape), ps.reshape(shape),
                                m.reshape(shape), b.reshape(shape), c.reshape(shape))


def symmetrize_2x2(phi, psi, A1, A2=None, k: int = 1, tol: float = 1e-10) -> np.ndarray:
    """Smooth symmetrizer of phi A1 + psi A2 (or phi^k A1 when ``A2`` is None).

    Returns S of shape (..., 2, 2), hermitian positive definite, with
    S (phi A1 + psi A2) hermitian.
    """
    if A2 is None:
        # A = phi^k A_r with A_r having distinct real eigenvalues
        spec = eigendecompose(np.asarray(A1, dtype=complex))
        S = canonical_symmetrizer(spec)
        return np.broadcast_to(S, np.shape(np.asarray(phi)) + S.shape).copy()
    red = reduce_double_point(phi, psi, A1, A2)
    scale = np.maximum(1.0, np.abs(red.phi) + np.abs(red.psi) * (red.b + np.abs(red.c) + np.abs(red.m)))
    bad = np.abs(red.reality_defect) > tol * scale
    if np.any(bad):
        raise HypothesisViolation(
            f"discriminant not real at {int(bad.sum())} samples (max defect {np.abs(red.reality_defect).max():.3g})")
    if np.any(red.positivity_margin <= 0):
        raise NotHyperbolicError("not strongly hyperbolic at double point: Re(b2 c2) <= (Im a2)^2")
    Sp = np.empty(red.T.shape, dtype=complex)
    Sp[..., 0, 0] = red.c.real
    Sp[..., 0, 1] = 1j * red.m
    Sp[..., 1, 0] = -1j * red.m
    Sp[..., 1, 1] = red.b
    Tinv = np.linalg.inv(red.T)
    S = np.swapaxes(Tinv, -1, -2).conj() @ Sp @ Tinv
    return 0.5 * (S + np.swapaxes(S, -1, -2).conj())
