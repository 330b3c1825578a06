"""Eigenvalues via linearization and spectral data of a simple eigenvalue."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .polymat import (
    DEFAULT_RANK_TOL,
    MatrixPolynomial,
    derivative_at,
    evaluate,
    kernel_at,
    kernel_basis,
    linearize,
    normal_rank,
)

__all__ = [
    "SpectralData",
    "NotAnEigenvalueError",
    "MultipleEigenvalueError",
    "KernelDimensionError",
    "all_eigenvalues",
    "spectral_data",
    "power_norm",
    "fix_phase",
]


class NotAnEigenvalueError(ValueError):
    pass


class MultipleEigenvalueError(ValueError):
    pass


class KernelDimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Adapted bases for a simple eigenvalue ``lam`` of ``P``.

    ``X = [U u]`` spans ``ker P(lam)^*`` and ``Y = [V v]`` spans ``ker P(lam)``,
    both with orthonormal columns, where ``U`` and ``V`` span the values at
    ``lam`` of the rational left and right kernels.
    """

    lam: complex
    r: int
    n: int
    d: int
    X: np.ndarray
    Y: np.ndarray
    gamma: float
    field_beta: int
    dP: np.ndarray  # P'(lam)
    uPv: complex  # u^* P'(lam) v
    sigma_gap: float

    @property
    def ell(self) -> int:
        return self.n - self.r + 1

    @property
    def N(self) -> int:
        return self.n * self.n * (self.d + 1)

    @property
    def regular(self) -> bool:
        return self.r == self.n

    @property
    def U(self) -> np.ndarray:
        return self.X[:, :-1]

    @property
    def V(self) -> np.ndarray:
        return self.Y[:, :-1]

    @property
    def u(self) -> np.ndarray:
        return self.X[:, -1]

    @property
    def v(self) -> np.ndarray:
        return self.Y[:, -1]


def power_norm(lam: complex, d: int) -> float:
    """``(sum_{j=0}^d |lam|^(2j))^(1/2)``."""
    return float(np.sqrt(np.sum(np.abs(lam) ** (2 * np.arange(d + 1)))))


def fix_phase(x: np.ndarray) -> np.ndarray:
    """Rotate ``x`` so its largest-magnitude entry is real and positive."""
    k = int(np.argmax(np.abs(x)))
    if x[k] == 0:
        return x
    return x * (np.abs(x[k]) / x[k])


def all_eigenvalues(P: MatrixPolynomial) -> np.ndarray:
    """All ``n d`` eigenvalues of the companion pencil, computed by QZ.

    Infinite eigenvalues are returned as ``inf``. For singular ``P`` most
    values are artefacts of rounding and callers have to filter them.
    """
    A, B = linearize(P)
    ab = scipy.linalg.eig(A, -B, right=False, homogeneous_eigvals=True)
    alpha, beta = ab
    out = np.full(alpha.shape, np.inf, dtype=complex)
    finite = np.abs(beta) > np.finfo(float).eps * np.abs(alpha)
    out[finite] = alpha[finite] / beta[finite]
    return out


def _refine(P: MatrixPolynomial, lam: complex, r: int, steps: int = 2) -> complex:
    # Newton on x -> u^* P(x) v with (u, v) the r-th singular pair; a step is kept only if it
    # lowers sigma_r and stays within a relative 1e-4 of the starting point.
    floor = 100 * np.finfo(float).eps * np.linalg.norm(P.coeffs.ravel()) * power_norm(lam, P.d)

    def resid(x):
        U_, s, Vh = np.linalg.svd(evaluate(P, x))
        return s[r - 1], U_[:, r - 1], np.conj(Vh[r - 1])

    s, u, v = resid(lam)
    lam0, reach = lam, 1e-4 * max(1.0, abs(lam))
    for _ in range(steps):
        denom = np.vdot(u, derivative_at(P, lam) @ v)
        if s <= floor or denom == 0:
            break
        cand = lam - np.vdot(u, evaluate(P, lam) @ v) / denom
        s_new, u_new, v_new = resid(cand)
        if not s_new < s or abs(cand - lam0) > reach:
            break
        lam, s, u, v = cand, s_new, u_new, v_new
    return complex(lam)


def _complement_direction(N: np.ndarray, K: np.ndarray) -> np.ndarray:
    """Unit vector in span(N) orthogonal to span(K); N has ell columns, K ell-1."""
    if K.shape[1]:
        R = N - K @ (K.conj().T @ N)
    else:
        R = N
    W, s, _ = np.linalg.svd(R, full_matrices=False)
    return fix_phase(W[:, 0])


def spectral_data(P: MatrixPolynomial, lam: complex, tol: float = 1e-8,
                  rank_tol: float = DEFAULT_RANK_TOL, refine: bool = True) -> SpectralData:
    """Compute ``X``, ``Y``, ``gamma_P`` and friends for a simple eigenvalue.

    Parameters
    ----------
    P : MatrixPolynomial
    lam : complex
        The eigenvalue, or an approximation of it; it is Newton-refined
        (at most two steps, moving it by at most a relative 1e-4) unless
        ``refine=False``.
    tol : float
        Relative threshold on the singular values of ``P(lam)``.
    rank_tol : float
        Threshold used for the normal rank and kernel computations.

    Raises
    ------
    NotAnEigenvalueError
        If ``P(lam)`` does not lose rank below the normal rank.
    MultipleEigenvalueError
        If the rank drops by more than one, or ``u^* P'(lam) v`` vanishes.
    KernelDimensionError
        If the rational kernels at ``lam`` are not contained in ``ker P(lam)``.
    """
    n, d = P.n, P.d
    r = normal_rank(P, rank_tol)
    ell = n - r + 1
    lam = complex(lam)
    if refine:
        lam = _refine(P, lam, r)

    Pl = evaluate(P, lam)
    Uw, s, Vh = np.linalg.svd(Pl)
    # Cauchy-Schwarz bound on ||P(lam)||_F
    scale = np.linalg.norm(P.coeffs.ravel()) * power_norm(lam, d)
    small = int(np.sum(s <= tol * scale))
    if small < ell:
        raise NotAnEigenvalueError(
            f"P({lam}) has {small} negligible singular values, need {ell} (sigma_r = {s[r - 1]:.3e})")
    if small > ell:
        raise MultipleEigenvalueError(f"P({lam}) loses rank by {small - (n - r)} > 1 below r={r}")
    # r-1 singular values survive; the smallest of them separates the eigenvector from the rest
    sigma_gap = float(s[r - 2] / scale) if r >= 2 else 1.0
    left_null = Uw[:, n - ell:]
    right_null = np.conj(Vh[n - ell:].T)

    if r < n:
        V = kernel_at(P, lam, "right", r, rank_tol, kernel_basis(P, "right", r, rank_tol))
        U = kernel_at(P, lam, "left", r, rank_tol, kernel_basis(P, "left", r, rank_tol))
        for name, K, Nb in (("right", V, right_null), ("left", U, left_null)):
            outside = np.linalg.norm(K - Nb @ (Nb.conj().T @ K))
            if outside > 1e-6:
                raise KernelDimensionError(f"{name} rational kernel at lambda leaves ker P(lambda) ({outside:.2e})")
        # re-orthonormalise inside the exact null space
        V = np.linalg.qr(right_null @ (right_null.conj().T @ V))[0]
        U = np.linalg.qr(left_null @ (left_null.conj().T @ U))[0]
    else:
        V = np.zeros((n, 0), dtype=complex)
        U = np.zeros((n, 0), dtype=complex)
    v = _complement_direction(right_null, V)
    u = _complement_direction(left_null, U)

    dP = derivative_at(P, lam)
    uPv = complex(np.vdot(u, dP @ v))
    gamma = abs(uPv) / power_norm(lam, d)
    if abs(uPv) <= tol * scale:
        raise MultipleEigenvalueError(f"u^* P'(lambda) v = {uPv:.3e}; eigenvalue is not simple")
    return SpectralData(
        lam=lam, r=r, n=n, d=d,
        X=np.column_stack([U, u]), Y=np.column_stack([V, v]),
        gamma=float(gamma), field_beta=P.beta, dP=dP, uPv=uPv, sigma_gap=sigma_gap,
    )
