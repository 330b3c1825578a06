"""Built-in test problems."""

from __future__ import annotations

import numpy as np
from scipy.linalg import block_diag
from scipy.stats import ortho_group

from .dist import SigmaLaw
from .polymat import MatrixPolynomial

__all__ = ["L_PENCIL", "demo_pencil", "corank2_law", "kronecker_block", "random_singular_pencil"]

# L(x) = L1 x + L0: 4x4 real pencil of normal rank 3 with simple eigenvalue 1
L_PENCIL = {
    "L1": [[-1, 1, 4, 2], [-2, 3, 12, 6], [1, 3, 11, 6], [2, 2, 7, 4]],
    "L0": [[2, -1, -5, -1], [6, -2, -11, -2], [5, 0, -2, 0], [3, 1, 3, 1]],
}


def demo_pencil() -> MatrixPolynomial:
    """The 4x4 singular pencil ``L(x)``; eigenvalue 1, ``gamma^-1 = 12.16``."""
    return MatrixPolynomial.from_coeffs([np.array(L_PENCIL["L0"], dtype=float),
                                         np.array(L_PENCIL["L1"], dtype=float)], "real")


def corank2_law(beta: int) -> SigmaLaw:
    """Law with ``n=4, d=2, r=2, gamma=1``."""
    return SigmaLaw(beta=beta, N=48, ell=3, gamma=1.0)


def kronecker_block(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Right singular block ``L_k(x) = x [I 0] + [0 I]`` of size ``k x (k+1)``; returns ``(A0, A1)``."""
    A1 = np.eye(k, k + 1)
    A0 = np.eye(k, k + 1, 1)
    return A0, A1


def random_singular_pencil(seed: int, eigenvalues=(0.5, -1.0, 2.0), ks=(1,)):
    """Random real singular pencil with known simple eigenvalues.

    Builds ``diag(R(x), L_k(x) (+) L_k(x)^T, ...)`` for each ``k`` in ``ks``,
    where ``R(x) = S (x I - D) T`` is regular with ``D = diag(eigenvalues)``,
    then rotates by random orthogonal matrices on both sides. Each ``k``
    contributes one to ``n - r``.

    Returns
    -------
    P : MatrixPolynomial
    eigenvalues : ndarray
    """
    rng = np.random.default_rng(seed)
    m = len(eigenvalues)
    S = rng.standard_normal((m, m)) + 2 * np.eye(m)
    T = rng.standard_normal((m, m)) + 2 * np.eye(m)
    blocks0 = [-S @ np.diag(eigenvalues) @ T]
    blocks1 = [S @ T]
    for k in ks:
        A0, A1 = kronecker_block(k)
        blocks0.append(np.block([[A0, np.zeros((k, k))], [np.zeros((k + 1, k + 1)), A0.T]]))
        blocks1.append(np.block([[A1, np.zeros((k, k))], [np.zeros((k + 1, k + 1)), A1.T]]))
    C0, C1 = block_diag(*blocks0), block_diag(*blocks1)
    n = C0.shape[0]
    Q1 = ortho_group.rvs(n, random_state=rng)
    Q2 = ortho_group.rvs(n, random_state=rng)
    P = MatrixPolynomial.from_coeffs([Q1 @ C0 @ Q2, Q1 @ C1 @ Q2], "real")
    return P, np.asarray(eigenvalues, dtype=float)
