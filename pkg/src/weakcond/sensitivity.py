"""First-order perturbation of a simple eigenvalue.

For a perturbation direction ``E`` the eigenvalue of ``P + eps E`` near
``lam`` moves, to first order, by::

    - det(X^* E(lam) Y) / (u^* P'(lam) v * det(U^* E(lam) V)) * eps

and the eigenvectors converge to ``X a`` and ``Y b`` where ``a``, ``b`` are
eigenvectors of the small pencil ``X^* E(lam) Y + zeta X^* P'(lam) Y``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .eig import SpectralData, all_eigenvalues, fix_phase, power_norm
from .polymat import MatrixPolynomial, coeff_norm, derivative_at, evaluate

__all__ = [
    "SensitivityReport",
    "LimitEigenvectors",
    "DegenerateDirectionError",
    "INFINITY_CUT",
    "directional_sensitivity",
    "sigma_batch",
    "first_order_eigenvalue",
    "limit_eigenvectors",
    "gamma_bar_batch",
    "sensitivity_report",
    "perturbed_eigenpair",
    "align_phase",
]

# sigma_E is reported infinite when |det(U^* E V)| < INFINITY_CUT * ||E(lam)||^(ell-1)
INFINITY_CUT = 1e-14


class DegenerateDirectionError(ValueError):
    """``X^* E(lam) Y`` is singular, so the expansion does not apply."""


def _check_direction(S: SpectralData, E: MatrixPolynomial):
    if (E.n, E.d) != (S.n, S.d):
        raise ValueError(f"perturbation has n={E.n}, d={E.d}; expected n={S.n}, d={S.d}")


def _det(A: np.ndarray) -> complex:
    # LU with partial pivoting; np.linalg.det goes through a log-determinant
    # and loses exact homogeneity under power-of-two scaling
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)  # exactly singular is fine
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    sign = (-1) ** int(np.count_nonzero(piv != np.arange(A.shape[0])))
    return sign * np.prod(np.diag(lu))


def _blocks(S: SpectralData, E: MatrixPolynomial):
    El = evaluate(E, S.lam)
    G = S.X.conj().T @ El @ S.Y
    k = S.ell - 1
    det_full = _det(G)
    det_minor = _det(G[:k, :k]) if k else 1.0
    return El, G, det_full, det_minor


def directional_sensitivity(S: SpectralData, P: MatrixPolynomial, E: MatrixPolynomial) -> float:
    """Limit ratio of eigenvalue change to ``eps ||E||`` along direction ``E``.

    Returns ``inf`` when ``det(U^* E(lam) V)`` is negligible.
    """
    _check_direction(S, E)
    nE = coeff_norm(E)
    if nE == 0:
        raise ValueError("perturbation direction must be nonzero")
    El, _, det_full, det_minor = _blocks(S, E)
    if abs(det_minor) < INFINITY_CUT * np.linalg.norm(El) ** (S.ell - 1):
        return np.inf
    return float(abs(det_full / (S.uPv * det_minor)) / nE)


def sigma_batch(S: SpectralData, coeffs: np.ndarray) -> np.ndarray:
    """Vectorised ``directional_sensitivity`` over a stack of directions.

    ``coeffs`` has shape ``(m, d + 1, n, n)``.
    """
    powers = S.lam ** np.arange(S.d + 1)
    El = np.tensordot(coeffs, powers, axes=([1], [0]))  # (m, n, n)
    G = S.X.conj().T @ El @ S.Y
    k = S.ell - 1
    det_full = np.linalg.det(G)
    norms = np.sqrt(np.sum(np.abs(coeffs.reshape(coeffs.shape[0], -1)) ** 2, axis=1))
    if k == 0:
        return np.abs(det_full) / (abs(S.uPv) * norms)
    det_minor = np.linalg.det(G[:, :k, :k])
    cut = INFINITY_CUT * np.linalg.norm(El, axis=(1, 2)) ** k
    out = np.full(coeffs.shape[0], np.inf)
    ok = np.abs(det_minor) >= cut
    out[ok] = np.abs(det_full[ok] / det_minor[ok]) / (abs(S.uPv) * norms[ok])
    return out


def first_order_eigenvalue(S: SpectralData, P: MatrixPolynomial, E: MatrixPolynomial, eps) -> complex:
    """First-order prediction of the eigenvalue of ``P + eps E`` near ``lam``."""
    _check_direction(S, E)
    El, _, det_full, det_minor = _blocks(S, E)
    if abs(det_full) < INFINITY_CUT * np.linalg.norm(El) ** S.ell:
        raise DegenerateDirectionError("X^* E(lam) Y is singular")
    slope = det_full / (S.uPv * det_minor)
    return S.lam - slope * eps


class LimitEigenvectors(NamedTuple):
    u_bar: np.ndarray
    v_bar: np.ndarray
    a: np.ndarray
    b: np.ndarray
    gamma_bar: float
    zeta: complex


def limit_eigenvectors(S: SpectralData, P: MatrixPolynomial, E: MatrixPolynomial) -> LimitEigenvectors:
    """Limits of the eigenvectors of ``P + eps E`` as ``eps -> 0``.

    Solves ``a^* (G + zeta M) = 0``, ``(G + zeta M) b = 0`` with
    ``G = X^* E(lam) Y`` and the rank-one ``M = X^* P'(lam) Y`` for the single
    finite ``zeta``.
    """
    _check_direction(S, E)
    El, G, det_full, _ = _blocks(S, E)
    if abs(det_full) < INFINITY_CUT * np.linalg.norm(El) ** S.ell:
        raise DegenerateDirectionError("X^* E(lam) Y is singular")
    M = S.X.conj().T @ S.dP @ S.Y
    # G x = w M x with w = -zeta
    (alpha, beta), vl, vr = scipy.linalg.eig(G, M, left=True, right=True, homogeneous_eigvals=True)
    mag = np.abs(beta) / np.maximum(np.abs(alpha), np.finfo(float).tiny)
    finite = mag > 1e-8 * mag.max()
    if np.count_nonzero(finite) != 1:
        raise DegenerateDirectionError(f"expected one finite eigenvalue, found {np.count_nonzero(finite)}")
    i = int(np.argmax(mag))
    zeta = complex(-alpha[i] / beta[i])
    a = fix_phase(vl[:, i] / np.linalg.norm(vl[:, i]))
    b = fix_phase(vr[:, i] / np.linalg.norm(vr[:, i]))
    u_bar = S.X @ a
    v_bar = S.Y @ b
    # modulus taken, as for gamma_P
    gamma_bar = abs(np.vdot(u_bar, S.dP @ v_bar)) / power_norm(S.lam, S.d)
    return LimitEigenvectors(u_bar, v_bar, a, b, float(gamma_bar), zeta)


def gamma_bar_batch(S: SpectralData, coeffs: np.ndarray) -> np.ndarray:
    """``gamma_bar`` of ``limit_eigenvectors`` over a stack of directions.

    ``X^* P'(lam) Y`` vanishes outside its last entry, so ``a`` and ``b`` are
    proportional to ``G^-* e_ell`` and ``G^-1 e_ell`` and
    ``gamma_bar = |a_ell b_ell u^* P'(lam) v| / ||(1, lam, ..., lam^d)||``.
    """
    powers = S.lam ** np.arange(S.d + 1)
    El = np.tensordot(coeffs, powers, axes=([1], [0]))
    G = S.X.conj().T @ El @ S.Y
    e = np.zeros(S.ell, dtype=complex)
    e[-1] = 1
    b = np.linalg.solve(G, np.broadcast_to(e, G.shape[:-1])[..., None])[..., 0]
    a = np.linalg.solve(np.conj(np.swapaxes(G, -1, -2)), np.broadcast_to(e, G.shape[:-1])[..., None])[..., 0]
    ab = np.abs(a[:, -1]) * np.abs(b[:, -1]) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
    return ab * abs(S.uPv) / power_norm(S.lam, S.d)


@dataclass
class SensitivityReport:
    sigma: float
    det_full: complex
    det_minor: complex
    eps: list = field(default_factory=list)
    predicted_lambda: list = field(default_factory=list)
    limit_left: np.ndarray | None = None
    limit_right: np.ndarray | None = None
    gamma_bar: float | None = None

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.sigma))


def sensitivity_report(S: SpectralData, P: MatrixPolynomial, E: MatrixPolynomial,
                       eps: Sequence[float] = ()) -> SensitivityReport:
    """Bundle sensitivity, predictions at ``eps`` and limit eigenvectors."""
    sigma = directional_sensitivity(S, P, E)
    _, _, det_full, det_minor = _blocks(S, E)
    rep = SensitivityReport(sigma=sigma, det_full=complex(det_full), det_minor=complex(det_minor),
                            eps=list(eps))
    try:
        rep.predicted_lambda = [first_order_eigenvalue(S, P, E, e) for e in eps]
        lim = limit_eigenvectors(S, P, E)
    except DegenerateDirectionError:
        return rep
    rep.limit_left, rep.limit_right, rep.gamma_bar = lim.u_bar, lim.v_bar, lim.gamma_bar
    return rep


def align_phase(x: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Multiply ``x`` by the unit scalar making ``<ref, x>`` real and nonnegative."""
    ip = np.vdot(ref, x)
    if ip == 0:
        return x
    return x * (abs(ip) / ip)


def perturbed_eigenpair(P: MatrixPolynomial, E: MatrixPolynomial, eps: float, lam: complex,
                        newton: int = 2):
    """Eigenvalue of ``P + eps E`` nearest ``lam`` with unit left/right eigenvectors.

    The eigenvalue comes from QZ on the companion pencil and is polished by
    Newton steps on the smallest singular value; eigenvectors are the
    singular vectors of the smallest singular value of ``(P + eps E)(mu)``.
    """
    Q = P + E * eps
    ev = all_eigenvalues(Q)
    ev = ev[np.isfinite(ev)]
    mu = complex(ev[np.argmin(np.abs(ev - lam))])
    Uw, s, Vh = np.linalg.svd(evaluate(Q, mu))
    for _ in range(newton):
        u, v = Uw[:, -1], np.conj(Vh[-1])
        step = np.vdot(u, evaluate(Q, mu) @ v) / np.vdot(u, derivative_at(Q, mu) @ v)
        if not np.isfinite(step):
            break
        cand = mu - step
        Uc, sc, Vhc = np.linalg.svd(evaluate(Q, cand))
        if not sc[-1] < s[-1]:
            break
        mu, Uw, s, Vh = cand, Uc, sc, Vhc
    return mu, Uw[:, -1], np.conj(Vh[-1])
