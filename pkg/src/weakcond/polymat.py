"""Matrix polynomials: representation, evaluation, normal rank and kernels.

A matrix polynomial of grade ``d`` is stored as a stack of ``d + 1`` square
coefficient matrices, constant term first::

    P(x) = P_0 + P_1 x + ... + P_d x^d

The grade is kept even when ``P_d`` vanishes, because the dimension of the
perturbation space ``N = n^2 (d + 1)`` depends on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "MatrixPolynomial",
    "PolyVectorBasis",
    "RankInstabilityError",
    "KernelSearchError",
    "evaluate",
    "derivative_at",
    "coeff_norm",
    "normal_rank",
    "kernel_basis",
    "kernel_at",
    "linearize",
    "numerical_rank",
]

DEFAULT_RANK_TOL = 1e-10


class RankInstabilityError(ValueError):
    """Raised when too few sample points agree on the normal rank."""


class KernelSearchError(ValueError):
    """Raised when no polynomial kernel basis is found within the degree cap."""


@dataclass(frozen=True, eq=False)
class MatrixPolynomial:
    """Square matrix polynomial over the reals or the complex numbers.

    Parameters
    ----------
    coeffs : array_like, shape (d + 1, n, n)
        Coefficients ``P_0, ..., P_d``.
    field : {"real", "complex"}
        Field of the coefficients. ``"real"`` requires zero imaginary parts.
    """

    coeffs: np.ndarray
    field: str = "complex"

    def __post_init__(self):
        if self.field not in ("real", "complex"):
            raise ValueError(f"field must be 'real' or 'complex', got {self.field!r}")
        c = np.asarray(self.coeffs)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise ValueError(f"coefficients must have shape (d+1, n, n), got {c.shape}")
        if c.shape[0] < 2 or c.shape[1] < 1:
            raise ValueError("need grade d >= 1 and size n >= 1")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        if self.field == "real":
            if np.iscomplexobj(c):
                if np.any(c.imag != 0):
                    raise ValueError("real field requires zero imaginary parts")
                c = c.real
            c = np.array(c, dtype=float)
        else:
            c = np.array(c, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, field: str | None = None) -> "MatrixPolynomial":
        """Build from a list of coefficient matrices, inferring the field if not given."""
        c = np.asarray([np.asarray(m) for m in coeffs])
        if field is None:
            field = "complex" if np.iscomplexobj(c) and np.any(c.imag != 0) else "real"
        return cls(c, field)

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    @property
    def d(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def N(self) -> int:
        """Dimension of the coefficient space, ``n^2 (d + 1)``."""
        return self.n * self.n * (self.d + 1)

    @property
    def beta(self) -> int:
        return 1 if self.field == "real" else 2

    def __add__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        _check_same_shape(self, other)
        fld = "real" if self.field == other.field == "real" else "complex"
        return MatrixPolynomial(self.coeffs + other.coeffs, fld)

    def __mul__(self, c) -> "MatrixPolynomial":
        fld = self.field if np.isrealobj(c) else "complex"
        return MatrixPolynomial(self.coeffs * c, fld)

    __rmul__ = __mul__

    def conj_transpose(self) -> "MatrixPolynomial":
        """Polynomial with coefficients ``P_j^*`` (so that ``P^*(conj x) = P(x)^*``)."""
        return MatrixPolynomial(np.conj(np.swapaxes(self.coeffs, 1, 2)), self.field)

    def transform(self, left: np.ndarray, right: np.ndarray) -> "MatrixPolynomial":
        """Return ``left @ P(x) @ right`` coefficientwise."""
        c = np.einsum("ij,kjl,lm->kim", left, self.coeffs, right)
        fld = "real" if self.field == "real" and np.isrealobj(left) and np.isrealobj(right) else "complex"
        return MatrixPolynomial(c, fld)


def _check_same_shape(P: MatrixPolynomial, Q: MatrixPolynomial):
    if P.coeffs.shape != Q.coeffs.shape:
        raise ValueError(f"shape mismatch: {P.coeffs.shape} vs {Q.coeffs.shape}")


def evaluate(P: MatrixPolynomial, x0: complex) -> np.ndarray:
    """Evaluate ``P(x0)`` by Horner's scheme."""
    out = np.array(P.coeffs[-1], dtype=complex)
    for Pj in P.coeffs[-2::-1]:
        out = out * x0 + Pj
    return out


def derivative_at(P: MatrixPolynomial, x0: complex) -> np.ndarray:
    """Evaluate ``P'(x0) = sum_j j P_j x0^(j-1)`` by Horner's scheme."""
    d = P.d
    out = np.array(d * P.coeffs[d], dtype=complex)
    for j in range(d - 1, 0, -1):
        out = out * x0 + j * P.coeffs[j]
    return out


def coeff_norm(P: MatrixPolynomial) -> float:
    """Frobenius norm of the stacked coefficients ``[P_0 ... P_d]``."""
    return float(np.linalg.norm(P.coeffs.ravel()))


def numerical_rank(A: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of singular values above ``tol * sigma_max * max(shape)``."""
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0] * max(A.shape)))


def _circle_points(rng: np.random.Generator, count: int) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(count))


def normal_rank(P: MatrixPolynomial, tol: float = DEFAULT_RANK_TOL, trials: int = 5,
                seed: int | None = 0) -> int:
    """Rank of ``P(x)`` over the field of rational functions.

    The rank is sampled at ``trials`` random points on the unit circle and
    the maximum is returned. If fewer than half of the samples attain the
    maximum the threshold is deemed unreliable and
    :class:`RankInstabilityError` is raised.
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    rng = np.random.default_rng(seed)
    ranks = [numerical_rank(evaluate(P, x), tol) for x in _circle_points(rng, trials)]
    r = max(ranks)
    if ranks.count(r) < math.ceil(trials / 2):
        raise RankInstabilityError(f"sampled ranks {ranks} disagree; adjust tol={tol}")
    return r


@dataclass(frozen=True)
class PolyVectorBasis:
    """Polynomial vectors ``v(x) = sum_k v_k x^k`` spanning a rational kernel.

    ``vectors[i]`` has shape ``(deg_i + 1, n)`` holding the coefficient
    vectors, constant term first. ``null_space`` holds every kernel vector
    found at the final degree bound, which spans all polynomial kernel
    vectors of that degree.
    """

    vectors: list
    degree_bound: int
    null_space: list = field(default_factory=list, repr=False)

    def evaluate(self, x0: complex) -> np.ndarray:
        """Matrix whose columns are ``v_i(x0)``."""
        return _eval_vectors(self.vectors, x0)


def _eval_vectors(vectors, x0) -> np.ndarray:
    cols = []
    for v in vectors:
        acc = np.array(v[-1], dtype=complex)
        for vk in v[-2::-1]:
            acc = acc * x0 + vk
        cols.append(acc)
    return np.column_stack(cols) if cols else np.zeros((0, 0), dtype=complex)


def _convolution_matrix(coeffs: np.ndarray, degree: int) -> np.ndarray:
    """Block Toeplitz matrix sending the coefficients of ``v`` (degree <= ``degree``)
    to the coefficients of ``P(x) v(x)``."""
    d = coeffs.shape[0] - 1
    n = coeffs.shape[1]
    M = np.zeros(((d + degree + 1) * n, (degree + 1) * n), dtype=complex)
    for k in range(degree + 1):
        for j in range(d + 1):
            M[(j + k) * n:(j + k + 1) * n, k * n:(k + 1) * n] = coeffs[j]
    return M


def _null_vectors(M: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis of the numerical null space of ``M`` as rows."""
    _, s, Vh = np.linalg.svd(M)
    rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return np.conj(Vh[rank:])


def kernel_basis(P: MatrixPolynomial, side: str = "right", r: int | None = None,
                 tol: float = DEFAULT_RANK_TOL, seed: int | None = 0) -> PolyVectorBasis:
    """Polynomial basis of the right or left rational null space of ``P``.

    The degree bound is raised from 0 until ``n - r`` polynomial vectors with
    independent values at a random point are found. Left kernel vectors
    ``c(x)`` satisfy ``P^*(x) c(x) = 0`` with ``P^*`` having coefficients
    ``P_j^*``; their values at ``conj(lambda)`` span the left kernel at
    ``lambda``.
    """
    if side not in ("right", "left"):
        raise ValueError("side must be 'right' or 'left'")
    if r is None:
        r = normal_rank(P, tol)
    n, d = P.n, P.d
    target = n - r
    if target <= 0:
        raise ValueError("polynomial is regular; its rational kernel is trivial")
    coeffs = P.coeffs if side == "right" else np.conj(np.swapaxes(P.coeffs, 1, 2))
    rng = np.random.default_rng(seed)
    x0 = _circle_points(rng, 1)[0]

    selected: list = []
    evals = np.zeros((n, 0), dtype=complex)
    for degree in range(n * d + 1):
        null = _null_vectors(_convolution_matrix(coeffs, degree), tol)
        candidates = [w.reshape(degree + 1, n) for w in null]
        for v in candidates:
            trial = np.column_stack([evals, _eval_vectors([v], x0)])
            if numerical_rank(trial, 1e-8) > evals.shape[1]:
                selected.append(v / np.linalg.norm(v))
                evals = trial
            if len(selected) == target:
                break
        if len(selected) >= target:
            if len(selected) > target:
                raise KernelSearchError("found more kernel vectors than n - r; rank mismatch")
            return PolyVectorBasis(selected, degree, candidates)
    raise KernelSearchError(f"degree bound n*d={n * d} exceeded with {len(selected)} of {target} vectors")


def kernel_at(P: MatrixPolynomial, lam: complex, side: str = "right", r: int | None = None,
              tol: float = DEFAULT_RANK_TOL, basis: PolyVectorBasis | None = None) -> np.ndarray:
    """Orthonormal basis (``n x (n - r)``) of ``ker_lambda P(x)`` or ``ker_lambda P(x)^*``."""
    if r is None:
        r = normal_rank(P, tol)
    if r == P.n:
        return np.zeros((P.n, 0), dtype=complex)
    if basis is None:
        basis = kernel_basis(P, side, r, tol)
    x0 = lam if side == "right" else np.conj(lam)
    W = _eval_vectors(basis.null_space, x0)
    Uw, s, _ = np.linalg.svd(W, full_matrices=False)
    k = P.n - r
    if s.size < k or s[k - 1] <= 1e-8 * s[0]:
        raise KernelSearchError("kernel vectors are dependent at lambda")
    return Uw[:, :k]


def linearize(P: MatrixPolynomial) -> tuple[np.ndarray, np.ndarray]:
    """First companion pencil ``A + x B`` with the finite eigenvalues of ``P``.

    ``B = diag(P_d, I, ..., I)`` and the first block row of ``A`` is
    ``[P_{d-1} ... P_0]`` with ``-I`` on the block subdiagonal.
    """
    n, d = P.n, P.d
    if d == 1:
        return np.array(P.coeffs[0]), np.array(P.coeffs[1])
    dtype = P.coeffs.dtype
    A = np.zeros((n * d, n * d), dtype=dtype)
    B = np.eye(n * d, dtype=dtype)
    B[:n, :n] = P.coeffs[d]
    for k in range(d):
        A[:n, k * n:(k + 1) * n] = P.coeffs[d - 1 - k]
    for k in range(1, d):
        A[k * n:(k + 1) * n, (k - 1) * n:k * n] = -np.eye(n)
    return A, B
