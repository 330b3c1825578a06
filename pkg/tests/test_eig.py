import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from weakcond.eig import (
    MultipleEigenvalueError,
    NotAnEigenvalueError,
    all_eigenvalues,
    power_norm,
    spectral_data,
)
from weakcond.fixtures import L_PENCIL, random_singular_pencil
from weakcond.mc import gaussian_coeffs, sigma_samples
from weakcond.polymat import MatrixPolynomial, evaluate
from weakcond.sensitivity import directional_sensitivity

from conftest import random_poly


def _exact_gamma_L():
    """gamma for L(x) at 1 from exact kernels, in rational arithmetic until the final sqrt."""
    x = sp.symbols("x")
    L1, L0 = sp.Matrix(L_PENCIL["L1"]), sp.Matrix(L_PENCIL["L0"])
    A = L1 + L0
    q1 = sp.Matrix([x, -2 * x ** 2 - 4 * x + 1, x, x ** 2 - 1]).subs(x, 1)
    p1 = sp.Matrix([1, 0, -1, 1])
    Ny = A.nullspace()
    Nx = A.T.nullspace()
    # components of ker L(1) and ker L(1)^T orthogonal to the rational kernels
    v = next(w - (w.dot(q1) / q1.dot(q1)) * q1 for w in Ny if (w - (w.dot(q1) / q1.dot(q1)) * q1) != sp.zeros(4, 1))
    u = next(w - (w.dot(p1) / p1.dot(p1)) * p1 for w in Nx if (w - (w.dot(p1) / p1.dot(p1)) * p1) != sp.zeros(4, 1))
    val = abs(u.dot(L1 * v)) / sp.sqrt(u.dot(u) * v.dot(v)) / sp.sqrt(2)
    return float(val)


def test_gamma_L_against_exact_oracle(SL):
    g = _exact_gamma_L()
    assert g == pytest.approx(0.08223, abs=5e-6)
    assert SL.gamma == pytest.approx(g, rel=1e-12)
    assert 1 / SL.gamma == pytest.approx(12.16, abs=0.01)


def test_L_bases_match_printed_columns(SL):
    # four-digit columns printed for the example; equal up to sign
    X = np.array([[0.5774, -0.7061], [0.0, 0.4888], [-0.5774, -0.4345], [0.5774, 0.2716]])
    Y = np.array([[0.1924, -0.6873], [-0.9623, -0.1322], [0.1924, 0.02644], [0, 0.7137]])
    for got, ref in ((SL.X, X), (SL.Y, Y)):
        for k in range(2):
            c = got[:, k]
            s = np.sign(np.vdot(ref[:, k], c).real)
            assert np.allclose(s * c.real, ref[:, k], atol=1e-4), (got, ref)
            assert np.allclose(c.imag, 0, atol=1e-14)


def test_spectral_invariants(SL, L):
    for M in (SL.X, SL.Y):
        assert np.allclose(M.conj().T @ M, np.eye(SL.ell), atol=1e-12)
    Pl = evaluate(L, SL.lam)
    nP = np.linalg.norm(L.coeffs.ravel())
    assert np.linalg.norm(Pl.conj().T @ SL.X) <= 1e-8 * nP
    assert np.linalg.norm(Pl @ SL.Y) <= 1e-8 * nP
    assert abs(np.vdot(SL.U[:, 0], SL.u)) <= 1e-12 and abs(np.vdot(SL.V[:, 0], SL.v)) <= 1e-12
    assert SL.ell == 2 and SL.N == 32 and SL.r == 3


def test_diag_pencil(diag12):
    S = spectral_data(diag12, 1.0)
    assert S.gamma == pytest.approx(1 / np.sqrt(2), rel=1e-15)
    np.testing.assert_allclose(S.u, [1, 0], atol=1e-15)
    np.testing.assert_allclose(S.v, [1, 0], atol=1e-15)
    assert S.regular and S.U.shape == (2, 0)


def test_all_eigenvalues_diag(diag12):
    np.testing.assert_allclose(np.sort(all_eigenvalues(diag12).real), [1, 2], atol=1e-14)


def test_all_eigenvalues_L(L):
    ev = all_eigenvalues(L)
    assert ev.shape == (4,)
    assert np.min(np.abs(ev - 1)) <= 1e-12


def test_cubic_against_determinant_roots():
    rng = np.random.default_rng(11)
    P = random_poly(rng, 2, 3)
    x = sp.symbols("x")
    M = sp.zeros(2, 2)
    for j in range(4):
        M += sp.Matrix(P.coeffs[j].tolist()) * x ** j
    roots = np.array([complex(r) for r in sp.Poly(sp.expand(M.det()), x).nroots(n=30)])
    ev = all_eigenvalues(P)
    assert ev.size == 6
    for z in roots:
        assert np.min(np.abs(ev - z)) <= 1e-8 * max(1, abs(z))


def test_regular_known_factorisation():
    rng = np.random.default_rng(5)
    lams = np.array([0.5, -1.5, 2.0])
    A = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    B = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    P = MatrixPolynomial.from_coeffs([-A @ np.diag(lams) @ B, A @ B])
    for i, lam in enumerate(lams):
        # P(x) = A diag(x - lam_i) B: v = B^-1 e_i, u = A^-* e_i, P'(lam) = A B
        v = np.linalg.solve(B, np.eye(3)[:, i])
        u = np.linalg.solve(A.T, np.eye(3)[:, i])
        g = abs(u @ A @ B @ v) / (np.linalg.norm(u) * np.linalg.norm(v) * power_norm(lam, 1))
        assert spectral_data(P, lam).gamma == pytest.approx(g, rel=1e-10)


def test_not_an_eigenvalue(L, diag12):
    with pytest.raises(NotAnEigenvalueError):
        spectral_data(L, 3.0)
    with pytest.raises(NotAnEigenvalueError):
        spectral_data(diag12, 1.5)


def test_multiple_eigenvalue():
    P = MatrixPolynomial.from_coeffs([-np.eye(2), np.eye(2)])  # (x-1) I: semisimple double
    with pytest.raises(MultipleEigenvalueError):
        spectral_data(P, 1.0)
    J = MatrixPolynomial.from_coeffs([np.array([[-1.0, 1.0], [0.0, -1.0]]), np.eye(2)])  # Jordan block
    with pytest.raises(MultipleEigenvalueError):
        spectral_data(J, 1.0)


def test_refinement_recovers_perturbed_input(L):
    S = spectral_data(L, 1 + 1e-7)
    assert abs(S.lam - 1) <= 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([0.5, -1.0, 2.0]))
def test_gamma_unitary_invariance(seed, lam):
    P, _ = random_singular_pencil(seed % 1000, ks=(1,))
    rng = np.random.default_rng(seed)
    Q1, Q2 = unitary_group.rvs(P.n, random_state=rng), unitary_group.rvs(P.n, random_state=rng)
    g0 = spectral_data(P, lam).gamma
    assert spectral_data(P.transform(Q1, Q2), lam).gamma == pytest.approx(g0, rel=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(0.01, 100), st.floats(0, 2 * np.pi))
def test_gamma_scaling(seed, c, phase):
    P, ev = random_singular_pencil(seed % 1000, ks=(1,))
    S0 = spectral_data(P, ev[0])
    S1 = spectral_data(P * (c * np.exp(1j * phase)), ev[0])
    assert S1.gamma == pytest.approx(c * S0.gamma, rel=1e-8)
    for A, B in ((S0.Y, S1.Y), (S0.X, S1.X)):
        assert np.linalg.norm(B - A @ (A.conj().T @ B)) <= 1e-8


def test_gamma_independent_of_kernel_basis_choice(SL, L):
    # any orthonormal basis of the same spans gives the same |u^* P' v|
    rng = np.random.default_rng(0)
    W = unitary_group.rvs(2, random_state=rng)
    X2 = SL.X @ W
    Y2 = SL.Y @ W.conj().T
    M = X2.conj().T @ SL.dP @ Y2
    assert np.linalg.matrix_rank(M, tol=1e-10) == 1
    assert abs(np.linalg.svd(M, compute_uv=False)[0]) / power_norm(1, 1) == pytest.approx(SL.gamma, rel=1e-12)


@pytest.mark.parametrize("beta", [1, 2])
def test_regular_worst_case(diag12, beta):
    S = spectral_data(diag12, 1.0)
    sig = sigma_samples(S, 10_000, seed=4, beta=beta)
    assert np.all(sig * S.gamma <= 1 + 1e-12)
    # the maximising direction E_j = conj(lam^j) u v^* attains gamma^-1
    c = np.stack([np.conj(S.lam) ** j * np.outer(S.u, S.v.conj()) for j in range(S.d + 1)])
    E = MatrixPolynomial(c / np.linalg.norm(c.ravel()), "complex")
    assert directional_sensitivity(S, diag12, E) == pytest.approx(1 / S.gamma, rel=1e-14)


@pytest.mark.parametrize("n,d,beta", [(1, 1, 1), (1, 1, 2), (1, 3, 1), (2, 1, 1)])
def test_regular_worst_case_sampled_max(n, d, beta):
    # sampling reaches 5% of the worst case only for small N; see the ledger for N up to 32
    rng = np.random.default_rng(n * 10 + d)
    P = random_poly(rng, n, d)
    lam = all_eigenvalues(P)
    lam = lam[np.isfinite(lam)]
    lam = lam[np.argmin(np.abs(lam.imag))]
    S = spectral_data(P, lam)
    sig = sigma_samples(S, 10_000, seed=1, beta=beta)
    assert sig.max() * S.gamma <= 1 + 1e-12
    assert sig.max() * S.gamma >= 0.95
