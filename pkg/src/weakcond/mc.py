"""Samplers and Monte Carlo checks of the sensitivity laws.

Random streams are keyed by ``(seed, chunk index)`` with a fixed chunk size,
so every result is a pure function of its arguments and does not depend on
how many worker threads ran the chunks. ``WEAKCOND_THREADS`` caps the pool.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dist import (
    DomainError,
    SigmaLaw,
    regular_concentration_bound,
    sigma_tail_bound,
    sigma_tail_exact,
)
from .eig import SpectralData, spectral_data
from .polymat import MatrixPolynomial, coeff_norm
from .sensitivity import directional_sensitivity, gamma_bar_batch, sigma_batch

__all__ = [
    "CHUNK",
    "TailCurve",
    "worker_count",
    "chunked",
    "gaussian_coeffs",
    "uniform_coeffs",
    "sample_uniform_perturbation",
    "sigma_samples",
    "gamma_bar_samples",
    "ratio_law_samples",
    "empirical_tail",
    "qr_ensemble_check",
    "sensitivity_vs_ratio_law",
]

CHUNK = 8192


def worker_count() -> int:
    env = os.environ.get("WEAKCOND_THREADS")
    if env:
        try:
            k = int(env)
        except ValueError:
            k = 0
        if k < 1:
            raise ValueError(f"WEAKCOND_THREADS must be a positive integer, got {env!r}")
        return k
    return os.cpu_count() or 1


def chunked(samples: int, seed: int, fn: Callable[[np.random.Generator, int], np.ndarray],
            workers: int | None = None) -> np.ndarray:
    """Concatenate ``fn(rng_i, size_i)`` over fixed-size chunks, ``rng_i`` keyed by ``(seed, i)``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sizes = [CHUNK] * (samples // CHUNK)
    if samples % CHUNK:
        sizes.append(samples % CHUNK)

    def run(i):
        return fn(np.random.default_rng(np.random.SeedSequence([seed, i])), sizes[i])

    workers = worker_count() if workers is None else workers
    if workers == 1 or len(sizes) == 1:
        parts = [run(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, range(len(sizes))))
    return np.concatenate(parts)


def gaussian_coeffs(rng: np.random.Generator, size: int, n: int, d: int, beta: int) -> np.ndarray:
    """Standard (real or complex) Gaussian coefficients of shape ``(size, d+1, n, n)``."""
    shape = (size, d + 1, n, n)
    if beta == 1:
        return rng.standard_normal(shape)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def _unit(coeffs: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.sum(np.abs(coeffs.reshape(coeffs.shape[0], -1)) ** 2, axis=1))
    return coeffs / norms[:, None, None, None]


def uniform_coeffs(samples: int, n: int, d: int, beta: int, seed: int) -> np.ndarray:
    """``samples`` directions uniform on the unit sphere, shape ``(samples, d+1, n, n)``."""
    return chunked(samples, seed, lambda rng, m: _unit(gaussian_coeffs(rng, m, n, d, beta)))


def sample_uniform_perturbation(n: int, d: int, beta: int, seed: int | None) -> MatrixPolynomial:
    """Direction uniform on the unit sphere of real (``beta=1``) or complex coefficients."""
    if n < 1 or d < 1:
        raise ValueError("need n, d >= 1")
    if beta not in (1, 2):
        raise ValueError("beta must be 1 or 2")
    c = _unit(gaussian_coeffs(np.random.default_rng(seed), 1, n, d, beta))[0]
    return MatrixPolynomial(c, "real" if beta == 1 else "complex")


def sigma_samples(S: SpectralData, samples: int, seed: int, beta: int | None = None) -> np.ndarray:
    """``sigma_E`` for ``samples`` uniform directions; may contain ``inf``."""
    beta = S.field_beta if beta is None else beta
    return chunked(samples, seed, lambda rng, m: sigma_batch(S, gaussian_coeffs(rng, m, S.n, S.d, beta)))


def gamma_bar_samples(S: SpectralData, samples: int, seed: int, beta: int | None = None) -> np.ndarray:
    """Estimator ``gamma_bar`` for ``samples`` Gaussian directions."""
    beta = S.field_beta if beta is None else beta
    return chunked(samples, seed, lambda rng, m: gamma_bar_batch(S, gaussian_coeffs(rng, m, S.n, S.d, beta)))


def ratio_law_samples(law: SigmaLaw, samples: int, seed: int) -> np.ndarray:
    """Direct draws of ``gamma^-1 sqrt(Z_N / Z_ell)`` (``Z_ell = 1`` when ``ell = 1``)."""
    def fn(rng, m):
        zn = rng.beta(*law.z_params(law.N), size=m)
        zl = rng.beta(*law.z_params(law.ell), size=m) if law.ell > 1 else 1.0
        return np.sqrt(zn / zl) / law.gamma
    return chunked(samples, seed, fn)


_CSV_COLUMNS = ("t", "p_exact", "p_bound", "p_empirical", "stderr")


@dataclass
class TailCurve:
    """Values of ``P{sigma_E >= t}`` on a grid; missing entries are ``nan``."""

    grid: np.ndarray
    p_exact: np.ndarray
    p_bound: np.ndarray
    p_empirical: np.ndarray
    stderr: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        if self.grid.ndim != 1 or self.grid.size == 0 or np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be nonempty and strictly ascending")
        for name in _CSV_COLUMNS[1:]:
            col = np.asarray(getattr(self, name), dtype=float)
            if col.shape != self.grid.shape:
                raise ValueError(f"{name} has shape {col.shape}, grid has {self.grid.shape}")
            setattr(self, name, col)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(_CSV_COLUMNS)
        cols = [self.grid] + [getattr(self, c) for c in _CSV_COLUMNS[1:]]
        for row in zip(*cols):
            w.writerow(["" if np.isnan(x) else f"{x:.17g}" for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, meta: dict | None = None) -> "TailCurve":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0]) != _CSV_COLUMNS:
            raise ValueError(f"expected header {','.join(_CSV_COLUMNS)}")
        data = np.array([[float(x) if x else np.nan for x in r] for r in rows[1:]], dtype=float)
        return cls(*data.T, meta=dict(meta or {}))

    def to_dict(self) -> dict:
        d = {"grid": self.grid.tolist()}
        d.update({c: getattr(self, c).tolist() for c in _CSV_COLUMNS[1:]})
        d["meta"] = dict(self.meta)
        return d


def _bound_column(law: SigmaLaw, grid: np.ndarray) -> np.ndarray:
    out = np.full(grid.shape, np.nan)
    for i, t in enumerate(grid):
        try:
            out[i] = regular_concentration_bound(law, t) if law.regular else sigma_tail_bound(law, t)
        except DomainError:
            pass
    return out


def empirical_tail(P: MatrixPolynomial | None, lam: complex | None, law: SigmaLaw | None, grid,
                   samples: int = 0, seed: int = 0, S: SpectralData | None = None,
                   exact: bool = True, bound: bool = True) -> TailCurve:
    """Empirical, exact and bound tails of ``sigma_E`` on ``grid``.

    With ``samples == 0`` only the analytic columns are filled. ``law``
    defaults to the one of ``(P, lam)``.
    """
    grid = np.asarray(grid, dtype=float)
    if S is None and (samples or law is None):
        S = spectral_data(P, lam)
    if law is None:
        law = SigmaLaw.from_spectral(S)
    meta = {"samples": int(samples), "seed": int(seed), "beta": law.beta, "N": law.N,
            "ell": law.ell, "gamma": law.gamma}
    nan = np.full(grid.shape, np.nan)
    p_emp, se = nan.copy(), nan.copy()
    if samples:
        sig = sigma_samples(S, samples, seed, law.beta)
        meta["infinite_samples"] = int(np.count_nonzero(np.isinf(sig)))
        srt = np.sort(sig)
        # P{sigma >= t}: inf samples land at the end and count in every bin
        p_emp = 1 - np.searchsorted(srt, grid, side="left") / samples
        se = np.sqrt(p_emp * (1 - p_emp) / samples)
    p_exact = np.array([sigma_tail_exact(law, t) for t in grid]) if exact else nan.copy()
    p_bound = _bound_column(law, grid) if bound else nan.copy()
    return TailCurve(grid, p_exact, p_bound, p_emp, se, meta)


def _positive_qr(A: np.ndarray):
    Q, R = np.linalg.qr(A)
    dg = np.diagonal(R, axis1=-2, axis2=-1)
    ph = np.where(dg == 0, 1, dg / np.abs(dg))
    Q = Q * ph[..., None, :]
    R = np.conj(ph)[..., :, None] * R
    return Q, R


def _zcheck(mean, target, se, k=3.0):
    z = abs(mean - target) / se if se > 0 else (0.0 if mean == target else math.inf)
    return {"mean": float(mean), "target": float(target), "stderr": float(se), "z": float(z), "pass": bool(z <= k)}


def qr_ensemble_check(n: int, beta: int, samples: int, seed: int = 0) -> dict:
    """Moment checks of the QR factors of Gaussian matrices.

    Checks ``beta r_ii^2 ~ chi^2(beta (n - i + 1))`` through its mean, zero
    mean and unit variance of the strict upper triangle, ``E|q_nn|^2 = 1/n``,
    and near-zero correlation between ``r_nn^2`` and ``|q_nn|^2``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")

    def fn(rng, m):
        A = gaussian_coeffs(rng, m, n, 0, beta)[:, 0]
        Q, R = _positive_qr(A)
        iu = np.triu_indices(n, 1)
        return np.concatenate([np.abs(np.diagonal(R, axis1=1, axis2=2)) ** 2,
                               np.abs(Q[:, -1:, -1]) ** 2,
                               R[:, iu[0], iu[1]].real, R[:, iu[0], iu[1]].imag,
                               (np.diagonal(R, axis1=1, axis2=2).real.min(axis=1) > 0)[:, None]], axis=1)

    data = chunked(samples, seed, fn)
    m = n * (n - 1) // 2
    rdiag2, q2 = data[:, :n], data[:, n]
    off = data[:, n + 1:n + 1 + m] + 1j * data[:, n + 1 + m:n + 1 + 2 * m]
    positive = bool(np.all(data[:, -1] == 1))

    checks = {}
    for i in range(n):
        x = beta * rdiag2[:, i]
        checks[f"chi2_r{i + 1}{i + 1}"] = _zcheck(x.mean(), beta * (n - i), x.std(ddof=1) / math.sqrt(samples))
    pooled = off.ravel()
    cnt = pooled.size
    checks["offdiag_mean_re"] = _zcheck(pooled.real.mean(), 0.0, pooled.real.std(ddof=1) / math.sqrt(cnt))
    if beta == 2:
        checks["offdiag_mean_im"] = _zcheck(pooled.imag.mean(), 0.0, pooled.imag.std(ddof=1) / math.sqrt(cnt))
    a2 = np.abs(pooled) ** 2
    checks["offdiag_var"] = _zcheck(a2.mean(), 1.0, a2.std(ddof=1) / math.sqrt(cnt))
    checks["q_nn_mean"] = _zcheck(q2.mean(), 1 / n, q2.std(ddof=1) / math.sqrt(samples))
    corr = float(np.corrcoef(rdiag2[:, -1], q2)[0, 1])
    checks["independence"] = {"corr": corr, "threshold": 3 / math.sqrt(samples),
                              "pass": bool(abs(corr) < 3 / math.sqrt(samples))}
    checks["positive_diagonal"] = {"pass": positive}
    return {"n": n, "beta": beta, "samples": samples, "seed": seed, "checks": checks,
            "passed": all(c["pass"] for c in checks.values())}


def sensitivity_vs_ratio_law(P: MatrixPolynomial, lam: complex, samples: int, seed: int = 0,
                             S: SpectralData | None = None, rtol: float = 1e-10) -> dict:
    """Compare ``sigma_E`` with ``1 / (|h_ll| |u^* P'(lam) v| ||E||)``, ``H = (X^* E(lam) Y)^-1``.

    Directions are Gaussian and not normalised; directions with numerically
    singular ``X^* E(lam) Y`` are skipped and counted.
    """
    if S is None:
        S = spectral_data(P, lam)
    rng = np.random.default_rng(seed)
    powers = S.lam ** np.arange(S.d + 1)
    worst, skipped = 0.0, 0
    for _ in range(samples):
        c = gaussian_coeffs(rng, 1, S.n, S.d, P.beta)[0]
        E = MatrixPolynomial(c, "real" if P.beta == 1 else "complex")
        G = S.X.conj().T @ np.tensordot(powers, c, axes=1) @ S.Y
        if np.linalg.cond(G) > 1e12:
            skipped += 1
            continue
        h = np.linalg.inv(G)[-1, -1]
        via_h = 1 / (abs(h) * abs(S.uPv) * coeff_norm(E))
        direct = directional_sensitivity(S, P, E)
        worst = max(worst, abs(direct - via_h) / via_h)
    return {"samples": samples, "seed": seed, "skipped": skipped, "max_rel_discrepancy": float(worst),
            "rtol": rtol, "passed": bool(worst <= rtol)}
