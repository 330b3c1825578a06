"""Worst-case, stochastic and weak condition numbers of a simple eigenvalue."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy import integrate

from .dist import (
    DomainError,
    SigmaLaw,
    expected_sensitivity,
    sigma_tail_exact,
    stochastic_factor,
)
from .eig import SpectralData, power_norm, spectral_data
from .polymat import MatrixPolynomial
from .sensitivity import limit_eigenvectors

__all__ = [
    "ConditionReport",
    "EstimateReport",
    "kappa_w_exact",
    "kappa_ws_exact",
    "kappa_w_bound",
    "kappa_ws_bound",
    "condition_report",
    "conditional_mean_bound",
    "estimate_weak_condition",
]

QUANTILE_RTOL = 1e-8


def _check_delta(delta):
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")


def kappa_w_exact(law: SigmaLaw, delta: float) -> float:
    """The ``(1 - delta)``-quantile of ``sigma_E``, by bisection on the exact tail."""
    _check_delta(delta)
    lo, hi = 0.0, 1.0 / law.gamma
    while sigma_tail_exact(law, hi) > delta:
        lo, hi = hi, 2 * hi
    while hi - lo > QUANTILE_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if sigma_tail_exact(law, mid) > delta:
            lo = mid
        else:
            hi = mid
    return hi


def kappa_ws_exact(law: SigmaLaw, delta: float, kappa_w: float | None = None) -> float:
    """``E[sigma_E | sigma_E <= kappa_w(delta)]`` by integrating the tail."""
    if kappa_w is None:
        kappa_w = kappa_w_exact(law, delta)
    area, _ = integrate.quad(lambda t: sigma_tail_exact(law, t), 0.0, kappa_w, epsabs=1e-10, limit=200)
    return (area - kappa_w * delta) / (1 - delta)


def kappa_w_bound(law: SigmaLaw, delta: float) -> float:
    """Closed-form upper bound on ``kappa_w(delta)``."""
    _check_delta(delta)
    g = law.gamma
    if law.regular:
        return 1 / g
    ratio = law.corank / law.N
    if law.beta == 2:
        return max(1.0, math.sqrt(ratio / delta)) / g
    return max(1.0, math.sqrt(ratio) / delta) / g


def conditional_mean_bound(a: float, C: float, t0: float) -> float:
    """Bound on ``E[Z | Z <= t0]`` when ``P{Z >= t} <= C a / t`` for ``t > a``."""
    if not (a > 0 and C > 0 and t0 > a and C * a < t0):
        raise DomainError(f"need t0 > a > 0, C > 0 and C a < t0; got a={a}, C={C}, t0={t0}")
    return a / (1 - C * a / t0) * (1 - C * math.log(a / t0))


def kappa_ws_bound(law: SigmaLaw, delta: float) -> float | None:
    """Real singular case with ``delta < sqrt((n-r)/N)``; ``None`` otherwise."""
    _check_delta(delta)
    if law.beta != 1 or law.regular:
        return None
    C = math.sqrt(law.corank / law.N)
    if not delta < C:
        return None
    a = 1 / law.gamma
    return conditional_mean_bound(a, C, C * a / delta)


@dataclass
class ConditionReport:
    kappa: float
    kappa_s: float
    delta: float
    kappa_w: float
    kappa_w_bound: float
    kappa_ws: float
    kappa_ws_bound: float | None
    beta: int
    N: int
    ell: int
    gamma: float

    @property
    def regular(self) -> bool:
        return self.ell == 1

    def to_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if isinstance(v, float) and math.isinf(v):
                v = "infinity"
            out[k] = v
        out["regular"] = self.regular
        out["kappa_finite"] = math.isfinite(self.kappa)
        out["kappa_s_finite"] = math.isfinite(self.kappa_s)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ConditionReport":
        kw = {}
        for f in fields(cls):
            v = data[f.name]
            kw[f.name] = math.inf if v == "infinity" else v
        return cls(**kw)


def condition_report(law: SigmaLaw, delta: float) -> ConditionReport:
    _check_delta(delta)
    kw = kappa_w_exact(law, delta)
    return ConditionReport(
        kappa=1 / law.gamma if law.regular else math.inf,
        kappa_s=expected_sensitivity(law),
        delta=delta,
        kappa_w=kw,
        kappa_w_bound=kappa_w_bound(law, delta),
        kappa_ws=kappa_ws_exact(law, delta, kw),
        kappa_ws_bound=kappa_ws_bound(law, delta),
        beta=law.beta, N=law.N, ell=law.ell, gamma=law.gamma,
    )


@dataclass
class EstimateReport:
    """Weak-condition estimate built from limit eigenvectors of a perturbed problem."""

    gamma_bar: float
    kappa_bar: float
    kappa_s_bar: float
    kappa_w_bound: float
    delta: float
    eta: float
    confidence: float | None  # lower bound on P{delta^(-1/beta) kappa_s_bar >= eta kappa_w}
    beta: int
    N: int
    ell: int

    def to_dict(self) -> dict:
        return {k: ("infinity" if isinstance(v, float) and math.isinf(v) else v)
                for k, v in asdict(self).items()}


def estimate_weak_condition(P: MatrixPolynomial, lam: complex, E: MatrixPolynomial | None = None,
                            delta: float = 0.01, eta: float = 1.0, beta: int | None = None,
                            eigvecs: tuple | None = None, S: SpectralData | None = None,
                            seed: int | None = 0) -> EstimateReport:
    """Upper-bound ``kappa_w(delta)`` from eigenvectors of a nearby regular problem.

    Either pass ``eigvecs=(u_tilde, v_tilde)`` from an external solver run on
    ``P + eps E`` for small ``eps``, or let the limit eigenvectors be computed
    for direction ``E`` (drawn uniformly from the sphere when ``None``).
    """
    _check_delta(delta)
    beta = P.beta if beta is None else beta
    if eigvecs is not None:
        from .polymat import derivative_at, normal_rank

        u_t, v_t = (np.asarray(x, dtype=complex) for x in eigvecs)
        u_t, v_t = u_t / np.linalg.norm(u_t), v_t / np.linalg.norm(v_t)
        r = S.r if S is not None else normal_rank(P)
        n, d = P.n, P.d
        gamma_bar = abs(np.vdot(u_t, derivative_at(P, lam) @ v_t)) / power_norm(lam, d)
    else:
        if S is None:
            S = spectral_data(P, lam)
        if E is None:
            from .mc import sample_uniform_perturbation

            E = sample_uniform_perturbation(P.n, P.d, beta, seed)
        gamma_bar = limit_eigenvectors(S, P, E).gamma_bar
        r, n, d = S.r, S.n, S.d
    N = n * n * (d + 1)
    ell = n - r + 1
    if gamma_bar == 0:
        raise DomainError("estimator undefined: limit eigenvectors give u^* P'(lambda) v = 0")
    kappa_bar = 1 / gamma_bar
    ratio = (n - r) / N
    bound = kappa_bar * max(delta ** (-1 / beta) * math.sqrt(ratio), 1.0)
    confidence = 1 - math.exp(-beta / eta ** 2) if (ell > 1 and delta <= ratio) else None
    return EstimateReport(
        gamma_bar=float(gamma_bar), kappa_bar=kappa_bar,
        kappa_s_bar=kappa_bar * stochastic_factor(beta, N),
        kappa_w_bound=bound, delta=delta, eta=eta, confidence=confidence,
        beta=beta, N=N, ell=ell,
    )
