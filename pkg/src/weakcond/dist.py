"""Probability laws for the directional sensitivity under uniform perturbations.

With ``E`` uniform on the unit sphere of the (real or complex) coefficient
space, ``sigma_E`` is distributed like ``gamma^-1 sqrt(Z_N / Z_ell)`` (or
``gamma^-1 sqrt(Z_N)`` when ``ell == 1``), where ``Z_k ~ Beta(beta/2,
beta (k - 1) / 2)`` are independent. Everything here follows from that.

Gamma-function ratios are evaluated through ``gammaln`` since ``Gamma(N)``
overflows for moderate ``N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

__all__ = [
    "SigmaLaw",
    "DomainError",
    "QuadratureError",
    "beta_ratio_moment",
    "beta_ratio_tail_bound",
    "sigma_tail_exact",
    "sigma_tail_bound",
    "expected_sensitivity",
    "expected_log_bound",
    "regular_concentration_bound",
    "stochastic_factor",
]

QUAD_ABS_TOL = 1e-10


class DomainError(ValueError):
    pass


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class SigmaLaw:
    """Parameters of the sensitivity law.

    ``beta`` is 1 for real and 2 for complex perturbations, ``N = n^2 (d+1)``,
    ``ell = n - r + 1`` and ``gamma`` is the constant ``gamma_P``.
    """

    beta: int
    N: int
    ell: int
    gamma: float

    def __post_init__(self):
        if self.beta not in (1, 2):
            raise ValueError("beta must be 1 or 2")
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if self.ell < 1:
            raise ValueError("ell must be >= 1")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    @classmethod
    def from_spectral(cls, S, beta: int | None = None) -> "SigmaLaw":
        return cls(beta=S.field_beta if beta is None else beta, N=S.N, ell=S.ell, gamma=S.gamma)

    @property
    def corank(self) -> int:
        """``n - r``."""
        return self.ell - 1

    @property
    def regular(self) -> bool:
        return self.ell == 1

    def z_params(self, k: int) -> tuple[float, float]:
        return self.beta / 2, self.beta * (k - 1) / 2


def _lbeta(a, b):
    return special.gammaln(a) + special.gammaln(b) - special.gammaln(a + b)


def _check_positive(**kw):
    for name, val in kw.items():
        if not val > 0:
            raise DomainError(f"{name} must be positive, got {val}")


def beta_ratio_moment(a: float, b: float, c: float, d: float, k: float) -> float:
    """``E[(X/Y)^(1/k)]`` for independent ``X ~ B(a, b)``, ``Y ~ B(c, d)``.

    Infinite when ``c k <= 1``.
    """
    _check_positive(a=a, b=b, c=c, d=d, k=k)
    if c * k <= 1:
        return math.inf
    return float(np.exp(_lbeta(a + 1 / k, b) + _lbeta(c - 1 / k, d) - _lbeta(a, b) - _lbeta(c, d)))


def beta_ratio_tail_bound(a: float, b: float, c: float, d: float, k: float, t: float) -> float:
    """Upper bound on ``P{(X/Y)^(1/k) >= t}`` with the two branches split at ``t = 1``.

    The ``t >= 1`` branch drops a factor ``(1 - t^-k x z)^(d-1)``, which is
    only at most one when ``d >= 1``.
    """
    _check_positive(a=a, b=b, c=c, d=d, k=k, t=t)
    if t <= 1:
        return float(1 - t ** (a * k) * np.exp(_lbeta(a + c, d) - _lbeta(c, d)))
    return float(t ** (-c * k) * np.exp(_lbeta(a + c, b) - _lbeta(a, b) - _lbeta(c, d)) / c)


def _beta_sf(a, b, x):
    if x >= 1:
        return 0.0
    if x <= 0:
        return 1.0
    return float(special.betaincc(a, b, x))


def _ratio_tail(law: SigmaLaw, s: float) -> float:
    """``P{Z_N >= s Z_ell}`` for ``ell >= 2`` by quadrature over ``Z_ell``.

    With ``z = sin^2(theta)`` the beta density of ``Z_ell`` becomes
    ``2 sin^(2a-1) cos^(2b-1) / B(a, b)``, bounded for the parameters that occur.
    """
    a1, b1 = law.z_params(law.N)
    a2, b2 = law.z_params(law.ell)
    lognorm = math.log(2) - _lbeta(a2, b2)

    def integrand(th):
        sn, cs = math.sin(th), math.cos(th)
        if sn <= 0 or cs <= 0:
            w = 0.0 if (sn <= 0 and a2 > 0.5) or (cs <= 0 and b2 > 0.5) else math.exp(lognorm)
        else:
            w = math.exp(lognorm + (2 * a2 - 1) * math.log(sn) + (2 * b2 - 1) * math.log(cs))
        return w * _beta_sf(a1, b1, s * sn * sn)

    top = math.asin(math.sqrt(min(1.0, 1.0 / s)))
    # the survival function of Z_N drops over z ~ 1/(N s); give quad the scales
    pts = [math.asin(math.sqrt(c / s)) for c in (0.1 / law.N, 1 / law.N, 4 / law.N, 16 / law.N)
           if c / s < min(1.0, 1.0 / s)]
    val, err = integrate.quad(integrand, 0.0, top, points=pts or None, epsabs=QUAD_ABS_TOL,
                              epsrel=1e-10, limit=400)
    if not err <= 10 * QUAD_ABS_TOL + 1e-9 * abs(val):
        raise QuadratureError(f"quadrature error estimate {err:.2e} at s={s}")
    return float(min(1.0, max(0.0, val)))


def sigma_tail_exact(law: SigmaLaw, t: float) -> float:
    """``P{sigma_E >= t}``."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    if t == 0:
        return 1.0
    gt = float(law.gamma * t)
    s = gt * gt
    if math.isinf(s):
        return 0.0
    if law.regular:
        a1, b1 = law.z_params(law.N)
        return _beta_sf(a1, b1, s)
    return _ratio_tail(law, s)


def _real_tail_constant(law: SigmaLaw) -> float:
    m = law.corank
    return 2 / math.pi * math.exp(special.gammaln(law.N / 2) + special.gammaln((m + 1) / 2)
                                  - special.gammaln((law.N + 1) / 2) - special.gammaln(m / 2))


def sigma_tail_bound(law: SigmaLaw, t: float) -> float:
    """Closed-form tail bound for ``t >= 1/gamma`` in the singular case.

    Complex: ``(n - r) / (gamma^2 N t^2)``. Real: a gamma-ratio constant
    over ``gamma t``.
    """
    if law.regular:
        raise DomainError("tail bound applies to singular problems (ell >= 2)")
    gt = law.gamma * t
    if gt < 1 - 1e-12:
        raise DomainError(f"tail bound holds for t >= 1/gamma = {1 / law.gamma}, got t={t}")
    if law.beta == 2:
        return law.corank / (law.N * gt * gt)
    return _real_tail_constant(law) / gt


def expected_sensitivity(law: SigmaLaw) -> float:
    """``E[sigma_E]``; infinite for real singular problems."""
    g = law.gamma
    if law.beta == 2:
        return math.pi / 2 / g * math.exp(special.gammaln(law.N) + special.gammaln(law.ell)
                                          - special.gammaln(law.N + 0.5) - special.gammaln(law.ell - 0.5))
    if not law.regular:
        return math.inf
    return math.exp(special.gammaln(law.N / 2) - special.gammaln((law.N + 1) / 2)) / (math.sqrt(math.pi) * g)


def stochastic_factor(beta: int, N: int) -> float:
    """Ratio of stochastic to worst-case condition for a regular problem."""
    if beta == 2:
        return math.sqrt(math.pi) / 2 * math.exp(special.gammaln(N) - special.gammaln(N + 0.5))
    return math.exp(special.gammaln(N / 2) - special.gammaln((N + 1) / 2)) / math.sqrt(math.pi)


def expected_log_bound(law: SigmaLaw) -> float:
    """Upper bound on ``E[log sigma_E]`` for real singular problems."""
    if law.beta != 1 or law.regular:
        raise DomainError("expected-log bound is stated for real perturbations with ell >= 2")
    return math.log(2 / math.pi / law.gamma * math.sqrt(law.corank / (law.N - 1))) + 1


def regular_concentration_bound(law: SigmaLaw, t: float) -> float:
    """``exp(-beta (N-1) gamma^2 t^2 / 2)`` bounding ``P{sigma_E >= t}``, ``t <= 1/gamma``."""
    if not law.regular:
        raise DomainError("concentration bound applies to regular problems")
    gt = law.gamma * t
    if t < 0 or gt > 1 + 1e-12:
        raise DomainError(f"need 0 <= t <= 1/gamma, got t={t}")
    return math.exp(-law.beta * (law.N - 1) * gt * gt / 2)
