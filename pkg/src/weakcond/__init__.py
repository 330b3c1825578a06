"""Directional sensitivity and weak condition numbers of simple eigenvalues
of regular and singular matrix polynomials."""

from .condition import (
    ConditionReport,
    EstimateReport,
    condition_report,
    conditional_mean_bound,
    estimate_weak_condition,
    kappa_w_bound,
    kappa_w_exact,
    kappa_ws_bound,
    kappa_ws_exact,
)
from .dist import (
    SigmaLaw,
    beta_ratio_moment,
    beta_ratio_tail_bound,
    expected_log_bound,
    expected_sensitivity,
    regular_concentration_bound,
    sigma_tail_bound,
    sigma_tail_exact,
)
from .eig import SpectralData, all_eigenvalues, spectral_data
from .fixtures import demo_pencil, random_singular_pencil
from .mc import TailCurve, empirical_tail, qr_ensemble_check, sample_uniform_perturbation
from .polymat import MatrixPolynomial, kernel_basis, normal_rank
from .sensitivity import directional_sensitivity, limit_eigenvectors, sensitivity_report

__version__ = "0.1.0"
