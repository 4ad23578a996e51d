"""Structural VARs identified through a one-time shift in shock volatility.

Reduced-form estimation (OLS, GLS, ML, Gibbs), eigen identification,
kurtosis-robust tests of equal eigenvalues, zero/sign restrictions and
robust-Bayes bounds for set-identified impulse responses.
"""

__version__ = "0.1.0"

from .bounds import AlgoConfig, BoundsResult, EtaFunctional, run_algorithm1  # noqa: E402
from .gibbs import GibbsConfig, PriorSpec, default_diffuse_prior, run_gibbs  # noqa: E402
from .het_test import estimate_kurtosis, h_test  # noqa: E402
from .identification import NormalizationRule, pool_eigenvalues, solve_eigen, solve_svd  # noqa: E402
from .reduced_form import Dataset, ReducedForm, gls_estimate, ml_estimate, ols_estimate  # noqa: E402
from .restrictions import RestrictionSpec, SignRestriction, ZeroRestriction, classify, compile  # noqa: E402
from .simulate import HsvarTruth, simulate  # noqa: E402

__all__ = [
    "AlgoConfig",
    "BoundsResult",
    "Dataset",
    "EtaFunctional",
    "GibbsConfig",
    "HsvarTruth",
    "NormalizationRule",
    "PriorSpec",
    "ReducedForm",
    "RestrictionSpec",
    "SignRestriction",
    "ZeroRestriction",
    "classify",
    "compile",
    "default_diffuse_prior",
    "estimate_kurtosis",
    "gls_estimate",
    "h_test",
    "ml_estimate",
    "ols_estimate",
    "pool_eigenvalues",
    "run_algorithm1",
    "run_gibbs",
    "simulate",
    "solve_eigen",
    "solve_svd",
]
