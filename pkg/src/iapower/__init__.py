"""Power and sample size for intervention analysis with ARIMA errors."""

from .arima import ArimaSpec, acvf, arma11_match_fractional, simulate, stationary_sigma, validate
from .dynamic import DynamicInterventionSpec, gain, gain_test_power, sigma_gain
from .estimation import Structure, fit_sia, lr_test, q_statistic, z_test
from .information import FisherInfo, closed_form, exact_info, info, pierce_info, sigma_omega
from .intervention import InterventionSpec, Kind, Sided, StudyDesign, consistency_check
from .power import (
    NoSolutionError,
    detection_limit_approx,
    detection_limit_exact,
    power,
    power_curve,
    power_delta,
    power_omega,
    qtest_power,
    sample_size,
)
from .reproduce import reproduce
from .simulation import empirical_power

__version__ = "0.1.0"

__all__ = [
    "ArimaSpec", "acvf", "arma11_match_fractional", "simulate", "stationary_sigma", "validate",
    "DynamicInterventionSpec", "gain", "gain_test_power", "sigma_gain",
    "Structure", "fit_sia", "lr_test", "q_statistic", "z_test",
    "FisherInfo", "closed_form", "exact_info", "info", "pierce_info", "sigma_omega",
    "InterventionSpec", "Kind", "Sided", "StudyDesign", "consistency_check",
    "NoSolutionError", "detection_limit_approx", "detection_limit_exact", "power", "power_curve",
    "power_delta", "power_omega", "qtest_power", "sample_size",
    "reproduce", "empirical_power",
]
