"""Statistics helpers: bootstrap, log-log regression, correlations."""

from .bootstrap import bootstrap_se, mean_and_se
from .regression import LogLogFit, fit_loglog

__all__ = ["bootstrap_se", "mean_and_se", "LogLogFit", "fit_loglog"]
