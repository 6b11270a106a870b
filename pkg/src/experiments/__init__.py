"""
Experiment Harness
Rate sweeps, closed-form validators, coupling diagnostics and the
transport self-test, plus CSV/manifest emission.
"""

from .models import CheckResult, RateFit, RateRow, ValidationReport

__all__ = ["CheckResult", "RateFit", "RateRow", "ValidationReport"]
