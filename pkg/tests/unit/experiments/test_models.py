import math
import unittest

from analysis.regression import LogLogFit
from experiments.models import CheckResult, RateFit, RateRow, ValidationReport


def rate_row(gamma, w, excluded=False):
    return RateRow(gamma, 64, 1, w, 0.01, w, 0.01, w, 0.01, 0.001, 0.0, excluded=excluded)


class TestValidationReport(unittest.TestCase):
    def test_passes_only_when_all_pass(self):
        report = ValidationReport("demo")
        report.add(CheckResult("a", True))
        self.assertTrue(report.passed)
        report.add(CheckResult("b", False, "too large", 2.0, 1.0))
        self.assertFalse(report.passed)
        self.assertEqual([c.name for c in report.failures], ["b"])

    def test_rows(self):
        report = ValidationReport("demo", [CheckResult("a", True, "ok", 0.5, 1.0)])
        other = ValidationReport("other", [CheckResult("b", True)])
        report.extend(other)
        rows = report.rows()
        self.assertEqual(rows[0], {
            "report": "demo", "name": "a", "passed": True, "detail": "ok", "value": 0.5, "tolerance": 1.0,
        })
        self.assertEqual(rows[1]["report"], "demo")

    def test_empty_report_passes(self):
        self.assertTrue(ValidationReport("empty").passed)


class TestRateFit(unittest.TestCase):
    def test_without_fit(self):
        fit = RateFit([rate_row(2.0, 0.5), rate_row(4.0, 0.25, excluded=True)])
        row = fit.summary_row()
        self.assertTrue(math.isnan(row["slope"]))
        self.assertTrue(math.isnan(row["slope_ci_low"]))
        self.assertEqual(row["points"], 1)
        self.assertEqual(fit.excluded, [4.0])

    def test_with_fit(self):
        fit = RateFit([rate_row(2.0, 0.5)], fit=LogLogFit(-1.0, 0.0, None, slope_ci=(-1.1, -0.9)))
        self.assertEqual(fit.summary_row()["slope_ci_high"], -0.9)
        self.assertEqual(fit.slope, -1.0)
