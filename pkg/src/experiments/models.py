"""
Data Models for Experiment Results
Check outcomes, validator reports and rate-sweep rows.
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from analysis.regression import LogLogFit


@dataclass
class CheckResult:
    """Outcome of one validator sub-check"""

    name: str
    passed: bool
    detail: str = ""
    value: Optional[float] = None
    tolerance: Optional[float] = None


@dataclass
class ValidationReport:
    """Named list of checks; passes only if every check passes"""

    name: str
    checks: List[CheckResult] = field(default_factory=list)

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    def extend(self, other: "ValidationReport") -> None:
        self.checks.extend(other.checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def rows(self) -> List[Dict]:
        return [{"report": self.name, **asdict(c)} for c in self.checks]


@dataclass
class RateRow:
    """One γ of a rate sweep: W1 estimates, bootstrap SEs and the bias floor"""

    gamma: float
    n: int
    repetitions: int
    w_joint: float
    w_joint_se: float
    w_position: float
    w_position_se: float
    w_velocity: float
    w_velocity_se: float
    bias_floor: float
    bias_floor_se: float
    analytic: float = float("nan")
    excluded: bool = False


RATE_COLUMNS = [
    "gamma",
    "n",
    "repetitions",
    "w_joint",
    "w_joint_se",
    "w_position",
    "w_position_se",
    "w_velocity",
    "w_velocity_se",
    "bias_floor",
    "bias_floor_se",
    "analytic",
    "excluded",
]


@dataclass
class RateFit:
    """Rows sorted by γ plus the log-log fit of w_joint over the included rows"""

    rows: List[RateRow]
    fit: Optional[LogLogFit] = None
    replicates: Dict[float, np.ndarray] = field(default_factory=dict)

    @property
    def slope(self) -> float:
        return self.fit.slope if self.fit else float("nan")

    @property
    def intercept(self) -> float:
        return self.fit.intercept if self.fit else float("nan")

    @property
    def slope_ci(self) -> Optional[Tuple[float, float]]:
        return self.fit.slope_ci if self.fit else None

    @property
    def excluded(self) -> List[float]:
        return [r.gamma for r in self.rows if r.excluded]

    def summary_row(self) -> Dict[str, float]:
        ci = self.slope_ci or (float("nan"), float("nan"))
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_ci_low": ci[0],
            "slope_ci_high": ci[1],
            "points": sum(1 for r in self.rows if not r.excluded),
        }
