"""
Error Handling Utilities for kramers
Exception hierarchy shared by all modules, plus a decorator that lets
validators record a failing sub-check instead of aborting the report.
"""

import functools
from typing import Any, Callable, Optional, TypeVar

from utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")


class KramersError(Exception):
    """Base class for all kramers errors"""


class DimensionMismatchError(KramersError, ValueError):
    """Raised when two objects live in spaces of different dimension"""

    def __init__(self, expected: int, got: int, what: str = "argument"):
        self.expected = expected
        self.got = got
        super().__init__(f"Dimension mismatch for {what}: expected {expected}, got {got}")


class NonFiniteStateError(KramersError, FloatingPointError):
    """Raised when an integrator produces NaN or inf"""

    def __init__(self, step: int, message: Optional[str] = None):
        self.step = step
        super().__init__(message or f"Non-finite state at step {step}")


class NoiseExhaustedError(KramersError, IndexError):
    """Raised when a noise path is read beyond its length"""


class MisalignedBinsError(KramersError, ValueError):
    """Raised when macroscopic bins do not line up with microscopic steps"""


class NotApplicableError(KramersError, ValueError):
    """Raised when a closed form is requested for a model it does not cover"""


class MissingEvaluatorError(KramersError, ValueError):
    """Raised when a test function or density lacks a required derivative"""


class GridTooCoarseError(KramersError, ValueError):
    """Raised when a tabulated solution fails its residual tolerance"""

    def __init__(self, residual: float, tolerance: float, nodes: int):
        self.residual = residual
        self.tolerance = tolerance
        self.nodes = nodes
        super().__init__(
            f"Flux residual {residual:.3e} above tolerance {tolerance:.1e} "
            f"with {nodes} nodes; refine the grid"
        )


class ConvergenceError(KramersError, RuntimeError):
    """Raised when an iterative solver hits its iteration cap"""

    def __init__(self, solver: str, iterations: int, error: float):
        self.solver = solver
        self.iterations = iterations
        self.error = error
        super().__init__(
            f"{solver} did not converge in {iterations} iterations (error {error:.3e})"
        )


class SolverInputError(KramersError, ValueError):
    """Raised when OT inputs violate solver preconditions"""


class MarginalInequalityError(KramersError, AssertionError):
    """Raised when a marginal W1 exceeds the joint W1"""


class SampleRoundTripError(KramersError, OSError):
    """Raised when a saved sample does not read back to the same point cloud"""


class ConfigError(KramersError, ValueError):
    """Raised for invalid experiment configuration"""

    def __init__(self, message: str, errors: Optional[list] = None):
        self.errors = errors or []
        super().__init__(message)


def report_failures(check_name: str, log_error: bool = True):
    """
    Decorator turning an exception inside a validator sub-check into a
    failed CheckResult.

    Args:
        check_name: Name stored in the resulting CheckResult
        log_error: Whether to log the error

    Example:
        @report_failures("velocity covariance")
        def check_velocity(sample):
            ...
            return CheckResult(...)
    """

    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @functools.wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> T:
            try:
                return func(*args, **kwargs)
            except KramersError as e:
                if log_error:
                    logger.warning(f"Check '{check_name}' errored in {func.__name__}: {e}")
                from experiments.models import CheckResult

                return CheckResult(name=check_name, passed=False, detail=str(e))

        return wrapper

    return decorator
