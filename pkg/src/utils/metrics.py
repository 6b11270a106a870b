"""
Stage timings for kramers runs

A stage (target sampling, one γ, a validator) records wall-clock seconds
and optionally how many samples it produced. The run manifest carries the
summary; CSV outputs never do.
"""

import functools
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class StageRecord:
    seconds: List[float] = field(default_factory=list)
    samples: int = 0

    def summary(self) -> Dict[str, float]:
        total = sum(self.seconds)
        out = {
            "count": len(self.seconds),
            "total": total,
            "mean": total / len(self.seconds),
            "max": max(self.seconds),
        }
        if self.samples:
            out["samples"] = self.samples
            if total > 0:
                out["samples_per_second"] = self.samples / total
        return out


class StageTimings:
    """Per-process registry of stage records, keyed by stage name"""

    def __init__(self):
        self._stages: Dict[str, StageRecord] = {}

    def record(self, stage: str, seconds: float, samples: int = 0):
        rec = self._stages.setdefault(stage, StageRecord())
        rec.seconds.append(seconds)
        rec.samples += samples

    def get_stats(self, stage: str) -> Optional[Dict[str, float]]:
        rec = self._stages.get(stage)
        return rec.summary() if rec else None

    def get_all_stats(self) -> Dict[str, Dict[str, float]]:
        return {name: self._stages[name].summary() for name in sorted(self._stages)}

    def reset(self):
        self._stages.clear()


_timings = StageTimings()


def get_metrics() -> StageTimings:
    return _timings


class Timer:
    """
    Time a stage; the record is written even when the block raises.

        with Timer("simulate.gamma_4", log=True, samples=n):
            ...
    """

    def __init__(self, name: str, log: bool = False, samples: int = 0):
        self.name = name
        self.log = log
        self.samples = samples
        self.elapsed: Optional[float] = None
        self._start = 0.0

    def __enter__(self):
        self._start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.elapsed = time.perf_counter() - self._start
        _timings.record(self.name, self.elapsed, self.samples)
        if self.log:
            rate = f", {self.samples / self.elapsed:.0f} samples/s" if self.samples and self.elapsed > 0 else ""
            logger.info(f"{self.name} took {self.elapsed:.3f}s{rate}")
        return False


def track_performance(stage: str):
    """Record every call of the decorated function under `stage`."""

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            with Timer(stage):
                return func(*args, **kwargs)

        return wrapper

    return decorator
