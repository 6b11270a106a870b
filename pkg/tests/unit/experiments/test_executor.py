import time

import pytest

from experiments.executor import run_jobs


def test_results_in_key_order():
    jobs = {3: lambda: "c", 1: lambda: "a", 2: lambda: "b"}
    out = run_jobs(jobs, threads=1, show_progress=False)
    assert list(out) == [1, 2, 3]
    assert list(out.values()) == ["a", "b", "c"]


def test_thread_pool_keeps_key_order():
    def slow(value, delay):
        def job():
            time.sleep(delay)
            return value
        return job

    jobs = {(g, r): slow(g * 10 + r, 0.02 * (3 - g)) for g in range(3) for r in range(2)}
    out = run_jobs(jobs, threads=4, show_progress=False)
    assert list(out) == sorted(jobs)
    assert out[(2, 1)] == 21


def test_failure_is_raised_after_drain():
    done = []

    def ok():
        done.append(1)
        return 1

    def boom():
        raise RuntimeError("broken job")

    with pytest.raises(RuntimeError, match="broken job"):
        run_jobs({0: boom, 1: ok, 2: ok}, threads=2, show_progress=False)
    assert len(done) == 2
