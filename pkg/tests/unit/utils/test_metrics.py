import pytest

from utils.metrics import StageTimings, Timer, get_metrics, track_performance


@pytest.fixture(autouse=True)
def fresh_timings():
    get_metrics().reset()
    yield
    get_metrics().reset()


def test_stage_summary():
    timings = StageTimings()
    for seconds in (1.0, 2.0, 3.0):
        timings.record("stage", seconds)
    assert timings.get_stats("stage") == {"count": 3, "total": 6.0, "mean": 2.0, "max": 3.0}
    assert timings.get_stats("missing") is None
    timings.reset()
    assert timings.get_all_stats() == {}


def test_sample_throughput():
    timings = StageTimings()
    timings.record("sampling", 2.0, samples=100)
    timings.record("sampling", 2.0, samples=300)
    stats = timings.get_stats("sampling")
    assert stats["samples"] == 400
    assert stats["samples_per_second"] == 100.0


def test_stages_sorted_by_name():
    timings = StageTimings()
    timings.record("b", 1.0)
    timings.record("a", 1.0)
    assert list(timings.get_all_stats()) == ["a", "b"]


def test_timer_records_global_stage():
    with Timer("tests.timer", samples=5) as timer:
        pass
    assert timer.elapsed >= 0
    stats = get_metrics().get_stats("tests.timer")
    assert stats["count"] == 1
    assert stats["samples"] == 5


def test_track_performance():
    @track_performance("tests.decorated")
    def work(x):
        return 2 * x

    assert work(2) == 4
    assert work(3) == 6
    assert get_metrics().get_stats("tests.decorated")["count"] == 2


def test_timer_records_on_error():
    with pytest.raises(RuntimeError):
        with Timer("tests.failing"):
            raise RuntimeError("stop")
    assert get_metrics().get_stats("tests.failing")["count"] == 1
