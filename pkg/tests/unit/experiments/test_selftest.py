from experiments.selftest import check_gaussian_identities, ot_selftest


def test_gaussian_identities():
    assert check_gaussian_identities().passed


def test_selftest_passes():
    report = ot_selftest(seed=20240601)
    assert [c.name for c in report.checks] == [
        "assignment vs brute force",
        "circle matching vs assignment",
        "marginal inequality",
        "sinkhorn vs assignment",
        "gaussian closed form",
    ]
    assert report.passed, [c.detail for c in report.failures]
