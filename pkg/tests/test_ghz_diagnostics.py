import pytest

import ghz_diagnostics
from ghz_diagnostics import SUITES, SuiteResult, host_summary, random_density_matrix, run_suite, run_suites


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suite_passes(name):
    result = run_suite(name, samples=40, seed=1)
    assert result.passed, result.detail
    assert result.name == name
    assert result.seconds >= 0


def test_run_suites_order_and_unknown():
    results = run_suites(["sign-ghz", "metric"], samples=5)
    assert [r.name for r in results] == ["sign-ghz", "metric"]
    with pytest.raises(KeyError):
        run_suites(["nope"])


def test_suite_exception_is_a_failure(monkeypatch):
    def broken(samples, seed):
        raise RuntimeError("boom")

    monkeypatch.setitem(ghz_diagnostics.SUITES, "metric", broken)
    result = run_suite("metric", samples=1, seed=0)
    assert not result.passed
    assert "boom" in result.detail


def test_random_density_matrix_is_valid():
    import numpy as np
    state = random_density_matrix(np.random.default_rng(0), 3)
    assert state.n_qubits == 3
    assert np.trace(state.matrix).real == pytest.approx(1.0)


def test_suite_result_dict():
    data = SuiteResult("x", True, 3, "ok", 0.12345).to_dict()
    assert data == {"suite": "x", "passed": True, "checked": 3, "detail": "ok", "seconds": 0.123}


def test_host_summary_without_psutil(monkeypatch):
    monkeypatch.setattr(ghz_diagnostics, "psutil", None)
    assert "psutil" in host_summary()
