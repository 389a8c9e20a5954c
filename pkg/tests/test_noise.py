import math

import numpy as np

import pytest
from scipy.optimize import brentq

import noise
from ghz_errors import ArityError, NonMonotoneMarginError, NoThresholdError, RangeError
from infometrics import binary_entropy
from inequalities import mermin_correlation_report, paradox_settings, xy_settings
from noise import (
    BIPARTITE_BC, TRIPARTITE_ENTROPIC, TRIPARTITE_MERMIN, Scenario, find_threshold, margin_at,
    optimize_settings, optimized_threshold, preset_scenario, settings_from_params, sweep,
)
from qstate import ghz_state, maximally_mixed, singlet_state


def test_scenario_resolves_aliases():
    assert preset_scenario("entropic3").family == TRIPARTITE_ENTROPIC
    assert preset_scenario("mermin3").family == TRIPARTITE_MERMIN
    assert preset_scenario("bc2").family == BIPARTITE_BC


def test_scenario_validation():
    with pytest.raises(RangeError):
        Scenario("chsh", ghz_state(), paradox_settings())
    with pytest.raises(ArityError):
        Scenario(TRIPARTITE_ENTROPIC, ghz_state(), paradox_settings()[:4])
    with pytest.raises(ArityError):
        Scenario(BIPARTITE_BC, ghz_state(), xy_settings((0, 1, 2, 3)))


def test_margin_at_endpoints():
    scenario = preset_scenario("entropic3")
    assert margin_at(scenario, 0.0) == pytest.approx(-1.0, abs=1e-9)
    assert margin_at(scenario, 1.0) == pytest.approx(2.0, abs=1e-9)


def test_entropic_threshold():
    result = find_threshold(preset_scenario("entropic3"), tol=1e-4)
    assert 0.121 <= result.p_star <= 0.125
    assert 3 * binary_entropy(result.p_star / 2) == pytest.approx(1.0, abs=1e-3)
    assert result.bracket_width <= 1e-4
    assert result.margin_at_p_star >= -1e-10


def test_entropic_threshold_matches_closed_form():
    exact = brentq(lambda p: 3 * binary_entropy(p / 2) - 1, 0.01, 0.5, xtol=1e-12)
    result = find_threshold(preset_scenario("entropic3"), tol=1e-6)
    assert result.p_star == pytest.approx(exact, abs=2e-6)


def test_mermin_threshold():
    result = find_threshold(preset_scenario("mermin3"), tol=1e-4)
    assert 0.499 <= result.p_star <= 0.501


def test_no_violation_at_zero_noise():
    with pytest.raises(NoThresholdError):
        find_threshold(preset_scenario("entropic3", maximally_mixed(3)))


def test_non_monotone_margin_is_rejected(monkeypatch):
    monkeypatch.setattr(noise, "margin_at", lambda scenario, p: -1.0 + 3 * p - 2 * math.sin(6 * p) ** 2)
    with pytest.raises(NonMonotoneMarginError):
        find_threshold(preset_scenario("entropic3"))


def test_invalid_tolerance():
    with pytest.raises(RangeError):
        find_threshold(preset_scenario("entropic3"), tol=0.0)


def test_sweep_rows():
    rows = sweep(preset_scenario("entropic3"), [0.0, 0.5, 1.0])
    assert [r.p for r in rows] == [0.0, 0.5, 1.0]
    assert rows[0].margin == pytest.approx(-1.0, abs=1e-9)
    assert rows[-1].lhs == pytest.approx(1.0, abs=1e-9)
    assert rows[0].margin < rows[1].margin < rows[2].margin


def test_settings_from_params_symmetric():
    settings = settings_from_params(TRIPARTITE_ENTROPIC, noise.MODE_SYMMETRIC, (math.pi / 6, -math.pi / 12))
    expected = paradox_settings()
    for got, want in zip(settings, expected):
        assert got.bloch == pytest.approx(want.bloch, abs=1e-12)


def test_optimize_entropic_reaches_full_violation():
    best = optimize_settings(TRIPARTITE_ENTROPIC, ghz_state(), p=0.0, restarts=2)
    assert best.margin == pytest.approx(-1.0, abs=1e-6)
    assert best.margin <= best.grid_margin + 1e-12


def test_optimize_never_worse_than_grid():
    best = optimize_settings(BIPARTITE_BC, singlet_state(), p=0.0, restarts=2, seed=1)
    assert best.margin < 0
    assert best.margin <= best.grid_margin + 1e-12
    assert best.scenario.family == BIPARTITE_BC


def test_bipartite_threshold():
    result, best = optimized_threshold("bc2", singlet_state(), tol=1e-4, restarts=2, seed=0)
    assert 0.03 <= result.p_star <= 0.05, f"p*={result.p_star} with settings {best.params}"


def test_preset_bc_guess_violates_at_zero_noise():
    assert margin_at(preset_scenario("bc2"), 0.0) < 0


def test_parallel_sweep_keeps_order():
    scenario = preset_scenario("mermin3")
    ps = [0.0, 0.25, 0.5, 0.75, 1.0]
    serial = sweep(scenario, ps, jobs=1)
    parallel = sweep(scenario, ps, jobs=2)
    assert [r.margin for r in serial] == pytest.approx([r.margin for r in parallel], abs=1e-15)


@pytest.mark.parametrize("family", ["entropic3", "mermin3"])
def test_margin_is_continuous_in_noise(family):
    scenario = preset_scenario(family)
    for p in np.linspace(0.0, 1.0 - 1e-6, 41):
        assert abs(margin_at(scenario, p + 1e-6) - margin_at(scenario, p)) <= 1e-3


def test_entropic_margin_matches_closed_form_on_grid():
    scenario = preset_scenario("entropic3")
    for p in np.linspace(0.0, 1.0, 21):
        assert margin_at(scenario, p) == pytest.approx(3 * binary_entropy(p / 2) - 1, abs=1e-10)


@pytest.mark.parametrize("family", ["entropic3", "mermin3"])
def test_threshold_brackets_the_sign_change(family):
    scenario = preset_scenario(family)
    tol = 1e-4
    result = find_threshold(scenario, tol=tol)
    assert margin_at(scenario, result.p_star) >= -1e-10
    assert margin_at(scenario, result.p_star - tol) < 0
    assert margin_at(scenario, result.p_star + tol) > 0
    assert find_threshold(scenario, tol=tol) == result


def test_optimize_mermin_reaches_algebraic_maximum():
    best = optimize_settings(TRIPARTITE_MERMIN, ghz_state(), p=0.0, restarts=2)
    report = mermin_correlation_report(ghz_state(), *best.scenario.settings)
    assert report.details["mermin_value"] == pytest.approx(4.0, abs=1e-6)
    assert best.margin == pytest.approx(-2.0, abs=1e-6)
