#!/usr/bin/env python3
"""
Noise Analysis - violation margin under white noise, threshold bisection and
measurement-angle search

A Scenario bundles a family, a pure base state and its settings. Noise is
always the white-noise admixture rho(p) = (1-p)·base + p·I/2^n.
"""

import logging
import math
import multiprocessing
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from ghz_errors import ArityError, NonMonotoneMarginError, NoThresholdError, RangeError
from inequalities import (
    VIOLATION_TOL, bc_inequality_report, entropic_mermin_report, mermin_correlation_report,
    mermin_settings, paradox_settings, xy_settings,
)
from qstate import BlochObservable, DensityMatrix, ghz_state, noisy_state, singlet_state, sphere_observable

log = logging.getLogger("NOISE")

# ============================================================================
# CONFIGURATION
# ============================================================================

TRIPARTITE_ENTROPIC = "tripartite-entropic"
TRIPARTITE_MERMIN = "tripartite-mermin"
BIPARTITE_BC = "bipartite-bc"
FAMILIES = (TRIPARTITE_ENTROPIC, TRIPARTITE_MERMIN, BIPARTITE_BC)

# short names used on the command line
FAMILY_ALIASES = {
    "entropic3": TRIPARTITE_ENTROPIC,
    "mermin3": TRIPARTITE_MERMIN,
    "bc2": BIPARTITE_BC,
}

SETTINGS_COUNT = {TRIPARTITE_ENTROPIC: 6, TRIPARTITE_MERMIN: 6, BIPARTITE_BC: 4}

GRID_STEP = math.pi / 24
MONOTONE_SAMPLES = 16
MONOTONE_SLACK = 1e-9
SIMPLEX_TOL = 1e-6
MAX_THRESHOLD_ROUNDS = 5

# search spaces for optimize_settings
MODE_SYMMETRIC = "symmetric"    # A1=B1=C1, A2=B2=C2 (2 angles)
MODE_FREE = "free"              # 6 independent XY angles
MODE_COPLANAR = "coplanar"      # bipartite a, a', b, b' in the XY plane
MODE_SPHERE = "sphere"          # bipartite, 4 general Bloch vectors (8 angles)


# ============================================================================
# DATA STRUCTURES
# ============================================================================

@dataclass(frozen=True)
class Scenario:
    family: str
    base_state: DensityMatrix
    settings: Tuple[BlochObservable, ...]

    def __post_init__(self):
        family = FAMILY_ALIASES.get(self.family, self.family)
        if family not in FAMILIES:
            raise RangeError(f"Unknown family: {self.family}")
        object.__setattr__(self, "family", family)
        settings = tuple(self.settings)
        if len(settings) != SETTINGS_COUNT[family]:
            raise ArityError(f"{family} needs {SETTINGS_COUNT[family]} settings, got {len(settings)}")
        needed = 2 if family == BIPARTITE_BC else 3
        if self.base_state.n_qubits != needed:
            raise ArityError(f"{family} needs a {needed}-qubit state, got {self.base_state.n_qubits}")
        object.__setattr__(self, "settings", settings)


@dataclass(frozen=True)
class ThresholdResult:
    p_star: float
    iterations: int
    bracket_width: float
    margin_at_p_star: float
    tol: float


@dataclass(frozen=True)
class OptimizationResult:
    scenario: Scenario
    margin: float
    grid_margin: float
    params: Tuple[float, ...]
    mode: str


@dataclass(frozen=True)
class SweepRow:
    p: float
    lhs: float
    rhs_total: float
    margin: float


# ============================================================================
# MARGIN
# ============================================================================

def report_at(scenario: Scenario, p: float):
    """Inequality report for the scenario's family on rho(p)"""
    state = noisy_state(scenario.base_state, p)
    if scenario.family == TRIPARTITE_ENTROPIC:
        return entropic_mermin_report(state, *scenario.settings)
    if scenario.family == TRIPARTITE_MERMIN:
        return mermin_correlation_report(state, *scenario.settings)
    return bc_inequality_report(state, *scenario.settings)


def margin_at(scenario: Scenario, p: float) -> float:
    """rhs_total - lhs on rho(p); negative means violation"""
    return report_at(scenario, p).margin


def _margin_task(args) -> float:
    scenario, p = args
    return margin_at(scenario, p)


def _sweep_task(args) -> SweepRow:
    scenario, p = args
    report = report_at(scenario, p)
    return SweepRow(p=p, lhs=report.lhs, rhs_total=report.rhs_total, margin=report.margin)


def _map(func, items, jobs: int):
    """Ordered map, in a process pool when jobs > 1"""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [func(item) for item in items]
    with multiprocessing.Pool(processes=jobs) as pool:
        return pool.map(func, items)


def sweep(scenario: Scenario, ps: Sequence[float], jobs: int = 1) -> List[SweepRow]:
    return _map(_sweep_task, [(scenario, float(p)) for p in ps], jobs)


# ============================================================================
# THRESHOLD
# ============================================================================

def find_threshold(scenario: Scenario, tol: float = 1e-4, jobs: int = 1) -> ThresholdResult:
    """Smallest p with margin >= -1e-10, by bisection to bracket width <= tol"""
    if not 0 < tol < 1:
        raise RangeError(f"Tolerance must lie in (0, 1), got {tol}")
    samples = np.linspace(0.0, 1.0, MONOTONE_SAMPLES)
    margins = _map(_margin_task, [(scenario, float(p)) for p in samples], jobs)
    if margins[0] >= -VIOLATION_TOL:
        raise NoThresholdError(f"No violation at p=0 (margin {margins[0]:.6g}) for {scenario.family}")
    if margins[-1] < -VIOLATION_TOL:
        raise NoThresholdError(f"Violation persists at p=1 (margin {margins[-1]:.6g}) for {scenario.family}")
    steps = np.diff(margins)
    if np.any(steps < -MONOTONE_SLACK):
        worst = int(np.argmin(steps))
        raise NonMonotoneMarginError(
            f"Margin decreases between p={samples[worst]:.4f} and p={samples[worst + 1]:.4f} "
            f"({margins[worst]:.6g} -> {margins[worst + 1]:.6g})")

    # start from the sampled bracket
    crossing = int(np.argmax(np.asarray(margins) >= -VIOLATION_TOL))
    lo, hi = float(samples[crossing - 1]), float(samples[crossing])
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if margin_at(scenario, mid) < -VIOLATION_TOL:
            lo = mid
        else:
            hi = mid
        iterations += 1
        log.debug(f"bisection step {iterations}: [{lo:.6f}, {hi:.6f}]")
    result = ThresholdResult(p_star=hi, iterations=iterations, bracket_width=hi - lo,
                             margin_at_p_star=margin_at(scenario, hi), tol=tol)
    log.info(f"{scenario.family}: p* = {result.p_star:.6f} after {iterations} bisection steps")
    return result


# ============================================================================
# SETTINGS SEARCH
# ============================================================================

def settings_from_params(family: str, mode: str, params: Sequence[float]) -> Tuple[BlochObservable, ...]:
    if mode == MODE_SYMMETRIC:
        t1, t2 = params
        return xy_settings((t1, t2, t1, t2, t1, t2))
    if mode in (MODE_FREE, MODE_COPLANAR):
        return xy_settings(params)
    if mode == MODE_SPHERE:
        return tuple(sphere_observable(params[2 * k], params[2 * k + 1]) for k in range(4))
    raise RangeError(f"Unknown search mode: {mode}")


def _objective(params, family, mode, state, p) -> float:
    scenario = Scenario(family, state, settings_from_params(family, mode, params))
    return margin_at(scenario, p)


def _refine_task(args):
    family, mode, state, p, x0 = args
    result = minimize(_objective, np.asarray(x0, dtype=float), args=(family, mode, state, p),
                      method="Nelder-Mead",
                      options={"xatol": SIMPLEX_TOL, "fatol": 1e-12, "maxiter": 4000})
    return float(result.fun), tuple(float(v) for v in result.x)


def _grid_points(family: str, mode: str) -> List[Tuple[float, ...]]:
    steps = np.arange(0.0, 2 * math.pi, GRID_STEP)
    if mode == MODE_SYMMETRIC:
        return [(t1, t2) for t1 in steps for t2 in steps]
    if mode == MODE_FREE:
        return [(t1, t2, t1, t2, t1, t2) for t1 in steps for t2 in steps]
    if mode == MODE_COPLANAR:
        # chained pattern a=0, b'=theta, a'=2 theta, b=3 theta
        return [(0.0, 2 * t, 3 * t, t) for t in steps[1:len(steps) // 2]]
    raise RangeError(f"No grid for mode {mode}")


def _lift_to_sphere(params: Sequence[float]) -> Tuple[float, ...]:
    lifted = []
    for azimuth in params:
        lifted.extend((math.pi / 2, azimuth))
    return tuple(lifted)


def optimize_settings(family: str, state: DensityMatrix, p: float = 0.0, restarts: int = 4,
                      symmetric: bool = True, seed: int = 0, jobs: int = 1) -> OptimizationResult:
    """Grid search over XY-plane angles, then Nelder-Mead refinement; lowest margin wins"""
    family = FAMILY_ALIASES.get(family, family)
    if family not in FAMILIES:
        raise RangeError(f"Unknown family: {family}")
    if restarts < 1:
        raise RangeError(f"restarts must be >= 1, got {restarts}")
    if not 0.0 <= p <= 1.0:
        raise RangeError(f"Noise fraction must lie in [0, 1], got {p}")
    if family == BIPARTITE_BC:
        mode = MODE_COPLANAR
    else:
        mode = MODE_SYMMETRIC if symmetric else MODE_FREE

    rng = np.random.default_rng(seed)
    best = _search(family, mode, state, p, restarts, rng, jobs)
    if family == BIPARTITE_BC and best.margin >= -VIOLATION_TOL:
        log.info(f"coplanar search found no violation at p={p:.4f}; trying general Bloch vectors")
        starts = [_lift_to_sphere(best.params)]
        sphere = _refine_from(family, MODE_SPHERE, state, p, starts, restarts, rng, jobs,
                              grid_margin=best.grid_margin)
        if sphere.margin < best.margin:
            best = sphere
    return best


def _search(family, mode, state, p, restarts, rng, jobs) -> OptimizationResult:
    grid = _grid_points(family, mode)
    margins = _map(_refine_grid_task, [(family, mode, state, p, x) for x in grid], jobs)
    # stable sort keeps grid order among ties
    order = sorted(range(len(grid)), key=lambda k: margins[k])
    starts = [grid[k] for k in order[:restarts]]
    log.debug(f"{family}/{mode}: best grid margin {margins[order[0]]:.6g} at {grid[order[0]]}")
    return _refine_from(family, mode, state, p, starts, restarts, rng, jobs,
                        grid_margin=margins[order[0]], grid_best=grid[order[0]])


def _refine_grid_task(args) -> float:
    family, mode, state, p, params = args
    return _objective(params, family, mode, state, p)


def _refine_from(family, mode, state, p, starts, restarts, rng, jobs, grid_margin,
                 grid_best=None) -> OptimizationResult:
    starts = list(starts)
    # pad with jittered copies of the first start
    while len(starts) < restarts:
        jitter = rng.normal(0.0, GRID_STEP / 2, size=len(starts[0]))
        starts.append(tuple(np.asarray(starts[0]) + jitter))
    refined = _map(_refine_task, [(family, mode, state, p, x0) for x0 in starts], jobs)
    best_margin, best_params = min(refined, key=lambda item: item[0])
    if grid_best is not None and grid_margin <= best_margin:
        best_margin, best_params = grid_margin, tuple(grid_best)
    scenario = Scenario(family, state, settings_from_params(family, mode, best_params))
    log.debug(f"{family}/{mode}: refined margin {best_margin:.6g}")
    return OptimizationResult(scenario=scenario, margin=best_margin, grid_margin=grid_margin,
                              params=tuple(best_params), mode=mode)


def optimized_threshold(family: str, state: DensityMatrix, tol: float = 1e-4, restarts: int = 4,
                        seed: int = 0, jobs: int = 1) -> Tuple[ThresholdResult, OptimizationResult]:
    """Alternate settings search at the current threshold and bisection until p* stops growing"""
    best = optimize_settings(family, state, 0.0, restarts=restarts, seed=seed, jobs=jobs)
    result = find_threshold(best.scenario, tol, jobs=jobs)
    for round_no in range(MAX_THRESHOLD_ROUNDS):
        candidate = optimize_settings(family, state, result.p_star, restarts=restarts,
                                      seed=seed + round_no + 1, jobs=jobs)
        if candidate.margin >= -VIOLATION_TOL:
            break
        improved = find_threshold(candidate.scenario, tol, jobs=jobs)
        if improved.p_star <= result.p_star + tol:
            break
        log.info(f"round {round_no + 1}: threshold {result.p_star:.5f} -> {improved.p_star:.5f}")
        best, result = candidate, improved
    return result, best


# ============================================================================
# PRESETS
# ============================================================================

def preset_scenario(family: str, base_state: Optional[DensityMatrix] = None) -> Scenario:
    """entropic3 with pi/6 and -pi/12 settings, mermin3 with -X/Y settings, bc2 with a chained guess"""
    family = FAMILY_ALIASES.get(family, family)
    if family == TRIPARTITE_ENTROPIC:
        return Scenario(family, base_state or ghz_state(), paradox_settings())
    if family == TRIPARTITE_MERMIN:
        return Scenario(family, base_state or ghz_state(), mermin_settings())
    if family == BIPARTITE_BC:
        theta = 0.3
        return Scenario(family, base_state or singlet_state(),
                        xy_settings((0.0, 2 * theta, 3 * theta, theta)))
    raise RangeError(f"Unknown family: {family}")
