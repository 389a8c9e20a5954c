#!/usr/bin/env python3
"""
Inequalities - entropic Mermin, correlation Mermin, chained bipartite
inequalities and the sign-based GHZ check

Tripartite contexts use the composite-observable labels
    D = A1 B1 C1,  A = A1 B2 C2,  B = A2 B1 C2,  C = A2 B2 C1
and reports always list the right-hand side in the order A, B, C.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Sequence, Tuple

from ghz_errors import ArityError, RangeError
from infometrics import bc_distance, covariance_delta, multi_delta, product_distance
from qstate import (
    ALGEBRA_TOL, EIGEN_TOL, OBS_X, OBS_Y, BlochObservable, DensityMatrix, MeasurementSetting,
    joint_outcome_distribution, product_expectation, xy_observable,
)

VIOLATION_TOL = 1e-10

PARADOX_THETA_1 = math.pi / 6
PARADOX_THETA_2 = -math.pi / 12

TRIPARTITE_LABELS = ("D=A1B1C1", "A=A1B2C2", "B=A2B1C2", "C=A2B2C1")
BIPARTITE_LABELS = ("AB", "AB'", "A'B'", "A'B")

# the bipartite reference threshold is quoted without state or settings
BIPARTITE_ASSUMPTION = "singlet state with numerically optimized coplanar settings"


# ============================================================================
# DATA STRUCTURES
# ============================================================================

@dataclass(frozen=True)
class InequalityReport:
    """lhs <= sum(rhs_terms); margin = rhs_total - lhs, negative means violation"""
    lhs: float
    rhs_terms: Tuple[float, ...]
    rhs_total: float
    margin: float
    violated: bool
    context_labels: Tuple[str, ...]
    details: Dict[str, Any] = field(default_factory=dict, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "lhs": self.lhs,
            "rhs_terms": list(self.rhs_terms),
            "rhs_total": self.rhs_total,
            "margin": self.margin,
            "violated": self.violated,
            "labels": list(self.context_labels),
        }
        if self.details:
            data["details"] = dict(self.details)
        return data


def make_report(lhs: float, rhs_terms: Sequence[float], labels: Sequence[str],
                details: Dict[str, Any] = None) -> InequalityReport:
    rhs_terms = tuple(float(t) for t in rhs_terms)
    rhs_total = math.fsum(rhs_terms)
    margin = rhs_total - float(lhs)
    return InequalityReport(
        lhs=float(lhs),
        rhs_terms=rhs_terms,
        rhs_total=rhs_total,
        margin=margin,
        violated=margin < -VIOLATION_TOL,
        context_labels=tuple(labels),
        details=dict(details or {}),
    )


@dataclass(frozen=True)
class ParadoxTable:
    """Entropies of the four composite observables A, B, C, D"""
    h_a: float
    h_b: float
    h_c: float
    h_d: float

    def __post_init__(self):
        for name in ("h_a", "h_b", "h_c", "h_d"):
            value = getattr(self, name)
            if not -ALGEBRA_TOL <= value <= 1 + ALGEBRA_TOL:
                raise RangeError(f"{name}={value!r} outside [0, 1]")

    @property
    def margin(self) -> float:
        return self.h_a + self.h_b + self.h_c - self.h_d

    @property
    def violated(self) -> bool:
        return self.margin < -VIOLATION_TOL


@dataclass(frozen=True)
class SignCheck:
    """<YYX>, <YXY>, <XYY>, <XXX> and whether they match (-1, -1, -1, +1)"""
    yyx: float
    yxy: float
    xyy: float
    xxx: float
    consistent: bool


# ============================================================================
# SETTINGS PRESETS
# ============================================================================

TripartiteSettings = Tuple[BlochObservable, BlochObservable, BlochObservable,
                           BlochObservable, BlochObservable, BlochObservable]


def xy_settings(angles: Sequence[float]) -> Tuple[BlochObservable, ...]:
    """XY-plane observables for a1,a2,b1,b2,c1,c2 (or a,a',b,b')"""
    if len(angles) not in (4, 6):
        raise ArityError(f"Expected 4 or 6 angles, got {len(angles)}")
    return tuple(xy_observable(a) for a in angles)


def paradox_settings() -> TripartiteSettings:
    """A1=B1=C1 at pi/6, A2=B2=C2 at -pi/12"""
    t1, t2 = PARADOX_THETA_1, PARADOX_THETA_2
    return xy_settings((t1, t2, t1, t2, t1, t2))


def mermin_settings() -> TripartiteSettings:
    """A1=B1=C1=-X, A2=B2=C2=Y: the correlation form sees M = 4 on GHZ"""
    minus_x = OBS_X.negated()
    return (minus_x, OBS_Y, minus_x, OBS_Y, minus_x, OBS_Y)


# ============================================================================
# TRIPARTITE
# ============================================================================

def _check_tripartite(state: DensityMatrix):
    if state.n_qubits != 3:
        raise ArityError(f"Tripartite inequality needs a 3-qubit state, got {state.n_qubits} qubits")


def tripartite_contexts(a1, a2, b1, b2, c1, c2) -> Tuple[MeasurementSetting, ...]:
    """Contexts D, A, B, C in report order"""
    return (
        MeasurementSetting((a1, b1, c1)),
        MeasurementSetting((a1, b2, c2)),
        MeasurementSetting((a2, b1, c2)),
        MeasurementSetting((a2, b2, c1)),
    )


def entropic_mermin_report(state: DensityMatrix, a1, a2, b1, b2, c1, c2) -> InequalityReport:
    """H(A1B1C1) <= H(A1B2C2) + H(A2B1C2) + H(A2B2C1)"""
    _check_tripartite(state)
    entropies = [multi_delta(joint_outcome_distribution(state, ctx)).bits
                 for ctx in tripartite_contexts(a1, a2, b1, b2, c1, c2)]
    return make_report(entropies[0], entropies[1:], TRIPARTITE_LABELS)


def paradox_table(state: DensityMatrix) -> ParadoxTable:
    report = entropic_mermin_report(state, *paradox_settings())
    h_a, h_b, h_c = report.rhs_terms
    return ParadoxTable(h_a=h_a, h_b=h_b, h_c=h_c, h_d=report.lhs)


def mermin_correlation_report(state: DensityMatrix, a1, a2, b1, b2, c1, c2) -> InequalityReport:
    """Covariance form 1 - E111 <= (1 - E122) + (1 - E212) + (1 - E221)

    details["mermin_value"] is M = E122 + E212 + E221 - E111, the combination
    this form bounds by 2, so margin == 2 - M.
    """
    _check_tripartite(state)
    e111, e122, e212, e221 = (product_expectation(state, ctx)
                              for ctx in tripartite_contexts(a1, a2, b1, b2, c1, c2))
    m_value = e122 + e212 + e221 - e111
    return make_report(
        covariance_delta(e111),
        [covariance_delta(e122), covariance_delta(e212), covariance_delta(e221)],
        TRIPARTITE_LABELS,
        details={
            "mermin_value": m_value,
            "classical_bound": 2.0,
            "expectations": [e111, e122, e212, e221],
        },
    )


# ============================================================================
# BIPARTITE
# ============================================================================

def _bipartite_joints(state: DensityMatrix, a, a_prime, b, b_prime):
    if state.n_qubits != 2:
        raise ArityError(f"Bipartite inequality needs a 2-qubit state, got {state.n_qubits} qubits")
    pairs = ((a, b), (a, b_prime), (a_prime, b_prime), (a_prime, b))
    return [joint_outcome_distribution(state, MeasurementSetting(pair)) for pair in pairs]


def bc_inequality_report(state: DensityMatrix, a, a_prime, b, b_prime) -> InequalityReport:
    """d(A,B) <= d(A,B') + d(A',B') + d(A',B) with d = H(A|B) + H(B|A)"""
    distances = [bc_distance(joint) for joint in _bipartite_joints(state, a, a_prime, b, b_prime)]
    return make_report(distances[0], distances[1:], BIPARTITE_LABELS,
                       details={"assumption": BIPARTITE_ASSUMPTION})


def product_chain_report(state: DensityMatrix, a, a_prime, b, b_prime) -> InequalityReport:
    """Same four-term chain with the product distance d = H(A·B)"""
    distances = [product_distance(joint).bits for joint in _bipartite_joints(state, a, a_prime, b, b_prime)]
    return make_report(distances[0], distances[1:], BIPARTITE_LABELS)


# ============================================================================
# SIGN-BASED CHECK
# ============================================================================

def sign_ghz_check(state: DensityMatrix) -> SignCheck:
    _check_tripartite(state)
    x, y = OBS_X, OBS_Y
    values = [product_expectation(state, MeasurementSetting(obs))
              for obs in ((y, y, x), (y, x, y), (x, y, y), (x, x, x))]
    expected = (-1.0, -1.0, -1.0, 1.0)
    consistent = all(abs(v - e) <= EIGEN_TOL for v, e in zip(values, expected))
    return SignCheck(*values, consistent=consistent)
