#!/usr/bin/env python3
"""
LHV Oracle - classical joint distributions over all six observables

Variables are ordered A1, A2, B1, B2, C1, C2 (indices 0..5). Every classical
bound on the tripartite contexts is checked here against joints that exist
by construction, and lhv_feasibility decides whether four context tables
can come from any such joint at all.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from ghz_errors import ArityError, ProbabilityError, SignalingError, SolverError
from inequalities import TRIPARTITE_LABELS, InequalityReport, make_report
from infometrics import marginal, multi_delta
from qstate import JointOutcomeDistribution, outcome_tuples

log = logging.getLogger("LHV")

# ============================================================================
# CONFIGURATION
# ============================================================================

VARIABLES = ("A1", "A2", "B1", "B2", "C1", "C2")
N_VARIABLES = len(VARIABLES)
N_ASSIGNMENTS = 2 ** N_VARIABLES

JOINT_SUM_TOL = 1e-12
SIGNALING_TOL = 1e-9
MATCH_TOL = 1e-9
CERTIFICATE_TOL = 1e-9

# D, A, B, C in report order
CONTEXT_INDICES = (
    (0, 2, 4),   # D = A1 B1 C1
    (0, 3, 5),   # A = A1 B2 C2
    (1, 2, 5),   # B = A2 B1 C2
    (1, 3, 4),   # C = A2 B2 C1
)

# intermediate step: product B1·B2·C1·C2
BRIDGE_INDICES = (2, 3, 4, 5)

_HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


# ============================================================================
# DATA STRUCTURES
# ============================================================================

@dataclass(frozen=True, eq=False)
class ClassicalJoint:
    """Probabilities over the 64 assignments of (A1, A2, B1, B2, C1, C2)"""
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if p.size != N_ASSIGNMENTS:
            raise ArityError(f"A classical joint needs {N_ASSIGNMENTS} probabilities, got {p.size}")
        if np.any(p < 0):
            raise ProbabilityError(f"Negative weight {p.min():.3e} in classical joint")
        if abs(p.sum() - 1.0) > JOINT_SUM_TOL:
            raise ProbabilityError(f"Classical joint sums to {p.sum()!r}, expected 1")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_mapping(cls, mapping: Dict[Tuple[int, ...], float]) -> "ClassicalJoint":
        return cls(JointOutcomeDistribution.from_mapping(N_VARIABLES, mapping).probs)

    @cached_property
    def distribution(self) -> JointOutcomeDistribution:
        return JointOutcomeDistribution(N_VARIABLES, self.probs)

    def context(self, indices: Sequence[int]) -> JointOutcomeDistribution:
        return marginal(self.distribution, indices)


@dataclass(frozen=True)
class DeterministicStrategy:
    assignment: Tuple[int, ...]

    def __post_init__(self):
        if len(self.assignment) != N_VARIABLES:
            raise ArityError(f"A strategy assigns {N_VARIABLES} values, got {len(self.assignment)}")
        if any(v not in (1, -1) for v in self.assignment):
            raise ProbabilityError(f"Strategy values must be ±1, got {self.assignment}")

    def as_joint(self) -> ClassicalJoint:
        return ClassicalJoint.from_mapping({tuple(self.assignment): 1.0})


@dataclass(frozen=True)
class StrategyProducts:
    """Composite values a = A1B2C2, b = A2B1C2, c = A2B2C1, d = A1B1C1"""
    a: int
    b: int
    c: int
    d: int
    product: int


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: Optional[ClassicalJoint] = None
    residual: float = 0.0
    # y with A^T y >= 0 and b·y < 0 over the stacked context constraints
    certificate: Optional[np.ndarray] = None
    certificate_value: float = 0.0
    message: str = ""

    def to_dict(self) -> dict:
        data = {"feasible": self.feasible, "residual": self.residual, "message": self.message}
        if self.certificate is not None:
            data["certificate_value"] = self.certificate_value
        return data


def all_strategies() -> Tuple[DeterministicStrategy, ...]:
    return tuple(DeterministicStrategy(o) for o in outcome_tuples(N_VARIABLES))


# ============================================================================
# GENERATORS AND CHECKS
# ============================================================================

def random_joint(seed: int) -> ClassicalJoint:
    """Flat Dirichlet draw over the 64 assignments"""
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(N_ASSIGNMENTS))
    return ClassicalJoint(weights / weights.sum())


def strategy_product_check(strategy: DeterministicStrategy) -> StrategyProducts:
    s = strategy.assignment
    d, a, b, c = (s[i] * s[j] * s[k] for i, j, k in CONTEXT_INDICES)
    return StrategyProducts(a=a, b=b, c=c, d=d, product=a * b * c * d)


def context_distributions(joint: ClassicalJoint) -> Tuple[JointOutcomeDistribution, ...]:
    """Three-variable marginals for D, A, B, C"""
    return tuple(joint.context(indices) for indices in CONTEXT_INDICES)


def classical_entropic_mermin(joint: ClassicalJoint) -> InequalityReport:
    entropies = [multi_delta(joint.distribution, indices).bits for indices in CONTEXT_INDICES]
    report = make_report(entropies[0], entropies[1:], TRIPARTITE_LABELS)
    if report.violated:
        log.error(f"classical joint violates the entropic inequality: margin {report.margin:.3e}")
    return report


def derivation_chain_report(joint: ClassicalJoint) -> Tuple[InequalityReport, InequalityReport]:
    """The two steps behind the entropic inequality:

        delta(A1,B1,C1) <= delta(A1,B2,C2) + delta(B1,B2,C1,C2)
        delta(B1,B2,C1,C2) <= delta(A2,B2,C1) + delta(A2,B1,C2)
    """
    dist = joint.distribution
    d = {indices: multi_delta(dist, indices).bits for indices in CONTEXT_INDICES + (BRIDGE_INDICES,)}
    first = make_report(d[CONTEXT_INDICES[0]], [d[CONTEXT_INDICES[1]], d[BRIDGE_INDICES]],
                        ("A1B1C1", "A1B2C2", "B1B2C1C2"))
    second = make_report(d[BRIDGE_INDICES], [d[CONTEXT_INDICES[3]], d[CONTEXT_INDICES[2]]],
                         ("B1B2C1C2", "A2B2C1", "A2B1C2"))
    return first, second


# ============================================================================
# FEASIBILITY
# ============================================================================

def _setting_marginals(contexts: Sequence[JointOutcomeDistribution]) -> Dict[int, list]:
    seen: Dict[int, list] = {v: [] for v in range(N_VARIABLES)}
    for ctx, indices in zip(contexts, CONTEXT_INDICES):
        for position, variable in enumerate(indices):
            seen[variable].append(marginal(ctx, (position,)).probs[0])
    return seen


def check_no_signaling(contexts: Sequence[JointOutcomeDistribution]):
    for variable, p_plus in _setting_marginals(contexts).items():
        spread = max(p_plus) - min(p_plus)
        if spread > SIGNALING_TOL:
            raise SignalingError(
                f"{VARIABLES[variable]} has P(+1) differing by {spread:.3e} across contexts {p_plus}")


def _constraint_matrix() -> np.ndarray:
    """Rows: 8 outcome cells per context; columns: 64 assignments"""
    outcomes = np.array(outcome_tuples(N_VARIABLES), dtype=int)
    rows = []
    for indices in CONTEXT_INDICES:
        bits = (outcomes[:, list(indices)] == -1).astype(int)
        cell = bits @ np.array([4, 2, 1])
        rows.append(np.eye(8)[:, cell])
    return np.vstack(rows)


def lhv_feasibility(contexts: Sequence[JointOutcomeDistribution]) -> FeasibilityResult:
    """Search for 64 nonnegative weights reproducing the D, A, B, C context tables"""
    if len(contexts) != 4:
        raise ArityError(f"Expected 4 context distributions (D, A, B, C), got {len(contexts)}")
    for ctx in contexts:
        if ctx.n_parties != 3:
            raise ArityError(f"Context distributions are over 3 parties, got {ctx.n_parties}")
    check_no_signaling(contexts)

    a_eq = _constraint_matrix()
    b_eq = np.concatenate([ctx.probs for ctx in contexts])
    res = linprog(np.zeros(N_ASSIGNMENTS), A_eq=a_eq, b_eq=b_eq, bounds=(0, None),
                  method="highs", options=_HIGHS_OPTIONS)

    if res.status == 0:
        weights = np.clip(res.x, 0.0, None)
        weights /= weights.sum()
        residual = float(np.max(np.abs(a_eq @ weights - b_eq)))
        if residual <= MATCH_TOL:
            log.debug(f"feasible, residual {residual:.2e}")
            return FeasibilityResult(True, witness=ClassicalJoint(weights), residual=residual,
                                     message="joint distribution exists")
        log.warning(f"solver returned weights with residual {residual:.2e}; treating as infeasible")

    # Farkas alternative: minimize b·y subject to A^T y >= 0, |y| <= 1
    cert = linprog(b_eq, A_ub=-a_eq.T, b_ub=np.zeros(N_ASSIGNMENTS), bounds=(-1, 1),
                   method="highs", options=_HIGHS_OPTIONS)
    if cert.status == 0 and cert.fun < -CERTIFICATE_TOL:
        log.debug(f"infeasible, certificate value {cert.fun:.6f}")
        return FeasibilityResult(False, certificate=cert.x, certificate_value=float(cert.fun),
                                 message="no joint distribution reproduces the contexts")
    raise SolverError(f"inconclusive: feasibility LP status {res.status} ({res.message}), "
                      f"certificate LP status {cert.status} value {cert.fun}")
