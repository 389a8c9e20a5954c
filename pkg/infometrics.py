#!/usr/bin/env python3
"""
Information Metrics - Shannon entropy and the distances built on it

- product distance      d(A,B) = H(A·B)
- multi-party delta     delta(A1,...,An) = H(A1·A2·...·An)
- conditional distance  d(A,B) = H(A|B) + H(B|A)
- covariance delta      1 - <A1·A2·A3>

All entropies are in bits. Every function takes a JointOutcomeDistribution,
whether it came from a quantum state (qstate) or a classical joint (lhv).
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ghz_errors import ArityError, ProbabilityError, RangeError
from qstate import ALGEBRA_TOL, EIGEN_TOL, JointOutcomeDistribution

ZERO_PROB = 1e-15   # terms below this are exact zeros in entropy sums


# ============================================================================
# DATA STRUCTURES
# ============================================================================

@dataclass(frozen=True)
class BinaryDistribution:
    """Distribution of a ±1 variable, given by P(+1)"""
    p_plus: float

    def __post_init__(self):
        p = float(self.p_plus)
        if p < -ALGEBRA_TOL or p > 1 + ALGEBRA_TOL:
            raise ProbabilityError(f"p_plus must lie in [0, 1], got {p!r}")
        object.__setattr__(self, "p_plus", min(max(p, 0.0), 1.0))

    @property
    def p_minus(self) -> float:
        return 1.0 - self.p_plus

    @property
    def entropy(self) -> float:
        return binary_entropy(self.p_plus)


@dataclass(frozen=True)
class DistanceValue:
    """Distance in Shannon bits"""
    bits: float

    def __post_init__(self):
        if self.bits < -ALGEBRA_TOL:
            raise RangeError(f"Distance cannot be negative, got {self.bits!r}")
        object.__setattr__(self, "bits", max(float(self.bits), 0.0))

    def __float__(self):
        return self.bits


# ============================================================================
# ENTROPY
# ============================================================================

def shannon_entropy(dist: Sequence[float]) -> float:
    """-sum p log2 p with 0·log 0 = 0"""
    p = np.asarray(dist, dtype=float).reshape(-1)
    if p.size == 0:
        raise ProbabilityError("Empty probability vector")
    if np.any(p < -ALGEBRA_TOL) or np.any(p > 1 + ALGEBRA_TOL):
        raise ProbabilityError("Probabilities must lie in [0, 1]")
    if abs(p.sum() - 1.0) > EIGEN_TOL:
        raise ProbabilityError(f"Probabilities sum to {p.sum()!r}, expected 1")
    p = p[p > ZERO_PROB]
    return max(float(-np.sum(p * np.log2(p))), 0.0)


def binary_entropy(x: float) -> float:
    """h(x) = -x log2 x - (1-x) log2 (1-x)"""
    if x <= ZERO_PROB or x >= 1 - ZERO_PROB:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def joint_entropy(joint: JointOutcomeDistribution) -> float:
    return shannon_entropy(joint.probs)


def _check_indices(joint: JointOutcomeDistribution, indices: Sequence[int]) -> Tuple[int, ...]:
    indices = tuple(int(i) for i in indices)
    for i in indices:
        if not 0 <= i < joint.n_parties:
            raise ArityError(f"Variable index {i} out of range for {joint.n_parties} variables")
    return indices


def marginal(joint: JointOutcomeDistribution, indices: Sequence[int]) -> JointOutcomeDistribution:
    """Marginal over the given variables, in the given order (indices must be distinct)"""
    indices = _check_indices(joint, indices)
    if not indices:
        raise RangeError("Marginal needs at least one variable")
    if len(set(indices)) != len(indices):
        raise ArityError(f"Marginal indices must be distinct, got {indices}")
    table = joint.probs.reshape((2,) * joint.n_parties)
    drop = tuple(i for i in range(joint.n_parties) if i not in indices)
    table = table.sum(axis=drop) if drop else table
    # remaining axes are in ascending order; permute to the requested order
    kept = sorted(indices)
    table = np.transpose(table, [kept.index(i) for i in indices])
    return JointOutcomeDistribution(len(indices), table.reshape(-1))


def conditional_entropy(joint: JointOutcomeDistribution, conditioned_on: int = 1) -> float:
    """H(A|B) = H(AB) - H(B) for a two-variable joint; conditioned_on picks B"""
    if joint.n_parties != 2:
        raise ArityError(f"Conditional entropy needs a 2-variable joint, got {joint.n_parties}")
    if conditioned_on not in (0, 1):
        raise ArityError(f"conditioned_on must be 0 or 1, got {conditioned_on}")
    value = joint_entropy(joint) - joint_entropy(marginal(joint, (conditioned_on,)))
    return max(value, 0.0)


# ============================================================================
# PRODUCT VARIABLES
# ============================================================================

def _product_signs(joint: JointOutcomeDistribution, indices: Sequence[int]) -> np.ndarray:
    # repeated indices are allowed: A·A = 1
    return np.prod(joint.outcomes[:, list(indices)], axis=1)


def product_distribution(joint: JointOutcomeDistribution, subset: Sequence[int]) -> BinaryDistribution:
    """Distribution of the product of the selected ±1 variables"""
    if len(subset) == 0:
        raise RangeError("Product of an empty subset is undefined")
    subset = _check_indices(joint, subset)
    signs = _product_signs(joint, subset)
    return BinaryDistribution(float(joint.probs[signs == 1].sum()))


def product_variables_joint(joint: JointOutcomeDistribution,
                            groups: Sequence[Sequence[int]]) -> JointOutcomeDistribution:
    """Joint distribution of several product variables, one per group of indices"""
    if not groups:
        raise RangeError("Need at least one product variable")
    columns = []
    for group in groups:
        if len(group) == 0:
            raise RangeError("Product of an empty subset is undefined")
        columns.append(_product_signs(joint, _check_indices(joint, group)))
    bits = (np.stack(columns, axis=1) == -1).astype(int)
    weights = 1 << np.arange(len(groups) - 1, -1, -1)
    probs = np.bincount(bits @ weights, weights=joint.probs, minlength=2 ** len(groups))
    return JointOutcomeDistribution(len(groups), probs)


# ============================================================================
# DISTANCES
# ============================================================================

def _pair(joint: JointOutcomeDistribution, pair: Optional[Sequence[int]]) -> Tuple[int, int]:
    if pair is None:
        if joint.n_parties != 2:
            raise ArityError(f"Distance needs a 2-variable joint (or an explicit pair), got {joint.n_parties}")
        return 0, 1
    if len(pair) != 2:
        raise ArityError(f"A distance is between exactly 2 variables, got {len(pair)}")
    return _check_indices(joint, pair)


def product_distance(joint: JointOutcomeDistribution, pair: Optional[Sequence[int]] = None) -> DistanceValue:
    """d(A,B) = H(A·B)"""
    i, j = _pair(joint, pair)
    return DistanceValue(product_distribution(joint, (i, j)).entropy)


def multi_delta(joint: JointOutcomeDistribution, indices: Optional[Sequence[int]] = None) -> DistanceValue:
    """delta(A1,...,An) = H(A1·...·An); defaults to every variable of the joint"""
    if indices is None:
        indices = range(joint.n_parties)
    indices = tuple(indices)
    if not indices:
        raise RangeError("delta of zero variables is undefined")
    return DistanceValue(product_distribution(joint, indices).entropy)


def bc_distance(joint: JointOutcomeDistribution, pair: Optional[Sequence[int]] = None) -> float:
    """d(A,B) = H(A|B) + H(B|A)"""
    i, j = _pair(joint, pair)
    if i == j:
        return 0.0
    two = marginal(joint, (i, j))
    return conditional_entropy(two, conditioned_on=1) + conditional_entropy(two, conditioned_on=0)


def covariance_delta(expectation: float) -> float:
    """1 - <A1·A2·A3>"""
    if not -1 - EIGEN_TOL <= expectation <= 1 + EIGEN_TOL:
        raise RangeError(f"Expectation of a ±1 observable must lie in [-1, 1], got {expectation!r}")
    return 1.0 - expectation
