import itertools
import math

import numpy as np
import pytest

from ghz_errors import ArityError, ProbabilityError, RangeError
from infometrics import (
    BinaryDistribution, DistanceValue, bc_distance, binary_entropy, conditional_entropy,
    covariance_delta, joint_entropy, marginal, multi_delta, product_distance, product_distribution,
    product_variables_joint, shannon_entropy,
)
from qstate import (
    JointOutcomeDistribution, MeasurementSetting, ghz_state, joint_outcome_distribution, singlet_state,
    xy_observable,
)


def fair_independent(n):
    return JointOutcomeDistribution(n, np.full(2 ** n, 1 / 2 ** n))


def perfectly_correlated():
    return JointOutcomeDistribution.from_mapping(2, {(1, 1): 0.5, (-1, -1): 0.5})


@pytest.mark.parametrize("dist, expected", [
    ([0.5, 0.5], 1.0),
    ([1.0, 0.0], 0.0),
    ([0.25] * 4, 2.0),
    ([0.5, 0.25, 0.25], 1.5),
])
def test_shannon_entropy(dist, expected):
    assert shannon_entropy(dist) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("dist", [[0.5, 0.6], [1.2, -0.2], []])
def test_shannon_entropy_rejects_invalid(dist):
    with pytest.raises(ProbabilityError):
        shannon_entropy(dist)


def test_binary_entropy():
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.11) == pytest.approx(binary_entropy(0.89))


def test_binary_distribution_clamps_and_validates():
    assert BinaryDistribution(1.0 + 1e-14).p_plus == 1.0
    assert BinaryDistribution(0.25).p_minus == pytest.approx(0.75)
    with pytest.raises(ProbabilityError):
        BinaryDistribution(1.5)


def test_distance_value_nonnegative():
    assert DistanceValue(-1e-14).bits == 0.0
    with pytest.raises(RangeError):
        DistanceValue(-0.1)
    assert float(DistanceValue(0.5)) == 0.5


def test_product_distance_extremes():
    assert product_distance(perfectly_correlated()).bits == pytest.approx(0.0)
    assert product_distance(fair_independent(2)).bits == pytest.approx(1.0)


def test_repeated_variable_has_zero_distance():
    joint = fair_independent(3)
    assert product_distance(joint, (1, 1)).bits == 0.0
    assert bc_distance(joint, (2, 2)) == 0.0


def test_multi_delta_of_ghz_xxx_is_zero():
    x = xy_observable(0.0)
    dist = joint_outcome_distribution(ghz_state(), MeasurementSetting((x, x, x)))
    assert multi_delta(dist).bits == pytest.approx(0.0, abs=1e-12)


def test_multi_delta_of_fair_triple_is_one():
    assert multi_delta(fair_independent(3)).bits == pytest.approx(1.0)


def test_multi_delta_needs_variables():
    with pytest.raises(RangeError):
        multi_delta(fair_independent(3), ())


def test_product_distribution_empty_subset():
    with pytest.raises(RangeError):
        product_distribution(fair_independent(3), ())


def test_marginal_order():
    joint = JointOutcomeDistribution.from_mapping(3, {(1, 1, -1): 0.7, (-1, 1, 1): 0.3})
    m = marginal(joint, (2, 0))
    assert m[(-1, 1)] == pytest.approx(0.7)
    assert m[(1, -1)] == pytest.approx(0.3)
    with pytest.raises(ArityError):
        marginal(joint, (0, 0))
    with pytest.raises(ArityError):
        marginal(joint, (3,))


def test_conditional_entropy():
    assert conditional_entropy(perfectly_correlated()) == pytest.approx(0.0)
    assert conditional_entropy(fair_independent(2)) == pytest.approx(1.0)
    with pytest.raises(ArityError):
        conditional_entropy(fair_independent(3))


def test_joint_entropy():
    assert joint_entropy(fair_independent(3)) == pytest.approx(3.0)


def test_bc_distance_extremes():
    assert bc_distance(perfectly_correlated()) == pytest.approx(0.0)
    assert bc_distance(fair_independent(2)) == pytest.approx(2.0)
    with pytest.raises(ArityError):
        bc_distance(fair_independent(3))


@pytest.mark.parametrize("theta", [0.2, 0.9, math.pi / 2, 2.8])
def test_bc_distance_on_singlet(theta):
    setting = MeasurementSetting((xy_observable(0.0), xy_observable(theta)))
    dist = joint_outcome_distribution(singlet_state(), setting)
    expected = 2 * binary_entropy((1 - math.cos(theta)) / 2)
    assert bc_distance(dist) == pytest.approx(expected, abs=1e-10)


def test_product_variables_joint():
    joint = fair_independent(3)
    grouped = product_variables_joint(joint, [(0, 1), (1, 2), (0, 2)])
    # the third product is determined by the first two
    assert joint_entropy(grouped) == pytest.approx(2.0)
    assert grouped.n_parties == 3
    with pytest.raises(RangeError):
        product_variables_joint(joint, [(0,), ()])


def test_covariance_delta():
    assert covariance_delta(1.0) == 0.0
    assert covariance_delta(-1.0) == 2.0
    assert covariance_delta(0.25) == pytest.approx(0.75)
    with pytest.raises(RangeError):
        covariance_delta(1.5)


def test_triangle_inequality_random_joints():
    rng = np.random.default_rng(3)
    for _ in range(200):
        joint = JointOutcomeDistribution(3, rng.dirichlet(np.ones(8)))
        for dist in (lambda pair: product_distance(joint, pair).bits, lambda pair: bc_distance(joint, pair)):
            assert dist((0, 2)) <= dist((0, 1)) + dist((1, 2)) + 1e-12
            assert dist((0, 1)) == pytest.approx(dist((1, 0)), abs=1e-12)


def test_associativity_random_joints():
    rng = np.random.default_rng(4)
    for _ in range(200):
        joint = JointOutcomeDistribution(3, rng.dirichlet(np.ones(8)))
        delta = multi_delta(joint).bits
        for single, pair in ((0, (1, 2)), (1, (0, 2)), (2, (0, 1))):
            grouped = product_variables_joint(joint, [(single,), pair])
            assert product_distance(grouped).bits == pytest.approx(delta, abs=1e-12)


def test_product_chain_identity_random_joints():
    # A·B is fixed by A·C and B·C, so H(A·B | A·C, B·C) = 0
    rng = np.random.default_rng(5)
    for _ in range(1000):
        joint = JointOutcomeDistribution(3, rng.dirichlet(np.ones(8)))
        grouped = product_variables_joint(joint, [(0, 1), (0, 2), (1, 2)])
        conditional = joint_entropy(grouped) - joint_entropy(marginal(grouped, (1, 2)))
        assert conditional == pytest.approx(0.0, abs=1e-12)


def test_multi_delta_permutation_invariant():
    rng = np.random.default_rng(6)
    for _ in range(100):
        probs = rng.dirichlet(np.ones(8))
        joint = JointOutcomeDistribution(3, probs)
        expected = multi_delta(joint).bits
        for perm in itertools.permutations(range(3)):
            assert multi_delta(joint, perm).bits == pytest.approx(expected, abs=1e-12)
            relabeled = JointOutcomeDistribution(3, probs.reshape(2, 2, 2).transpose(perm).reshape(-1))
            assert multi_delta(relabeled).bits == pytest.approx(expected, abs=1e-12)


def test_shannon_entropy_is_concave():
    rng = np.random.default_rng(7)
    for _ in range(500):
        p, q = rng.dirichlet(np.ones(8)), rng.dirichlet(np.ones(8))
        lam = rng.random()
        mixed = shannon_entropy(lam * p + (1 - lam) * q)
        assert mixed >= lam * shannon_entropy(p) + (1 - lam) * shannon_entropy(q) - 1e-12
