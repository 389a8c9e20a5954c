import math

import numpy as np
import pytest

from ghz_errors import ArityError, ProbabilityError, RangeError
from qstate import (
    OBS_X, OBS_Y, OBS_Z, PAULI_I, BlochObservable, DensityMatrix, JointOutcomeDistribution,
    MeasurementSetting, bloch_observable, ghz_state, joint_outcome_distribution, maximally_mixed,
    noisy_state, outcome_index, outcome_tuples, product_expectation, product_observable, purity,
    signed_sum, singlet_state, sphere_observable, xy_observable,
)


def test_ghz_matrix_entries():
    rho = ghz_state().matrix
    for i, j in ((0, 0), (0, 7), (7, 0), (7, 7)):
        assert rho[i, j] == pytest.approx(0.5)
    mask = np.ones((8, 8), dtype=bool)
    mask[[0, 0, 7, 7], [0, 7, 0, 7]] = False
    assert np.all(np.abs(rho[mask]) < 1e-15)


def test_ghz_only_three_parties():
    with pytest.raises(ArityError):
        ghz_state(2)
    with pytest.raises(ArityError):
        ghz_state(4)


def test_purity():
    assert purity(ghz_state()) == pytest.approx(1.0)
    assert purity(singlet_state()) == pytest.approx(1.0)
    assert purity(maximally_mixed(3)) == pytest.approx(1 / 8)


def test_noise_endpoints():
    assert noisy_state(ghz_state(), 0.0) == ghz_state()
    assert noisy_state(ghz_state(), 1.0) == maximally_mixed(3)
    assert noisy_state(singlet_state(), 1.0) == maximally_mixed(2)


@pytest.mark.parametrize("p", [-0.01, 1.01])
def test_noise_out_of_range(p):
    with pytest.raises(RangeError):
        noisy_state(ghz_state(), p)


def test_density_matrix_validation():
    with pytest.raises(ProbabilityError):
        DensityMatrix(2, np.eye(4) / 2)                       # trace 2
    with pytest.raises(ProbabilityError):
        DensityMatrix(2, np.diag([1.5, -0.5, 0, 0]))          # negative eigenvalue
    m = np.eye(4, dtype=complex) / 4
    m[0, 1] = 0.1j
    with pytest.raises(ProbabilityError):
        DensityMatrix(2, m)                                   # not Hermitian
    with pytest.raises(ArityError):
        DensityMatrix(1, np.eye(2) / 2)
    with pytest.raises(ArityError):
        DensityMatrix(3, np.eye(4) / 4)


def test_density_matrix_is_read_only():
    state = ghz_state()
    with pytest.raises(ValueError):
        state.matrix[0, 0] = 1.0


def test_bloch_observable_needs_unit_vector():
    with pytest.raises(RangeError):
        BlochObservable((1.0, 1.0, 0.0))
    with pytest.raises(ArityError):
        bloch_observable((1.0, 0.0))


@pytest.mark.parametrize("obs", [OBS_X, OBS_Y, OBS_Z, xy_observable(0.7), sphere_observable(1.1, -2.3)])
def test_observable_spectrum_and_projectors(obs):
    plus, minus = obs.projectors
    np.testing.assert_allclose(plus + minus, PAULI_I, atol=1e-12)
    np.testing.assert_allclose(plus - minus, obs.matrix, atol=1e-12)
    basis = obs.eigenbasis
    np.testing.assert_allclose(obs.matrix @ basis[:, 0], basis[:, 0], atol=1e-10)
    np.testing.assert_allclose(obs.matrix @ basis[:, 1], -basis[:, 1], atol=1e-10)


def test_xy_observable_matches_pauli_combination():
    theta = math.pi / 6
    expected = math.cos(theta) * OBS_X.matrix + math.sin(theta) * OBS_Y.matrix
    np.testing.assert_allclose(xy_observable(theta).matrix, expected, atol=1e-12)


def test_sign_expectations_on_ghz():
    ghz = ghz_state()
    assert product_expectation(ghz, MeasurementSetting((OBS_X, OBS_X, OBS_X))) == pytest.approx(1.0, abs=1e-10)
    for setting in ((OBS_Y, OBS_Y, OBS_X), (OBS_Y, OBS_X, OBS_Y), (OBS_X, OBS_Y, OBS_Y)):
        assert product_expectation(ghz, MeasurementSetting(setting)) == pytest.approx(-1.0, abs=1e-10)


@pytest.mark.parametrize("angles", [(0.0, 0.0, 0.0), (math.pi / 6,) * 3, (0.3, -1.2, 2.0), (math.pi, 0.5, -0.5)])
@pytest.mark.parametrize("p", [0.0, 0.25, 1.0])
def test_ghz_xy_correlation(angles, p):
    setting = MeasurementSetting(tuple(xy_observable(a) for a in angles))
    state = noisy_state(ghz_state(), p)
    expected = (1 - p) * math.cos(sum(angles))
    assert product_expectation(state, setting) == pytest.approx(expected, abs=1e-10)
    dist = joint_outcome_distribution(state, setting)
    assert signed_sum(dist) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("theta", [0.0, 0.4, math.pi / 2, 2.5])
def test_singlet_correlation(theta):
    setting = MeasurementSetting((xy_observable(0.0), xy_observable(theta)))
    assert product_expectation(singlet_state(), setting) == pytest.approx(-math.cos(theta), abs=1e-10)


def test_joint_distribution_properties():
    setting = MeasurementSetting((xy_observable(0.1), sphere_observable(0.7, 1.9), OBS_Z))
    dist = joint_outcome_distribution(noisy_state(ghz_state(), 0.3), setting)
    assert dist.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(dist.probs >= 0)
    assert dist.probs.shape == (8,)


def test_ghz_xxx_distribution():
    dist = joint_outcome_distribution(ghz_state(), MeasurementSetting((OBS_X, OBS_X, OBS_X)))
    for outcome in outcome_tuples(3):
        expected = 0.25 if np.prod(outcome) == 1 else 0.0
        assert dist[outcome] == pytest.approx(expected, abs=1e-12)


def test_arity_mismatch():
    with pytest.raises(ArityError):
        joint_outcome_distribution(ghz_state(), MeasurementSetting((OBS_X, OBS_X)))
    with pytest.raises(ArityError):
        product_observable(MeasurementSetting((OBS_X, OBS_X)), n_parties=3)


def test_outcome_index_order():
    assert outcome_index((1, 1, 1)) == 0
    assert outcome_index((-1, 1, 1)) == 4
    assert outcome_index((1, 1, -1)) == 1
    assert [outcome_index(o) for o in outcome_tuples(3)] == list(range(8))
    with pytest.raises(RangeError):
        outcome_index((1, 0))


def test_outcome_table_validation():
    with pytest.raises(ProbabilityError):
        JointOutcomeDistribution(2, [0.5, 0.5, 0.5, 0.0])
    with pytest.raises(ProbabilityError):
        JointOutcomeDistribution(2, [1.1, -0.1, 0.0, 0.0])
    with pytest.raises(ArityError):
        JointOutcomeDistribution(2, [1.0, 0.0])
    # rounding noise below the clamp tolerance is accepted and zeroed
    dist = JointOutcomeDistribution(2, [1.0 + 1e-13, -1e-13, 0.0, 0.0])
    assert dist.probs[1] == 0.0


def test_from_mapping_round_trip():
    mapping = {(1, -1): 0.25, (-1, 1): 0.75}
    dist = JointOutcomeDistribution.from_mapping(2, mapping)
    assert dist.as_dict()[(1, -1)] == pytest.approx(0.25)
    assert dist[(-1, 1)] == pytest.approx(0.75)
    assert dist[(1, 1)] == 0.0


def random_observable(rng):
    vec = rng.normal(size=3)
    return bloch_observable(vec / np.linalg.norm(vec))


def test_joint_distribution_random_states_and_settings():
    rng = np.random.default_rng(21)
    for k in range(200):
        pure = ghz_state() if k % 2 == 0 else singlet_state()
        state = noisy_state(pure, rng.random())
        setting = MeasurementSetting(tuple(random_observable(rng) for _ in range(state.n_qubits)))
        dist = joint_outcome_distribution(state, setting)
        assert dist.probs.sum() == pytest.approx(1.0, abs=1e-10)
        assert np.all(dist.probs >= 0)
        assert signed_sum(dist) == pytest.approx(product_expectation(state, setting), abs=1e-10)


def test_ghz_xy_closed_form_random_angles():
    rng = np.random.default_rng(22)
    for _ in range(100):
        angles = rng.uniform(-math.pi, math.pi, 3)
        p = rng.random()
        setting = MeasurementSetting(tuple(xy_observable(a) for a in angles))
        expected = (1 - p) * math.cos(angles.sum())
        assert product_expectation(noisy_state(ghz_state(), p), setting) == pytest.approx(expected, abs=1e-10)
