#!/usr/bin/env python3
"""
Qubit State Core - density matrices, local ±1 observables and outcome statistics

Houses all operator algebra used by the inequality, noise and sampling modules.

Conventions:
- Party 1 is the most significant qubit in every tensor product and basis index.
- Outcome tuples are ordered lexicographically with +1 before -1, so outcome
  index bit 0 means +1 and bit 1 means -1 (same as the bit mapping used for
  measurement strings).
- Local measurements are projective, with projectors (I ± M)/2.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from ghz_errors import ArityError, ProbabilityError, RangeError

log = logging.getLogger("QSTATE")

# ============================================================================
# CONSTANTS
# ============================================================================

ALGEBRA_TOL = 1e-12     # algebraic identities, Hermiticity, trace
EIGEN_TOL = 1e-10       # eigenvalue / PSD checks, normalization of outcome tables
CLAMP_TOL = 1e-12       # negative probabilities above -CLAMP_TOL are set to 0

SUPPORTED_QUBITS = (2, 3)

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# dim x dim complex matrix; all operator algebra is done on plain ndarrays
ComplexMatrix = np.ndarray


def matrices_equal(a: ComplexMatrix, b: ComplexMatrix, tol: float = ALGEBRA_TOL) -> bool:
    """Entry-wise comparison with absolute tolerance"""
    a = np.asarray(a)
    b = np.asarray(b)
    return a.shape == b.shape and bool(np.all(np.abs(a - b) <= tol))


def outcome_tuples(n_parties: int) -> Tuple[Tuple[int, ...], ...]:
    """All ±1 outcome tuples in index order"""
    return tuple(itertools.product((1, -1), repeat=n_parties))


def _frozen(matrix: np.ndarray) -> np.ndarray:
    matrix = np.array(matrix, copy=True)
    matrix.setflags(write=False)
    return matrix


# ============================================================================
# DATA STRUCTURES
# ============================================================================

@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, PSD, trace-1 state of 2 or 3 qubits"""
    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.n_qubits not in SUPPORTED_QUBITS:
            raise ArityError(f"Unsupported number of qubits: {self.n_qubits} (expected 2 or 3)")
        m = np.asarray(self.matrix, dtype=complex)
        dim = 2 ** self.n_qubits
        if m.shape != (dim, dim):
            raise ArityError(f"Density matrix of {self.n_qubits} qubits must be {dim}x{dim}, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > ALGEBRA_TOL:
            raise ProbabilityError("Density matrix is not Hermitian")
        trace = np.trace(m).real
        if abs(trace - 1.0) > ALGEBRA_TOL:
            raise ProbabilityError(f"Density matrix trace is {trace!r}, expected 1")
        smallest = float(np.linalg.eigvalsh(m)[0])
        if smallest < -EIGEN_TOL:
            raise ProbabilityError(f"Density matrix is not positive semidefinite (eigenvalue {smallest:.3e})")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.n_qubits == other.n_qubits and matrices_equal(self.matrix, other.matrix)

    __hash__ = None


@dataclass(frozen=True)
class BlochObservable:
    """Single-qubit ±1 observable b·σ for a unit Bloch vector b"""
    bloch: Tuple[float, float, float]

    def __post_init__(self):
        vec = tuple(float(v) for v in self.bloch)
        if len(vec) != 3:
            raise ArityError(f"Bloch vector needs 3 components, got {len(vec)}")
        norm = math.sqrt(sum(v * v for v in vec))
        if abs(norm - 1.0) > ALGEBRA_TOL:
            raise RangeError(f"Bloch vector must have unit norm, got |b| = {norm!r}")
        object.__setattr__(self, "bloch", vec)

    @cached_property
    def matrix(self) -> np.ndarray:
        bx, by, bz = self.bloch
        return _frozen(bx * PAULI_X + by * PAULI_Y + bz * PAULI_Z)

    @cached_property
    def projectors(self) -> Tuple[np.ndarray, np.ndarray]:
        """(P+, P-) = ((I + M)/2, (I - M)/2)"""
        return _frozen((PAULI_I + self.matrix) / 2), _frozen((PAULI_I - self.matrix) / 2)

    @cached_property
    def eigenbasis(self) -> np.ndarray:
        """Unitary whose column 0 is the +1 eigenvector and column 1 the -1 eigenvector"""
        values, vectors = np.linalg.eigh(self.matrix)
        if abs(values[0] + 1.0) > EIGEN_TOL or abs(values[1] - 1.0) > EIGEN_TOL:
            raise RangeError(f"Observable eigenvalues {values} are not {{-1, +1}}")
        return _frozen(vectors[:, ::-1])

    def negated(self) -> "BlochObservable":
        return BlochObservable(tuple(-v for v in self.bloch))


@dataclass(frozen=True)
class MeasurementSetting:
    """One local observable per party, party 1 first"""
    per_party: Tuple[BlochObservable, ...]

    def __post_init__(self):
        object.__setattr__(self, "per_party", tuple(self.per_party))

    def __len__(self):
        return len(self.per_party)

    def check_arity(self, n_parties: int):
        if len(self.per_party) != n_parties:
            raise ArityError(f"Setting has {len(self.per_party)} observables but state has {n_parties} parties")


@dataclass(frozen=True, eq=False)
class JointOutcomeDistribution:
    """Dense probability table over ±1 outcome tuples (index order of outcome_tuples)"""
    n_parties: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if self.n_parties < 1 or p.size != 2 ** self.n_parties:
            raise ArityError(f"{self.n_parties} parties need {2 ** self.n_parties} probabilities, got {p.size}")
        if np.any(p < -CLAMP_TOL):
            raise ProbabilityError(f"Negative probability {p.min():.3e} in outcome table")
        p = np.where(p < 0, 0.0, p)
        if np.any(p > 1 + CLAMP_TOL):
            raise ProbabilityError("Probability above 1 in outcome table")
        total = p.sum()
        if abs(total - 1.0) > EIGEN_TOL:
            raise ProbabilityError(f"Outcome probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "probs", _frozen(p))

    @classmethod
    def from_mapping(cls, n_parties: int, mapping: Dict[Tuple[int, ...], float]) -> "JointOutcomeDistribution":
        """Build from {outcome tuple: probability}; missing outcomes are 0"""
        probs = np.zeros(2 ** n_parties)
        for outcome, prob in mapping.items():
            probs[outcome_index(outcome)] += prob
        return cls(n_parties, probs)

    @cached_property
    def outcomes(self) -> np.ndarray:
        """(2^n, n) array of ±1 outcomes matching probs"""
        return _frozen(np.array(outcome_tuples(self.n_parties), dtype=int).reshape(-1, self.n_parties))

    def __getitem__(self, outcome: Tuple[int, ...]) -> float:
        return float(self.probs[outcome_index(outcome)])

    def as_dict(self) -> Dict[Tuple[int, ...], float]:
        return {o: float(p) for o, p in zip(outcome_tuples(self.n_parties), self.probs)}


def outcome_index(outcome: Sequence[int]) -> int:
    """Index of a ±1 outcome tuple (party 1 is the most significant bit, -1 -> 1)"""
    index = 0
    for value in outcome:
        if value not in (1, -1):
            raise RangeError(f"Outcome values must be ±1, got {value}")
        index = (index << 1) | (1 if value == -1 else 0)
    return index


# ============================================================================
# STATES
# ============================================================================

def _projector(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def ghz_state(n_parties: int = 3) -> DensityMatrix:
    """|GHZ><GHZ| with |GHZ> = (|000> + |111>)/sqrt(2)"""
    if n_parties != 3:
        raise ArityError(f"GHZ state is only supported for 3 parties, got {n_parties}")
    ket = np.zeros(8, dtype=complex)
    ket[0] = ket[7] = 1 / math.sqrt(2)
    return DensityMatrix(3, _projector(ket))


def singlet_state() -> DensityMatrix:
    """Projector onto (|01> - |10>)/sqrt(2)"""
    ket = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
    return DensityMatrix(2, _projector(ket))


def maximally_mixed(n_qubits: int = 3) -> DensityMatrix:
    dim = 2 ** n_qubits
    return DensityMatrix(n_qubits, np.eye(dim, dtype=complex) / dim)


def noisy_state(pure: DensityMatrix, p: float) -> DensityMatrix:
    """White-noise admixture (1-p)·pure + p·I/2^n"""
    if not 0.0 <= p <= 1.0:
        raise RangeError(f"Noise fraction must lie in [0, 1], got {p}")
    mixed = np.eye(pure.dim, dtype=complex) / pure.dim
    return DensityMatrix(pure.n_qubits, (1.0 - p) * pure.matrix + p * mixed)


def purity(state: DensityMatrix) -> float:
    """Tr rho^2"""
    return float(np.real(np.trace(state.matrix @ state.matrix)))


# ============================================================================
# OBSERVABLES
# ============================================================================

def xy_observable(theta: float) -> BlochObservable:
    """cos(theta) X + sin(theta) Y"""
    theta = math.fmod(theta, 2 * math.pi)
    return BlochObservable((math.cos(theta), math.sin(theta), 0.0))


def bloch_observable(vector: Iterable[float]) -> BlochObservable:
    return BlochObservable(tuple(vector))


def sphere_observable(polar: float, azimuth: float) -> BlochObservable:
    """Observable for the Bloch vector at the given spherical angles"""
    s = math.sin(polar)
    x, y, z = s * math.cos(azimuth), s * math.sin(azimuth), math.cos(polar)
    norm = math.sqrt(x * x + y * y + z * z)
    return BlochObservable((x / norm, y / norm, z / norm))


OBS_X = BlochObservable((1.0, 0.0, 0.0))
OBS_Y = BlochObservable((0.0, 1.0, 0.0))
OBS_Z = BlochObservable((0.0, 0.0, 1.0))


def product_observable(setting: MeasurementSetting, n_parties: Optional[int] = None) -> ComplexMatrix:
    """Kronecker product of the local observable matrices"""
    if n_parties is not None:
        setting.check_arity(n_parties)
    if len(setting) == 0:
        raise ArityError("Setting has no observables")
    return reduce(np.kron, (obs.matrix for obs in setting.per_party))


# ============================================================================
# STATISTICS
# ============================================================================

def joint_outcome_distribution(state: DensityMatrix, setting: MeasurementSetting) -> JointOutcomeDistribution:
    """p(a, b, ...) = Tr[rho (P_a ⊗ P_b ⊗ ...)] for every outcome tuple"""
    setting.check_arity(state.n_qubits)
    basis = reduce(np.kron, (obs.eigenbasis for obs in setting.per_party))
    # diagonal of U† rho U in the product eigenbasis
    probs = np.real(np.einsum("ji,jk,ki->i", basis.conj(), state.matrix, basis))
    return JointOutcomeDistribution(state.n_qubits, probs)


def product_expectation(state: DensityMatrix, setting: MeasurementSetting) -> float:
    """<A ⊗ B ⊗ ...> = Tr[rho · product observable]"""
    setting.check_arity(state.n_qubits)
    return float(np.real(np.trace(state.matrix @ product_observable(setting))))


def signed_sum(dist: JointOutcomeDistribution) -> float:
    """Sum of p(outcome) times the product of the outcome values"""
    signs = np.prod(dist.outcomes, axis=1)
    return float(np.dot(signs, dist.probs))
