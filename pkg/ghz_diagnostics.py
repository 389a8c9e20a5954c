#!/usr/bin/env python3
"""
Diagnostic suites - property checks run by `entropic_ghz.py verify`

Each suite draws its own random inputs from numpy's PCG64 seeded with
(seed, suite number) and returns a SuiteResult; nothing here prints.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

try:
    import psutil
except ImportError:
    psutil = None

from bitstream import CODEC_BLOCK_HUFFMAN, CODEC_IDS, BitString, compress, decompress
from inequalities import (
    mermin_correlation_report, mermin_settings, paradox_settings, sign_ghz_check, tripartite_contexts,
)
from infometrics import bc_distance, multi_delta, product_distance, product_variables_joint
from lhv import (
    all_strategies, classical_entropic_mermin, derivation_chain_report, lhv_feasibility,
    random_joint, strategy_product_check,
)
from qstate import (
    DensityMatrix, JointOutcomeDistribution, ghz_state, joint_outcome_distribution, noisy_state,
    sphere_observable,
)

log = logging.getLogger("VERIFY")

METRIC_TOL = 1e-12
MARGIN_TOL = 1e-10


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checked: int
    detail: str
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "checked": self.checked,
                "detail": self.detail, "seconds": round(self.seconds, 3)}


def _rng(seed: int, suite: int) -> np.random.Generator:
    return np.random.default_rng([seed, suite])


def _random_joint(rng: np.random.Generator, n_parties: int) -> JointOutcomeDistribution:
    return JointOutcomeDistribution(n_parties, rng.dirichlet(np.ones(2 ** n_parties)))


def random_density_matrix(rng: np.random.Generator, n_qubits: int) -> DensityMatrix:
    """G G† / Tr(G G†) for a complex Gaussian G"""
    dim = 2 ** n_qubits
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(n_qubits, rho / np.trace(rho).real)


# ============================================================================
# SUITES
# ============================================================================

def suite_metric(samples: int, seed: int) -> SuiteResult:
    """d(A,A) = 0, symmetry and the triangle inequality for both distances"""
    rng = _rng(seed, 1)
    failures = []
    for k in range(samples):
        joint = _random_joint(rng, 3)
        for name, dist in (("product", lambda j, pair: product_distance(j, pair).bits),
                           ("conditional", bc_distance)):
            if abs(dist(joint, (0, 0))) > METRIC_TOL:
                failures.append(f"{name} d(A,A) != 0 on joint {k}")
            if abs(dist(joint, (0, 1)) - dist(joint, (1, 0))) > METRIC_TOL:
                failures.append(f"{name} asymmetric on joint {k}")
            if dist(joint, (0, 2)) > dist(joint, (0, 1)) + dist(joint, (1, 2)) + METRIC_TOL:
                failures.append(f"{name} triangle fails on joint {k}")
    return SuiteResult("metric", not failures, samples, failures[0] if failures else "distance axioms hold")


def suite_associativity(samples: int, seed: int) -> SuiteResult:
    """delta(A1,A2,A3) = d(A1, A2·A3) = d(A2, A1·A3) = d(A3, A1·A2)"""
    rng = _rng(seed, 2)
    worst = 0.0
    for _ in range(samples):
        joint = _random_joint(rng, 3)
        delta = multi_delta(joint).bits
        for single, pair in ((0, (1, 2)), (1, (0, 2)), (2, (0, 1))):
            grouped = product_variables_joint(joint, [(single,), pair])
            worst = max(worst, abs(delta - product_distance(grouped).bits))
    return SuiteResult("associativity", worst <= METRIC_TOL, samples, f"max deviation {worst:.2e}")


def suite_derivation(samples: int, seed: int) -> SuiteResult:
    """Both intermediate steps of the tripartite derivation on random classical joints"""
    worst = math.inf
    for k in range(samples):
        for report in derivation_chain_report(random_joint(seed * 1_000_003 + k)):
            worst = min(worst, report.margin)
    return SuiteResult("derivation", worst >= -MARGIN_TOL, samples, f"min margin {worst:.3e}")


def suite_lhv(samples: int, seed: int) -> SuiteResult:
    """Entropic inequality on random joints, strategy products, feasibility of quantum contexts"""
    worst = math.inf
    for k in range(samples):
        worst = min(worst, classical_entropic_mermin(random_joint(seed * 1_000_003 + k)).margin)
    if worst < -MARGIN_TOL:
        return SuiteResult("lhv", False, samples, f"classical joint violates: margin {worst:.3e}")

    bad = [s.assignment for s in all_strategies() if strategy_product_check(s).product != 1]
    if bad:
        return SuiteResult("lhv", False, samples, f"strategy product != 1 for {bad[0]}")

    contexts = [joint_outcome_distribution(ghz_state(), ctx) for ctx in tripartite_contexts(*paradox_settings())]
    if lhv_feasibility(contexts).feasible:
        return SuiteResult("lhv", False, samples, "GHZ contexts reported feasible")
    noisy = noisy_state(ghz_state(), 0.9)
    contexts = [joint_outcome_distribution(noisy, ctx) for ctx in tripartite_contexts(*paradox_settings())]
    if not lhv_feasibility(contexts).feasible:
        return SuiteResult("lhv", False, samples, "noisy GHZ at p=0.9 reported infeasible")
    return SuiteResult("lhv", True, samples, f"min margin {worst:.3e}; GHZ infeasible, p=0.9 feasible")


def suite_mermin(samples: int, seed: int) -> SuiteResult:
    """Covariance-form margin equals 2 - M on random states and settings; M = 4 on GHZ"""
    rng = _rng(seed, 5)
    worst = 0.0
    for _ in range(samples):
        state = random_density_matrix(rng, 3)
        settings = [sphere_observable(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)) for _ in range(6)]
        report = mermin_correlation_report(state, *settings)
        m_value = report.details["mermin_value"]
        worst = max(worst, abs(report.margin - (2 - m_value)))
        if report.violated != (m_value > 2 + MARGIN_TOL):
            return SuiteResult("mermin", False, samples, f"verdict disagrees with M={m_value:.6f}")
    ghz_m = mermin_correlation_report(ghz_state(), *mermin_settings()).details["mermin_value"]
    passed = worst <= METRIC_TOL and abs(ghz_m - 4) <= MARGIN_TOL
    return SuiteResult("mermin", passed, samples, f"max |margin - (2 - M)| {worst:.2e}; GHZ M = {ghz_m:.10f}")


def _fuzz_inputs(rng: np.random.Generator, samples: int) -> List[BitString]:
    inputs = [BitString.from_bits(np.zeros(n, dtype=np.uint8)) for n in (0, 1, 7, 8, 9)]
    inputs += [BitString.from_bits(np.ones(n, dtype=np.uint8)) for n in (1, 8, 17)]
    while len(inputs) < samples:
        n = int(rng.integers(0, 2048))
        bias = rng.choice([0.0, 0.01, 0.5, 0.99, 1.0])
        inputs.append(BitString.from_bits((rng.random(n) < bias).astype(np.uint8)))
    return inputs[:samples]


def suite_codecs(samples: int, seed: int) -> SuiteResult:
    """Both codecs lossless on fuzzed inputs; uniform bits stay incompressible under block Huffman"""
    rng = _rng(seed, 6)
    for x in _fuzz_inputs(rng, samples):
        for codec in CODEC_IDS:
            report, blob = compress(x, codec)
            if not report.lossless_verified or decompress(blob, codec) != x:
                return SuiteResult("codecs", False, samples, f"{codec} not lossless on a {x.length}-bit input")
    n = 65536
    uniform = BitString.from_bits(rng.integers(0, 2, n, dtype=np.uint8))
    report, _ = compress(uniform, CODEC_BLOCK_HUFFMAN)
    if report.output_bits < 0.99 * n:
        return SuiteResult("codecs", False, samples, f"uniform input shrank to {report.output_bits} bits")
    return SuiteResult("codecs", True, samples, f"lossless; uniform {n} bits -> {report.output_bits} bits")


def suite_sign_ghz(samples: int, seed: int) -> SuiteResult:
    check = sign_ghz_check(ghz_state())
    values = f"YYX={check.yyx:+.10f} YXY={check.yxy:+.10f} XYY={check.xyy:+.10f} XXX={check.xxx:+.10f}"
    return SuiteResult("sign-ghz", check.consistent, 1, values)


SUITES: Dict[str, Callable[[int, int], SuiteResult]] = {
    "metric": suite_metric,
    "associativity": suite_associativity,
    "derivation": suite_derivation,
    "lhv": suite_lhv,
    "mermin": suite_mermin,
    "codecs": suite_codecs,
    "sign-ghz": suite_sign_ghz,
}


def run_suite(name: str, samples: int, seed: int) -> SuiteResult:
    start = time.perf_counter()
    try:
        result = SUITES[name](samples, seed)
    except Exception as e:
        log.exception(f"suite {name} raised")
        result = SuiteResult(name, False, 0, f"raised {type(e).__name__}: {e}")
    result.seconds = time.perf_counter() - start
    log.debug(f"{name}: {'PASS' if result.passed else 'FAIL'} in {result.seconds:.2f}s")
    return result


def run_suites(names: Optional[Sequence[str]] = None, samples: int = 1000, seed: int = 0) -> List[SuiteResult]:
    names = list(names) if names else list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"Unknown suite(s): {', '.join(unknown)} (available: {', '.join(SUITES)})")
    return [run_suite(name, samples, seed) for name in names]


def host_summary() -> str:
    if psutil is None:
        return "psutil not installed - host details unavailable"
    try:
        memory = psutil.virtual_memory()
        return (f"{psutil.cpu_count(logical=False) or psutil.cpu_count()} cores, "
                f"{memory.available / 2 ** 30:.1f} GiB free")
    except Exception:
        return "host details unavailable"
