#!/usr/bin/env python3
"""
Entropic GHZ - command-line front end

Commands:
    paradox     entropies of the composite observables A, B, C, D and the verdict
    threshold   noise fraction p* where the violation vanishes (or a CSV sweep)
    compress    sample measurement rounds, write bit files, run the compression test
    verify      property suites (metrics, derivation, LHV fuzz, codecs, sign check)

Exit codes: 0 success, 1 usage error, 2 invariant failure, 3 I/O error.

Run with: python3 entropic_ghz.py paradox --state ghz
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import pathlib
import sys
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

try:
    import psutil
except ImportError:
    psutil = None

import numpy as np

from bitstream import (
    CODEC_IDS, CONTEXTS, compress, compression_inequality_report, sample_rounds, write_bitstring,
    write_blob,
)
from ghz_diagnostics import SUITES, host_summary, run_suites
from ghz_errors import ArityError, GHZError, NoThresholdError, RangeError
from inequalities import (
    PARADOX_THETA_1, PARADOX_THETA_2, InequalityReport, ParadoxTable, entropic_mermin_report, xy_settings,
)
from noise import (
    BIPARTITE_BC, FAMILY_ALIASES, TRIPARTITE_ENTROPIC, TRIPARTITE_MERMIN, Scenario, find_threshold,
    optimized_threshold, preset_scenario, sweep,
)
from qstate import DensityMatrix, ghz_state, maximally_mixed, noisy_state, singlet_state

log = logging.getLogger("CLI")

# ============================================================================
# CONFIGURATION
# ============================================================================

CONFIG_DIR = os.getenv("ENTROPIC_GHZ_CONFIG_DIR", ".")
CONFIG_FILE = os.path.join(CONFIG_DIR, "ghz_config.json")
OUTPUT_DIR_ENV = "ENTROPIC_GHZ_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "ghz_output"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVARIANT = 2
EXIT_IO = 3

STATES = ("ghz", "singlet", "mixed")
FORMATS = ("text", "json", "csv")
MIN_COMPRESS_ROUNDS = 16

# reference thresholds and the band a result is compared against
REFERENCE_THRESHOLDS = {
    TRIPARTITE_ENTROPIC: (0.123, 0.121, 0.125),
    TRIPARTITE_MERMIN: (0.5, 0.499, 0.501),
    BIPARTITE_BC: (0.04, 0.03, 0.05),
}


def default_jobs() -> int:
    """Physical core count when psutil is available, else 1"""
    if psutil is None:
        return 1
    try:
        return max(1, psutil.cpu_count(logical=False) or 1)
    except Exception:
        return 1


@dataclass
class RunConfig:
    """One command invocation: config file values overridden by flags"""
    command: str = "paradox"
    state: str = "ghz"
    noise: float = 0.0
    angles: Optional[Tuple[float, ...]] = None
    family: str = "entropic3"
    n_rounds: int = 65536
    seed: int = 7
    codec: str = "rle-elias"
    block_bits: int = 8
    tol: float = 1e-4
    restarts: int = 4
    jobs: int = 1
    samples: int = 1000
    sweep: Optional[int] = None
    suites: List[str] = field(default_factory=list)
    output_format: str = "text"
    output_dir: str = DEFAULT_OUTPUT_DIR

    def validate(self):
        if self.state not in STATES:
            raise RangeError(f"Unknown state preset: {self.state} (expected one of {', '.join(STATES)})")
        if not 0.0 <= self.noise <= 1.0:
            raise RangeError(f"--noise must lie in [0, 1], got {self.noise}")
        if self.angles is not None and len(self.angles) not in (4, 6):
            raise ArityError(f"--angles needs 4 or 6 values, got {len(self.angles)}")
        if self.output_format not in FORMATS:
            raise RangeError(f"Unknown output format: {self.output_format}")
        if self.seed < 0:
            raise RangeError(f"--seed must be non-negative, got {self.seed}")
        if self.jobs < 1:
            raise RangeError(f"--jobs must be >= 1, got {self.jobs}")
        if not 1 <= self.block_bits <= 16:
            raise RangeError(f"--block-bits must lie in [1, 16], got {self.block_bits}")
        if self.codec not in CODEC_IDS:
            raise RangeError(f"Unknown codec: {self.codec} (expected one of {', '.join(CODEC_IDS)})")
        if not 0.0 < self.tol < 1.0:
            raise RangeError(f"--tol must lie in (0, 1), got {self.tol}")
        if self.restarts < 1:
            raise RangeError(f"--restarts must be >= 1, got {self.restarts}")
        if self.samples < 1:
            raise RangeError(f"--samples must be >= 1, got {self.samples}")

        if self.command in ("paradox", "compress"):
            if self.state == "singlet":
                raise ArityError(f"{self.command} needs a 3-qubit state; singlet has 2 qubits")
            if self.angles is not None and len(self.angles) != 6:
                raise ArityError(f"{self.command} needs 6 angles (a1,a2,b1,b2,c1,c2)")
        if self.command == "compress" and self.n_rounds < MIN_COMPRESS_ROUNDS:
            raise RangeError(f"-n must be >= {MIN_COMPRESS_ROUNDS}, got {self.n_rounds}")
        if self.command == "threshold":
            family = FAMILY_ALIASES.get(self.family, self.family)
            if family not in REFERENCE_THRESHOLDS:
                raise RangeError(f"Unknown family: {self.family} (expected one of {', '.join(FAMILY_ALIASES)})")
            if family == BIPARTITE_BC and self.state != "singlet":
                raise ArityError(f"{self.family} needs the 2-qubit singlet state, got {self.state}")
            if family != BIPARTITE_BC and self.state == "singlet":
                raise ArityError(f"{self.family} needs a 3-qubit state; singlet has 2 qubits")
            if self.noise:
                raise RangeError("threshold searches over the noise fraction; --noise is not accepted")
            wanted = 4 if family == BIPARTITE_BC else 6
            if self.angles is not None and len(self.angles) != wanted:
                raise ArityError(f"{self.family} needs {wanted} angles, got {len(self.angles)}")
            if self.sweep is not None and self.sweep < 2:
                raise RangeError(f"--sweep needs at least 2 points, got {self.sweep}")
        if self.command == "verify":
            unknown = [s for s in self.suites if s not in SUITES]
            if unknown:
                raise RangeError(f"Unknown suite(s): {', '.join(unknown)} (available: {', '.join(SUITES)})")


def load_config(path: Optional[str] = None) -> Dict:
    """Read the JSON config file; a missing file gives an empty dict"""
    path = path or CONFIG_FILE
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except FileNotFoundError:
        log.debug(f"no config file at {path}, using built-in defaults")
        return {}
    if not isinstance(data, dict):
        raise RangeError(f"{path}: config must be a JSON object")
    log.debug(f"loaded config from {path}")
    return data


PRESET_ANGLE_NAMES = ("paradox", "paper")


def xy_paradox_angles() -> Tuple[float, ...]:
    t1, t2 = PARADOX_THETA_1, PARADOX_THETA_2
    return (t1, t2, t1, t2, t1, t2)


def parse_angles(text: Optional[str]) -> Optional[Tuple[float, ...]]:
    """Preset name or 'xy:a1,a2,b1,b2,c1,c2' (radians); 4 values for bipartite families"""
    if text is None:
        return None
    if text in PRESET_ANGLE_NAMES:
        return xy_paradox_angles()
    if not text.startswith("xy:"):
        raise RangeError(f"--angles must be 'paradox' or 'xy:<comma separated radians>', got {text!r}")
    try:
        values = tuple(float(v) for v in text[3:].split(","))
    except ValueError:
        raise RangeError(f"--angles has a non-numeric value: {text!r}")
    if not all(math.isfinite(v) for v in values):
        raise RangeError(f"--angles values must be finite: {text!r}")
    return values


def build_config(args: argparse.Namespace, file_config: Dict) -> RunConfig:
    env_output = os.getenv(OUTPUT_DIR_ENV)
    config = RunConfig(
        command=args.command,
        seed=file_config.get("seed", 7),
        n_rounds=file_config.get("n_rounds", 65536),
        codec=file_config.get("codec", "rle-elias"),
        block_bits=file_config.get("block_bits", 8),
        tol=file_config.get("tol", 1e-4),
        restarts=file_config.get("restarts", 4),
        jobs=file_config.get("jobs", default_jobs()),
        samples=file_config.get("samples", 1000),
        output_format=file_config.get("output_format", "text"),
        output_dir=env_output or file_config.get("output_dir", DEFAULT_OUTPUT_DIR),
    )
    overrides = {
        "state": getattr(args, "state", None),
        "noise": getattr(args, "noise", None),
        "angles": parse_angles(getattr(args, "angles", None)),
        "family": getattr(args, "family", None),
        "n_rounds": getattr(args, "n_rounds", None),
        "seed": args.seed,
        "codec": getattr(args, "codec", None),
        "block_bits": getattr(args, "block_bits", None),
        "tol": getattr(args, "tol", None),
        "restarts": getattr(args, "restarts", None),
        "jobs": args.jobs,
        "samples": getattr(args, "samples", None),
        "sweep": getattr(args, "sweep", None),
        "suites": getattr(args, "suites", None),
        "output_format": args.format,
        "output_dir": getattr(args, "output_dir", None),
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    if args.command == "threshold" and getattr(args, "state", None) is None:
        config.state = "singlet" if FAMILY_ALIASES.get(config.family) == BIPARTITE_BC else "ghz"
    config.validate()
    return config


# ============================================================================
# HELPERS
# ============================================================================

def base_state(name: str) -> DensityMatrix:
    if name == "ghz":
        return ghz_state()
    if name == "singlet":
        return singlet_state()
    return maximally_mixed(3)


def resolve_state(config: RunConfig) -> DensityMatrix:
    base = base_state(config.state)
    return noisy_state(base, config.noise) if config.noise else base


def tripartite_settings(config: RunConfig):
    angles = config.angles or xy_paradox_angles()
    return xy_settings(angles)


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def to_json(data) -> str:
    return json.dumps(data, indent=2, default=_json_default)


def report_csv(report: InequalityReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "value"])
    writer.writerow([report.context_labels[0], repr(report.lhs)])
    for label, term in zip(report.context_labels[1:], report.rhs_terms):
        writer.writerow([label, repr(term)])
    writer.writerow(["rhs_total", repr(report.rhs_total)])
    writer.writerow(["margin", repr(report.margin)])
    writer.writerow(["violated", str(report.violated).lower()])
    return buf.getvalue()


def verdict(violated: bool) -> str:
    return "VIOLATED" if violated else "not violated"


def response(success: bool, message: str, output: str = "", exit_code: Optional[int] = None) -> Dict:
    return {
        "success": success,
        "message": message,
        "output": output,
        "exit_code": exit_code if exit_code is not None else (EXIT_OK if success else EXIT_INVARIANT),
    }


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_paradox(config: RunConfig) -> Dict:
    state = resolve_state(config)
    report = entropic_mermin_report(state, *tripartite_settings(config))
    h_a, h_b, h_c = report.rhs_terms
    table = ParadoxTable(h_a=h_a, h_b=h_b, h_c=h_c, h_d=report.lhs)

    if config.output_format == "json":
        data = report.to_dict()
        data.update({"state": config.state, "noise": config.noise,
                     "entropies": {"A": h_a, "B": h_b, "C": h_c, "D": report.lhs}})
        output = to_json(data)
    elif config.output_format == "csv":
        output = report_csv(report)
    else:
        lines = [
            f"Entropic GHZ paradox (state {config.state}, p = {config.noise:.4f})",
            f"  H(A) = {table.h_a:.4f}",
            f"  H(B) = {table.h_b:.4f}",
            f"  H(C) = {table.h_c:.4f}",
            f"  H(D) = {table.h_d:.4f}",
            f"  H(A) + H(B) + H(C) = {report.rhs_total:.4f}  vs  H(D) = {report.lhs:.4f}",
            f"  margin = {report.margin:.4f}  {verdict(table.violated)}",
        ]
        output = "\n".join(lines)
    return response(True, verdict(report.violated), output)


def _threshold_scenario(config: RunConfig) -> Optional[Scenario]:
    """Fixed scenario for presets and explicit angles; None means optimize (bc2 default)"""
    family = FAMILY_ALIASES.get(config.family, config.family)
    base = base_state(config.state)
    if config.angles is not None:
        return Scenario(family, base, xy_settings(config.angles))
    if family == BIPARTITE_BC:
        return None
    return preset_scenario(family, base)


def _sweep_output(config: RunConfig, scenario: Scenario) -> str:
    ps = [k / (config.sweep - 1) for k in range(config.sweep)]
    rows = sweep(scenario, ps, jobs=config.jobs)
    if config.output_format == "json":
        return to_json([asdict(row) for row in rows])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p", "lhs", "rhs_total", "margin"])
    for row in rows:
        writer.writerow([repr(row.p), repr(row.lhs), repr(row.rhs_total), repr(row.margin)])
    return buf.getvalue()


def cmd_threshold(config: RunConfig) -> Dict:
    family = FAMILY_ALIASES.get(config.family, config.family)
    scenario = _threshold_scenario(config)
    optimized = None
    state = base_state(config.state)

    if scenario is None:
        if config.sweep is not None:
            # sweep the settings that maximize the threshold
            _, optimized = optimized_threshold(family, state, config.tol, config.restarts,
                                               seed=config.seed, jobs=config.jobs)
            return response(True, "sweep", _sweep_output(config, optimized.scenario))
        try:
            result, optimized = optimized_threshold(family, state, config.tol, config.restarts,
                                                    seed=config.seed, jobs=config.jobs)
        except NoThresholdError as e:
            return response(True, "no threshold", f"no threshold: {e}")
    else:
        if config.sweep is not None:
            return response(True, "sweep", _sweep_output(config, scenario))
        try:
            result = find_threshold(scenario, config.tol, jobs=config.jobs)
        except NoThresholdError as e:
            return response(True, "no threshold", f"no threshold: {e}")

    reference, low, high = REFERENCE_THRESHOLDS[family]
    in_band = low <= result.p_star <= high
    preset = config.angles is None
    data = {
        "family": family,
        "p_star": result.p_star,
        "iterations": result.iterations,
        "bracket_width": result.bracket_width,
        "margin_at_p_star": result.margin_at_p_star,
        "tol": result.tol,
    }
    if preset:
        data.update({"reference_p": reference, "reference_band": [low, high], "within_band": in_band})
    if optimized is not None:
        data.update({"settings_mode": optimized.mode, "settings_params": list(optimized.params),
                     "assumption": "singlet state with numerically optimized settings"})

    if config.output_format == "json":
        output = to_json(data)
    elif config.output_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["family", "p_star", "iterations", "bracket_width", "margin_at_p_star"])
        writer.writerow([family, repr(result.p_star), result.iterations, repr(result.bracket_width),
                         repr(result.margin_at_p_star)])
        output = buf.getvalue()
    else:
        lines = [
            f"Noise threshold for {family}",
            f"  p* = {result.p_star:.4f}  ({result.iterations} bisection steps, bracket {result.bracket_width:.2e})",
        ]
        if preset:
            relation = "within" if in_band else "OUTSIDE"
            lines.append(f"  reference value p ≈ {reference:g}: {relation} [{low:g}, {high:g}]")
        if optimized is not None:
            angles = ", ".join(f"{v:.4f}" for v in optimized.params)
            lines.append(f"  optimized {optimized.mode} settings: {angles}")
        output = "\n".join(lines)
    return response(True, f"p* = {result.p_star:.6f}", output)


def cmd_compress(config: RunConfig) -> Dict:
    state = resolve_state(config)
    settings = tripartite_settings(config)
    out_dir = pathlib.Path(config.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        return response(False, f"cannot create output directory {out_dir}: {e}", exit_code=EXIT_IO)

    samples = sample_rounds(state, settings, config.n_rounds, config.seed, jobs=config.jobs)
    report = compression_inequality_report(samples, config.codec, config.block_bits)
    if not report.details["lossless_verified"]:
        return response(False, f"{config.codec} round trip failed on the sampled strings")

    files = []
    try:
        for name, bits in samples.party_strings().items():
            path = out_dir / f"{name}.bits"
            write_bitstring(path, bits)
            files.append(path.name)
        for label, _ in CONTEXTS:
            xor = samples.xor(label)
            path = out_dir / f"xor_{label}.bits"
            write_bitstring(path, xor)
            files.append(path.name)
            _, blob = compress(xor, config.codec, config.block_bits)
            path = out_dir / f"xor_{label}.{config.codec}.blob"
            write_blob(path, config.codec, blob)
            files.append(path.name)
        data = report.to_dict()
        data.update({"state": config.state, "noise": config.noise, "n_rounds": config.n_rounds,
                     "seed": config.seed, "codec": config.codec, "files": files})
        (out_dir / "report.json").write_text(to_json(data) + "\n")
    except OSError as e:
        return response(False, f"cannot write to {out_dir}: {e}", exit_code=EXIT_IO)

    if config.output_format == "json":
        output = to_json(data)
    elif config.output_format == "csv":
        output = report_csv(report)
    else:
        side = "met" if report.details["side_condition_met"] else "NOT met"
        lines = [f"Compression test (state {config.state}, p = {config.noise:.4f}, n = {config.n_rounds}, "
                 f"seed {config.seed}, codec {config.codec})"]
        for (label, _), bits in zip(CONTEXTS, (report.lhs,) + report.rhs_terms):
            a, b, c = label
            lines.append(f"  C(a{a}^b{b}^c{c}) = {bits:.0f} bits")
        lines += [
            f"  rhs total = {report.rhs_total:.0f} bits, side condition "
            f"(<= {report.details['side_condition_bound']:.1f} bits each): {side}",
            f"  margin = {report.margin:.0f} bits  {verdict(report.violated)}",
            f"  {len(files)} files written to {out_dir}",
        ]
        output = "\n".join(lines)
    return response(True, verdict(report.violated), output)


def cmd_verify(config: RunConfig) -> Dict:
    results = run_suites(config.suites or None, samples=config.samples, seed=config.seed)
    passed = all(r.passed for r in results)

    if config.output_format == "json":
        output = to_json({"passed": passed, "suites": [r.to_dict() for r in results]})
    elif config.output_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["suite", "passed", "checked", "detail"])
        for r in results:
            writer.writerow([r.name, str(r.passed).lower(), r.checked, r.detail])
        output = buf.getvalue()
    else:
        lines = ["=" * 60, "Entropic GHZ property suites", f"  host: {host_summary()}", "=" * 60]
        for k, r in enumerate(results, 1):
            mark = "✓ PASS" if r.passed else "✗ FAIL"
            lines.append(f"[{k}/{len(results)}] {r.name:<14} {mark}  {r.detail} ({r.seconds:.2f}s)")
        lines.append("All suites passed" if passed else "One or more suites FAILED")
        output = "\n".join(lines)
    failed = [r.name for r in results if not r.passed]
    return response(passed, "all suites passed" if passed else f"failed: {', '.join(failed)}", output)


COMMANDS = {
    "paradox": cmd_paradox,
    "threshold": cmd_threshold,
    "compress": cmd_compress,
    "verify": cmd_verify,
}


def handle_command(config: RunConfig) -> Dict:
    """Run one command; returns {"success", "message", "output", "exit_code"}"""
    log.debug(f"command: {config.command}")
    try:
        return COMMANDS[config.command](config)
    except OSError as e:
        return response(False, f"I/O error: {e}", exit_code=EXIT_IO)
    except GHZError as e:
        log.error(f"{type(e).__name__}: {e}")
        return response(False, f"{type(e).__name__}: {e}", exit_code=EXIT_INVARIANT)


# ============================================================================
# ARGUMENTS
# ============================================================================

class GHZArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=None, help="output format (default: text)")
    common.add_argument("--seed", type=int, default=None, help="seed for sampling and restarts")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: physical cores)")
    common.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    common.add_argument("--config", default=None, help=f"config file (default: {CONFIG_FILE})")

    state_flags = argparse.ArgumentParser(add_help=False)
    state_flags.add_argument("--state", choices=STATES, default=None)
    state_flags.add_argument("--noise", type=float, default=None, help="white-noise fraction p in [0, 1]")
    state_flags.add_argument("--angles", default=None, help="'paradox' or 'xy:a1,a2,b1,b2,c1,c2' in radians")

    parser = GHZArgumentParser(prog="entropic_ghz.py",
                               description="Entropic GHZ paradox, noise thresholds and compression test")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("paradox", parents=[common, state_flags], help="entropies of A, B, C, D")

    p = sub.add_parser("threshold", parents=[common, state_flags], help="noise threshold p*")
    p.add_argument("--family", choices=sorted(FAMILY_ALIASES), default=None)
    p.add_argument("--tol", type=float, default=None, help="bisection tolerance")
    p.add_argument("--restarts", type=int, default=None, help="optimizer restarts (bc2)")
    p.add_argument("--sweep", type=int, default=None, metavar="N", help="emit N evenly spaced p rows")

    p = sub.add_parser("compress", parents=[common, state_flags], help="compression test")
    p.add_argument("-n", "--n-rounds", dest="n_rounds", type=int, default=None)
    p.add_argument("--codec", choices=sorted(CODEC_IDS), default=None)
    p.add_argument("--block-bits", dest="block_bits", type=int, default=None)
    p.add_argument("--output-dir", dest="output_dir", default=None,
                   help=f"default: ${OUTPUT_DIR_ENV} or ./{DEFAULT_OUTPUT_DIR}")

    p = sub.add_parser("verify", parents=[common], help="property suites")
    p.add_argument("--suites", type=lambda s: [x for x in s.split(",") if x], default=None,
                   help=f"comma separated subset of: {', '.join(SUITES)}")
    p.add_argument("--samples", type=int, default=None, help="random inputs per suite")
    return parser


def setup_logging(verbose: bool):
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="[%(name)s] %(message)s", stream=sys.stderr, force=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    try:
        config = build_config(args, load_config(args.config))
    except (GHZError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return EXIT_IO

    result = handle_command(config)
    output = result["output"]
    if output:
        print(output, end="" if output.endswith("\n") else "\n")
    if not result["success"]:
        print(f"error: {result['message']}", file=sys.stderr)
    return result["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
