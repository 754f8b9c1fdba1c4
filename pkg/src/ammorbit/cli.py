"""Command-line front end.

Subcommands:

* check-axioms: run the conformance checks on a rule, write a JSON report;
* classify: sample orbits of a two-token rule and recover its weight;
* simulate-fees: fold random fee trades and export the invariant drift;
* orbit-export: sample one orbit and export its states and log points.

Exit codes: 0 all checks passed / output written, 1 a check failed (the
report is still written), 2 bad usage or configuration.  Identical
invocations produce byte-identical output; every JSON payload carries a
spec_version format field.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .axioms import TrialConfig, check_all, report_to_dict, shrink
from .classify import (
    OrbitConfig,
    classification_to_dict,
    orbit_to_csv,
    sample_orbit,
    verify_level_sets,
)
from .errors import AmmError, ConfigError, SamplingError, UsageError
from .fees import drift_to_csv, fee_drift, fee_swap
from .rand import log_uniform, trial_rng
from .rules import parse_rule
from .state import as_reserves

SPEC_VERSION = "1.0"

# Reserved stream index for drawing orbit starts, clear of the per-orbit
# sampling seeds (cfg.seed xor k for small k).
_START_STREAM = 2**32 - 1

_START_RANGE = (1e-2, 1e2)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ammorbit",
        description="Swap-rule conformance checks and orbit classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, default_format: str) -> None:
        p.add_argument("--rule", required=True,
                       help="rule spec: wgm:<w> | product | csum | wprod:<w1>,<w2>,...")
        p.add_argument("--seed", type=int, default=0, help="base RNG seed")
        p.add_argument("--format", choices=("json", "csv"), default=default_format)
        p.add_argument("--output", default=None, help="write here instead of stdout")

    p = sub.add_parser("check-axioms", help="run conformance checks on a rule")
    common(p, "json")
    p.add_argument("--trials", type=int, default=1000, help="trials per check")
    p.add_argument("--chain-length", type=int, default=32)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.set_defaults(handler=_cmd_check_axioms)

    p = sub.add_parser("classify", help="recover a two-token rule's weight from orbits")
    common(p, "json")
    p.add_argument("--orbits", type=int, default=5, help="number of sampled orbits")
    p.add_argument("--samples", type=int, default=64, help="swaps per orbit")
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser("simulate-fees", help="fold random fee trades and export the drift")
    common(p, "csv")
    p.add_argument("--phi", type=float, required=True, help="fee rate in [0, 1)")
    p.add_argument("--trades", type=int, default=100)
    p.add_argument("--start", default=None, help="comma-separated reserves, default all ones")
    p.set_defaults(handler=_cmd_simulate_fees)

    p = sub.add_parser("orbit-export", help="sample one orbit and export it")
    common(p, "csv")
    p.add_argument("--samples", type=int, default=64, help="swaps along the orbit")
    p.add_argument("--start", default=None, help="comma-separated reserves, default all ones")
    p.set_defaults(handler=_cmd_orbit_export)

    return parser


def _emit(text: str, output: str | None) -> None:
    if output:
        try:
            Path(output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot write {output!r}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _json_payload(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _parse_start(raw: str | None, dimension: int) -> np.ndarray:
    if raw is None:
        return as_reserves([1.0] * dimension)
    try:
        coords = [float(part) for part in raw.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad start {raw!r}; expected comma-separated numbers") from exc
    if len(coords) != dimension:
        raise UsageError(f"start has {len(coords)} coordinates, rule needs {dimension}")
    return as_reserves(coords)


def _require_json(args) -> None:
    if args.format != "json":
        raise UsageError(f"{args.command} only supports --format json")


# The exit code reflects the three axioms every conforming rule must
# satisfy.  Token symmetry is reported alongside them but marked not
# required: asymmetric-weight rules are conforming and still fail it.
_REQUIRED_AXIOMS = frozenset({"validity_invariance", "pareto_efficiency", "unit_invariance"})


def _cmd_check_axioms(args) -> int:
    _require_json(args)
    rule = parse_rule(args.rule)
    cfg = TrialConfig(seed=args.seed, trials=args.trials,
                      chain_length=args.chain_length, tolerance=args.tolerance)
    reports = check_all(rule, cfg)
    reports = [shrink(r, rule) if not r.passed else r for r in reports]
    passed = all(r.passed for r in reports if r.axiom in _REQUIRED_AXIOMS)
    entries = []
    for r in reports:
        entry = report_to_dict(r)
        entry["required"] = r.axiom in _REQUIRED_AXIOMS
        entries.append(entry)
    payload = {
        "spec_version": SPEC_VERSION,
        "command": "check-axioms",
        "rule": rule.name,
        "seed": int(args.seed),
        "trials": int(args.trials),
        "tolerance": float(args.tolerance),
        "passed": passed,
        "reports": entries,
    }
    _emit(_json_payload(payload), args.output)
    return 0 if passed else 1


def _cmd_classify(args) -> int:
    _require_json(args)
    rule = parse_rule(args.rule)
    if rule.dimension != 2:
        raise UsageError("classify works on two-token rules; use the library's "
                         "hyperplane fit for more tokens")
    if args.orbits < 2:
        raise UsageError(f"need at least 2 orbits, got {args.orbits}")
    rng = trial_rng(args.seed, _START_STREAM)
    starts = [log_uniform(rng, _START_RANGE[0], _START_RANGE[1], 2)
              for _ in range(args.orbits)]
    cfg = OrbitConfig(seed=args.seed, samples=args.samples, tolerance=args.tolerance)
    report = verify_level_sets(rule, starts, cfg)
    payload = {
        "spec_version": SPEC_VERSION,
        "command": "classify",
        "seed": int(args.seed),
        "orbits": int(args.orbits),
        "samples": int(args.samples),
        "tolerance": float(args.tolerance),
    }
    payload.update(classification_to_dict(report))
    _emit(_json_payload(payload), args.output)
    return 0 if report.verdict else 1


def _cmd_simulate_fees(args) -> int:
    rule = parse_rule(args.rule)
    if rule.weights is None:
        raise UsageError(f"rule {rule.name!r} declares no invariant to track")
    if args.trades < 0:
        raise UsageError(f"trades must be >= 0, got {args.trades}")
    start = _parse_start(args.start, rule.dimension)

    trades = []
    current = start
    for t in range(args.trades):
        rng = trial_rng(args.seed, t)
        i = int(rng.integers(0, rule.dimension))
        j = int(rng.integers(0, rule.dimension - 1))
        if j >= i:
            j += 1
        amount = float(log_uniform(rng, 1e-3, 1.0) * current[i])
        trades.append((i, j, amount))
        current = fee_swap(rule, current, i, j, amount, args.phi)

    series = fee_drift(rule, start, trades, args.phi)
    if args.format == "csv":
        _emit(drift_to_csv(series), args.output)
    else:
        payload = {
            "spec_version": SPEC_VERSION,
            "command": "simulate-fees",
            "rule": rule.name,
            "phi": float(args.phi),
            "seed": int(args.seed),
            "trades": [[int(i), int(j), float(a)] for i, j, a in trades],
            "states": [[float(v) for v in state] for state in series.states],
            "invariant_values": [float(v) for v in series.invariant_values],
        }
        _emit(_json_payload(payload), args.output)
    return 0


def _cmd_orbit_export(args) -> int:
    rule = parse_rule(args.rule)
    start = _parse_start(args.start, rule.dimension)
    partial = False
    try:
        sample = sample_orbit(rule, start, args.samples, seed=args.seed)
    except SamplingError as exc:
        print(f"warning: {exc}; exporting the partial orbit", file=sys.stderr)
        sample = exc.partial
        partial = True
    if args.format == "csv":
        _emit(orbit_to_csv(sample), args.output)
    else:
        payload = {
            "spec_version": SPEC_VERSION,
            "command": "orbit-export",
            "rule": rule.name,
            "seed": int(args.seed),
            "start": [float(v) for v in sample.start],
            "partial": partial,
            "states": [[float(v) for v in state] for state in sample.states],
            "log_points": [[float(v) for v in row] for row in sample.log_points],
        }
        _emit(_json_payload(payload), args.output)
    return 1 if partial else 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.handler(args)
    except AmmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
