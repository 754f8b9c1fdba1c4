"""Randomized conformance checks for swap rules.

Four properties are checked, each over seeded random trials:

* validity invariance: a swap from a valid state lands on a valid state;
* Pareto efficiency: no state reachable by swaps coordinate-wise
  dominates another state on the same chain;
* unit invariance: rescaling every token's units commutes with swapping;
* token symmetry (two-token rules): mirroring the state and trading the
  mirrored direction mirrors the outcome.

A failed check carries a witness with the concrete inputs, what was
observed, and what was expected; shrink() minimizes a witness while the
violation persists.  Identical (rule, config) inputs always produce the
identical report.  Rules are exercised as black boxes through forward
swaps from valid states only, so the converse half of validity
invariance (invalid states staying invalid) is out of scope; reports
say so in their scope field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import AmmError, ConfigError, UsageError
from .rand import PRNG_ID, log_uniform, trial_rng
from .rules import SwapRule, swap
from .state import rel_close

# Dominance margin: coordinates within this relative slack count as ties,
# and domination needs at least one coordinate above it.
PARETO_MARGIN = 1e-12

VALIDITY_SCOPE = (
    "forward swaps from valid states (including boundary-adjacent ones); "
    "behaviour on invalid start states is not observable through the swap interface"
)

AXIOMS = ("validity_invariance", "pareto_efficiency", "unit_invariance", "token_symmetry")


@dataclass(frozen=True)
class TrialConfig:
    """Knobs for one conformance run.

    amount_range is relative to the input-token reserve; state_range and
    amount_range are sampled log-uniformly.
    """

    seed: int = 0
    trials: int = 1000
    chain_length: int = 32
    amount_range: tuple[float, float] = (1e-3, 1.0)
    state_range: tuple[float, float] = (1e-6, 1e6)
    tolerance: float = 1e-9

    def __post_init__(self):
        if not (0 <= self.seed < 2**64):
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.chain_length < 1:
            raise ConfigError(f"chain_length must be >= 1, got {self.chain_length}")
        for name in ("amount_range", "state_range"):
            lo, hi = getattr(self, name)
            if not (0.0 < lo <= hi and math.isfinite(hi)):
                raise ConfigError(f"{name} must satisfy 0 < lo <= hi, got ({lo!r}, {hi!r})")
        if not (0.0 < self.tolerance < 1.0):
            raise ConfigError(f"tolerance must lie in (0, 1), got {self.tolerance!r}")


@dataclass(frozen=True)
class Witness:
    """Concrete inputs reproducing a violation, plus its provenance."""

    inputs: dict
    observed: object
    expected: object
    seed: int
    trial: int


@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    rule: str
    trials: int
    passed: bool
    witness: Witness | None
    tolerance: float
    shrunk: bool = False
    prng: str = PRNG_ID
    scope: str | None = None


def _sample_state(rng: np.random.Generator, cfg: TrialConfig, n: int, hug_boundary: bool) -> np.ndarray:
    lo, hi = cfg.state_range
    if hug_boundary:
        hi = min(hi, 4.0 * lo)
    return log_uniform(rng, lo, hi, n)


def _sample_pair(rng: np.random.Generator, n: int) -> tuple[int, int]:
    i = int(rng.integers(0, n))
    j = int(rng.integers(0, n - 1))
    if j >= i:
        j += 1
    return i, j


def _sample_amount(rng: np.random.Generator, cfg: TrialConfig, reserve: float) -> float:
    return float(log_uniform(rng, cfg.amount_range[0], cfg.amount_range[1]) * reserve)


def _state_ok(a: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(a)) and np.all(a > 0.0))


# Violation predicates.  Each takes JSON-ready witness inputs, re-runs
# the property from scratch, and reports (violated, observed, expected).
# The checks and shrink() share these so a witness always replays.

def _violates_validity(rule: SwapRule, inputs: dict, tol: float) -> tuple[bool, object, object]:
    expected = "every output coordinate finite and > 0"
    try:
        out = swap(rule, inputs["state"], inputs["token_in"], inputs["token_out"], inputs["amount"])
    except AmmError as exc:
        return True, f"error: {exc}", expected
    if not _state_ok(out):
        return True, out.tolist(), expected
    return False, out.tolist(), expected


def _dominating_pair(states: np.ndarray) -> tuple[int, int] | None:
    """First (dominating, dominated) index pair under the 1e-12 margin, or None."""
    diff = states[:, None, :] - states[None, :, :]
    ref = np.maximum(np.abs(states[:, None, :]), np.abs(states[None, :, :]))
    slack = PARETO_MARGIN * ref
    dominates = np.all(diff >= -slack, axis=2) & np.any(diff > slack, axis=2)
    np.fill_diagonal(dominates, False)
    if not dominates.any():
        return None
    flat = int(np.flatnonzero(dominates)[0])
    return flat // states.shape[0], flat % states.shape[0]


def _violates_pareto(rule: SwapRule, inputs: dict, tol: float) -> tuple[bool, object, object]:
    expected = "no coordinate-wise dominance between states on one chain"
    start = np.asarray(inputs["start"], dtype=float)
    states = [start]
    current = start
    for k, (i, j, amount) in enumerate(inputs["moves"]):
        try:
            nxt = swap(rule, current, int(i), int(j), float(amount))
        except AmmError as exc:
            return True, f"error at step {k + 1}: {exc}", expected
        if not _state_ok(nxt):
            return True, f"chain left the domain at step {k + 1}: {nxt.tolist()}", expected
        states.append(nxt)
        current = nxt
    cloud = np.stack(states)
    hit = _dominating_pair(cloud)
    if hit is None:
        return False, None, expected
    a, b = hit
    observed = {
        "dominating_index": int(a),
        "dominated_index": int(b),
        "dominating": cloud[a].tolist(),
        "dominated": cloud[b].tolist(),
    }
    return True, observed, expected


def _violates_unit_invariance(rule: SwapRule, inputs: dict, tol: float) -> tuple[bool, object, object]:
    s = np.asarray(inputs["state"], dtype=float)
    f = np.asarray(inputs["factors"], dtype=float)
    i = int(inputs["token_in"])
    j = int(inputs["token_out"])
    amount = float(inputs["amount"])
    try:
        rhs = swap(rule, s, i, j, amount) * f
        lhs = swap(rule, s * f, i, j, f[i] * amount)
    except AmmError as exc:
        return True, f"error: {exc}", "rescaling units commutes with swapping"
    return (not rel_close(lhs, rhs, tol)), lhs.tolist(), rhs.tolist()


def _violates_token_symmetry(rule: SwapRule, inputs: dict, tol: float) -> tuple[bool, object, object]:
    s = np.asarray(inputs["state"], dtype=float)
    amount = float(inputs["amount"])
    try:
        t = swap(rule, s, 0, 1, amount)
        mirrored = swap(rule, s[::-1], 1, 0, amount)
    except AmmError as exc:
        return True, f"error: {exc}", "mirrored trade lands on the mirrored state"
    expected = t[::-1]
    return (not rel_close(mirrored, expected, tol)), mirrored.tolist(), expected.tolist()


_PREDICATES: dict[str, Callable[[SwapRule, dict, float], tuple[bool, object, object]]] = {
    "validity_invariance": _violates_validity,
    "pareto_efficiency": _violates_pareto,
    "unit_invariance": _violates_unit_invariance,
    "token_symmetry": _violates_token_symmetry,
}


def _run_trials(rule: SwapRule, cfg: TrialConfig, axiom: str,
                draw: Callable[[np.random.Generator, int], dict],
                scope: str | None = None) -> AxiomReport:
    predicate = _PREDICATES[axiom]
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, trial)
        inputs = draw(rng, trial)
        violated, observed, expected = predicate(rule, inputs, cfg.tolerance)
        if violated:
            witness = Witness(inputs=inputs, observed=observed, expected=expected,
                              seed=cfg.seed, trial=trial)
            return AxiomReport(axiom=axiom, rule=rule.name, trials=trial + 1, passed=False,
                               witness=witness, tolerance=cfg.tolerance, scope=scope)
    return AxiomReport(axiom=axiom, rule=rule.name, trials=cfg.trials, passed=True,
                       witness=None, tolerance=cfg.tolerance, scope=scope)


def check_validity_invariance(rule: SwapRule, cfg: TrialConfig) -> AxiomReport:
    """Every single swap from a valid state must land on a valid state.

    Every fourth trial hugs the lower edge of state_range to stress
    near-boundary starts.
    """

    def draw(rng: np.random.Generator, trial: int) -> dict:
        s = _sample_state(rng, cfg, rule.dimension, hug_boundary=(trial % 4 == 3))
        i, j = _sample_pair(rng, rule.dimension)
        amount = _sample_amount(rng, cfg, s[i])
        return {"state": s.tolist(), "token_in": i, "token_out": j, "amount": amount}

    return _run_trials(rule, cfg, "validity_invariance", draw, scope=VALIDITY_SCOPE)


def check_pareto(rule: SwapRule, cfg: TrialConfig) -> AxiomReport:
    """No state on a swap chain may dominate another state on the same chain.

    Each trial runs one random chain of cfg.chain_length swaps and scans
    all ordered state pairs.  A chain that exits the domain is itself a
    failure, with the partial chain as witness.

    The hot loop calls the rule directly; any suspected failure is then
    confirmed through the same predicate shrink() replays, so witnesses
    never depend on the fast path.
    """
    axiom = "pareto_efficiency"
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, trial)
        s = _sample_state(rng, cfg, rule.dimension, hug_boundary=False)
        s.flags.writeable = False
        # Fractions are drawn up front; each concrete amount is pinned to the
        # state reached so far, so the witness replays without the RNG.
        fractions = log_uniform(rng, cfg.amount_range[0], cfg.amount_range[1],
                                cfg.chain_length)
        pairs = [_sample_pair(rng, rule.dimension) for _ in range(cfg.chain_length)]
        moves: list[tuple[int, int, float]] = []
        states = [s]
        current = s
        suspect = False
        for (i, j), frac in zip(pairs, fractions):
            amount = float(frac * current[i])
            moves.append((i, j, amount))
            try:
                nxt = np.asarray(rule.swap_in(current, i, j, amount), dtype=float)
            except Exception:
                suspect = True
                break
            # Only the touched coordinates are vetted per step; the whole
            # cloud is re-validated in one vectorized pass below.
            if (nxt.shape != current.shape
                    or not (0.0 < nxt[i] < math.inf and 0.0 < nxt[j] < math.inf)):
                suspect = True
                break
            nxt.flags.writeable = False
            states.append(nxt)
            current = nxt
        if not suspect:
            cloud = np.stack(states)
            if _state_ok(cloud) and _dominating_pair(cloud) is None:
                continue
        inputs = {"start": s.tolist(), "moves": moves}
        violated, observed, expected = _violates_pareto(rule, inputs, cfg.tolerance)
        assert violated, "fast path flagged a chain the predicate accepts"
        witness = Witness(inputs=inputs, observed=observed, expected=expected,
                          seed=cfg.seed, trial=trial)
        return AxiomReport(axiom=axiom, rule=rule.name, trials=trial + 1, passed=False,
                           witness=witness, tolerance=cfg.tolerance)
    return AxiomReport(axiom=axiom, rule=rule.name, trials=cfg.trials, passed=True,
                       witness=None, tolerance=cfg.tolerance)


def check_unit_invariance(rule: SwapRule, cfg: TrialConfig) -> AxiomReport:
    """Per-token unit changes must commute with swaps.

    Compares swap(scale(s, f), i, j, f_i * dx) against
    scale(swap(s, i, j, dx), f) at the configured tolerance.
    """

    def draw(rng: np.random.Generator, trial: int) -> dict:
        s = _sample_state(rng, cfg, rule.dimension, hug_boundary=False)
        i, j = _sample_pair(rng, rule.dimension)
        amount = _sample_amount(rng, cfg, s[i])
        factors = log_uniform(rng, cfg.state_range[0], cfg.state_range[1], rule.dimension)
        return {
            "state": s.tolist(),
            "factors": factors.tolist(),
            "token_in": i,
            "token_out": j,
            "amount": amount,
        }

    return _run_trials(rule, cfg, "unit_invariance", draw)


def check_token_symmetry(rule: SwapRule, cfg: TrialConfig) -> AxiomReport:
    """Two-token rules only: trading into a mirrored state mirrors the result."""
    if rule.dimension != 2:
        raise UsageError("token symmetry is defined for two-token rules")

    def draw(rng: np.random.Generator, trial: int) -> dict:
        s = _sample_state(rng, cfg, 2, hug_boundary=False)
        amount = _sample_amount(rng, cfg, s[0])
        return {"state": s.tolist(), "amount": amount}

    return _run_trials(rule, cfg, "token_symmetry", draw)


def check_all(rule: SwapRule, cfg: TrialConfig) -> list[AxiomReport]:
    """Run every applicable check; token symmetry only for two-token rules."""
    reports = [
        check_validity_invariance(rule, cfg),
        check_pareto(rule, cfg),
        check_unit_invariance(rule, cfg),
    ]
    if rule.dimension == 2:
        reports.append(check_token_symmetry(rule, cfg))
    return reports


# Witness shrinking.  Amounts are halved and then bisected down to the
# smallest value that still fails; state coordinates and unit factors
# step toward 1 by geometric midpoint while the failure persists.

_MAX_PASSES = 100
_BISECT_STEPS = 100


def _toward_one(value: float) -> float:
    """One geometric-midpoint step toward 1; snaps to the limit on stall.

    sqrt can round back onto its argument one ulp away from 1, so the
    chain's limit point is offered as the final candidate.
    """
    stepped = math.sqrt(value)
    if stepped == value and value != 1.0:
        return 1.0
    return stepped


def _min_failing_amount(check: Callable[[float], bool], amount: float) -> float:
    """Smallest amount that still fails, assuming check(amount) is True."""
    if amount > 0.0 and check(0.0):
        return 0.0
    lo = 0.0
    hi = amount
    for _ in range(_MAX_PASSES):
        half = hi / 2.0
        if half <= 0.0 or half == hi:
            return hi
        if check(half):
            hi = half
        else:
            lo = half
            break
    for _ in range(_BISECT_STEPS):
        mid = (lo + hi) / 2.0
        if mid <= lo or mid >= hi:
            break
        if check(mid):
            hi = mid
        else:
            lo = mid
    return hi


def shrink(report: AxiomReport, rule: SwapRule) -> AxiomReport:
    """Minimize a failing witness; the violation is preserved at every step."""
    if report.passed or report.witness is None:
        raise UsageError("only failed reports can be shrunk")
    predicate = _PREDICATES[report.axiom]
    tol = report.tolerance
    inputs = _copy_inputs(report.witness.inputs)

    def violates(candidate: dict) -> bool:
        return predicate(rule, candidate, tol)[0]

    if not violates(inputs):
        raise UsageError("witness does not replay; refusing to shrink a stale report")

    for _ in range(_MAX_PASSES):
        changed = False

        # Coordinates and unit factors first, each stepped to its geometric
        # fixpoint toward 1 before any amount shrinks; otherwise a shrinking
        # amount can wall off coordinate moves that would still fail.
        for _ in range(_MAX_PASSES):
            moved = False
            for key in ("state", "start", "factors"):
                coords = inputs.get(key)
                if coords is None:
                    continue
                for idx, value in enumerate(coords):
                    candidate_value = _toward_one(value)
                    if candidate_value == value:
                        continue
                    candidate = _copy_inputs(inputs)
                    candidate[key] = list(coords)
                    candidate[key][idx] = candidate_value
                    if violates(candidate):
                        inputs = candidate
                        coords = inputs[key]
                        moved = True
            if not moved:
                break
            changed = True

        if "amount" in inputs:
            def check_amount(a: float) -> bool:
                candidate = _copy_inputs(inputs)
                candidate["amount"] = a
                return violates(candidate)

            best = _min_failing_amount(check_amount, float(inputs["amount"]))
            if best != inputs["amount"]:
                inputs = _copy_inputs(inputs)
                inputs["amount"] = best
                changed = True

        if "moves" in inputs:
            for idx, (i, j, amount) in enumerate(inputs["moves"]):
                def check_move(a: float, idx=idx, i=i, j=j) -> bool:
                    candidate = _copy_inputs(inputs)
                    candidate["moves"][idx] = (i, j, a)
                    return violates(candidate)

                best = _min_failing_amount(check_move, float(amount))
                if best != amount:
                    inputs = _copy_inputs(inputs)
                    inputs["moves"][idx] = (i, j, best)
                    changed = True

        if not changed:
            break

    violated, observed, expected = predicate(rule, inputs, tol)
    assert violated, "shrinking must preserve the violation"
    witness = Witness(inputs=inputs, observed=observed, expected=expected,
                      seed=report.witness.seed, trial=report.witness.trial)
    return replace(report, witness=witness, shrunk=True)


def _copy_inputs(inputs: dict) -> dict:
    out = {}
    for key, value in inputs.items():
        if isinstance(value, list):
            out[key] = [list(v) if isinstance(v, (list, tuple)) else v for v in value]
        else:
            out[key] = value
    return out


def report_to_dict(report: AxiomReport) -> dict:
    """JSON-ready form of a report; field order is part of the format."""
    witness = None
    if report.witness is not None:
        witness = {
            "inputs": _jsonable(report.witness.inputs),
            "observed": _jsonable(report.witness.observed),
            "expected": _jsonable(report.witness.expected),
            "seed": int(report.witness.seed),
            "trial": int(report.witness.trial),
        }
    out = {
        "axiom": report.axiom,
        "rule": report.rule,
        "trials": int(report.trials),
        "passed": bool(report.passed),
        "witness": witness,
        "tolerance": float(report.tolerance),
        "shrunk": bool(report.shrunk),
        "prng": report.prng,
    }
    if report.scope is not None:
        out["scope"] = report.scope
    return out


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [float(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value
