"""Swap rules and the forward swap engine.

A SwapRule maps (state, token_in, token_out, amount) to the post-trade
state.  Built-in rules cover the weighted constant-product family (which
conforms to all the axioms checked by ammorbit.axioms) and a constant-sum
rule (which deliberately does not).  Weighted rules solve for the output
reserve in log space:

    new_j = exp((w_i*ln s_i + w_j*ln s_j - w_i*ln(s_i + dx)) / w_j)

so states spanning many orders of magnitude lose no precision to
intermediate powers.  The engine is forward-only: amounts are nonnegative
and rules are treated as black boxes, so no inverse query is offered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (AmmError, ChainError, ConfigError, DomainError,
                     MalformedInputError, NumericError, UsageError)
from .state import as_reserves, as_weights, is_valid, require_valid, weighted_gmean

Move = tuple[int, int, float]


@dataclass(frozen=True)
class SwapRule:
    """A named swap rule over a fixed number of tokens.

    weights is set for the built-in weighted-product family and None for
    rules with no known invariant; the conformance harness never looks
    at it.
    """

    name: str
    dimension: int
    swap_in: Callable[[np.ndarray, int, int, float], np.ndarray] = field(repr=False)
    weights: np.ndarray | None = None
    domain: Callable[[np.ndarray], bool] = field(default=is_valid, repr=False)

    def invariant(self, s) -> float:
        """Value of the rule's conserved quantity at s, if it declares one."""
        if self.weights is None:
            raise UsageError(f"rule {self.name!r} declares no invariant")
        return weighted_gmean(s, self.weights)


@dataclass(frozen=True)
class RuleSpec:
    """Parsed form of a rule spec string, see parse_rule."""

    kind: str
    weight: float | None = None
    weights: tuple[float, ...] | None = None


@dataclass(frozen=True)
class Trajectory:
    """States visited by a chain of swaps; states[k] precedes moves[k]."""

    states: tuple[np.ndarray, ...]
    moves: tuple[Move, ...]

    def __post_init__(self):
        if len(self.states) != len(self.moves) + 1:
            raise UsageError("trajectory needs exactly one more state than moves")


def _format_weight(w: float) -> str:
    return repr(float(w))


def _pair_swap(weights: np.ndarray, s: np.ndarray, i: int, j: int, amount: float) -> np.ndarray:
    si = s[i]
    sj = s[j]
    wi = weights[i]
    wj = weights[j]
    new_i = si + amount
    target = wi * math.log(si) + wj * math.log(sj)
    new_j = math.exp((target - wi * math.log(new_i)) / wj)
    out = s.copy()
    out[i] = new_i
    out[j] = new_j
    return out


def weighted_product(weights: Sequence[float]) -> SwapRule:
    """Rule holding prod s_i**w_i fixed; a pair trade touches only (i, j)."""
    w = as_weights(weights)

    def swap_in(s: np.ndarray, i: int, j: int, amount: float) -> np.ndarray:
        return _pair_swap(w, s, i, j, amount)

    if w.size == 2:
        name = f"wgm:{_format_weight(w[0])}"
    else:
        name = "wprod:" + ",".join(_format_weight(v) for v in w)
    return SwapRule(name=name, dimension=int(w.size), swap_in=swap_in, weights=w)


def wgm(weight: float) -> SwapRule:
    """Two-token weighted rule holding x**w * y**(1-w) fixed."""
    if not (isinstance(weight, (int, float)) and math.isfinite(weight)):
        raise ConfigError(f"wgm weight must be a finite number, got {weight!r}")
    if not (0.0 < weight < 1.0):
        raise ConfigError(f"wgm weight must lie strictly in (0, 1), got {weight!r}")
    return weighted_product((float(weight), 1.0 - float(weight)))


def product() -> SwapRule:
    """Constant-product rule xy = k, the equal-weight special case."""
    rule = wgm(0.5)
    return SwapRule(
        name="product",
        dimension=2,
        swap_in=rule.swap_in,
        weights=rule.weights,
    )


def constant_sum() -> SwapRule:
    """Rule holding x + y fixed.  Violates validity and unit invariance."""

    def swap_in(s: np.ndarray, i: int, j: int, amount: float) -> np.ndarray:
        out = s.copy()
        out[i] = s[i] + amount
        out[j] = s[j] - amount
        return out

    return SwapRule(name="csum", dimension=2, swap_in=swap_in, weights=None)


def make_rule(spec: RuleSpec) -> SwapRule:
    """Build a SwapRule from a parsed spec."""
    if spec.kind == "wgm":
        if spec.weight is None:
            raise ConfigError("wgm rule needs a weight")
        return wgm(spec.weight)
    if spec.kind == "product":
        return product()
    if spec.kind == "csum":
        return constant_sum()
    if spec.kind == "wprod":
        if not spec.weights:
            raise ConfigError("wprod rule needs a weight list")
        try:
            return weighted_product(spec.weights)
        except (DomainError, ConfigError) as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown rule kind {spec.kind!r}")


def parse_rule(text: str) -> SwapRule:
    """Parse 'wgm:<w>' | 'product' | 'csum' | 'wprod:<w1>,<w2>,...'."""
    text = text.strip()
    if text == "product":
        return make_rule(RuleSpec("product"))
    if text == "csum":
        return make_rule(RuleSpec("csum"))
    if text.startswith("wgm:"):
        body = text[len("wgm:"):]
        try:
            weight = float(body)
        except ValueError as exc:
            raise ConfigError(f"bad wgm weight {body!r}") from exc
        try:
            return make_rule(RuleSpec("wgm", weight=weight))
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
    if text.startswith("wprod:"):
        body = text[len("wprod:"):]
        try:
            weights = tuple(float(part) for part in body.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad wprod weight list {body!r}") from exc
        try:
            return make_rule(RuleSpec("wprod", weights=weights))
        except (DomainError, MalformedInputError) as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unrecognized rule spec {text!r}")


def swap(rule: SwapRule, s, i: int, j: int, amount: float) -> np.ndarray:
    """Trade amount units of token i into the pool, receiving token j.

    Returns the raw post-trade state.  The output is not required to be
    valid; validity of outputs is the harness's business.
    """
    a = as_reserves(s)
    if a.size != rule.dimension:
        raise UsageError(f"rule {rule.name!r} is {rule.dimension}-token, state has {a.size}")
    if i == j or not (0 <= i < a.size) or not (0 <= j < a.size):
        raise UsageError(f"bad token pair ({i}, {j}) for dimension {a.size}")
    if not (isinstance(amount, (int, float)) and math.isfinite(amount)):
        raise UsageError(f"amount must be a finite number, got {amount!r}")
    if amount < 0.0:
        raise UsageError(f"amount must be nonnegative, got {amount!r}")
    if not rule.domain(a):
        raise DomainError(f"state {a.tolist()} is outside the domain of rule {rule.name!r}")
    if amount == 0.0:
        return a
    try:
        out = np.asarray(rule.swap_in(a, i, j, float(amount)), dtype=float)
    except AmmError:
        raise
    except Exception as exc:
        raise NumericError(
            f"rule {rule.name!r} raised {type(exc).__name__} at {a.tolist()}, "
            f"pair ({i}, {j}), amount {amount!r}: {exc}"
        ) from exc
    if out.shape != a.shape or not np.all(np.isfinite(out)):
        raise NumericError(
            f"rule {rule.name!r} produced a non-finite result at {a.tolist()}, "
            f"pair ({i}, {j}), amount {amount!r}"
        )
    out.flags.writeable = False
    return out


def out_amount(rule: SwapRule, s, i: int, j: int, amount: float) -> float:
    """Units of token j paid out for an input of amount units of token i."""
    before = as_reserves(s)
    after = swap(rule, s, i, j, amount)
    return float(before[j] - after[j])


def chain(rule: SwapRule, s0, moves: Sequence[Move]) -> Trajectory:
    """Run a sequence of swaps, checking every intermediate state.

    Raises ChainError naming the failing step (1-based in the message)
    if any post-swap state leaves the rule's domain; the exception
    carries the trajectory accumulated before the bad step.
    """
    current = as_reserves(s0)
    if not rule.domain(current):
        raise DomainError(f"start state {current.tolist()} is outside the domain of {rule.name!r}")
    states = [current]
    done: list[Move] = []
    for k, (i, j, amount) in enumerate(moves):
        nxt = swap(rule, current, i, j, amount)
        if not rule.domain(nxt):
            raise ChainError(
                f"chain left the domain of {rule.name!r} at step {k + 1}: "
                f"swap({current.tolist()}, {i}, {j}, {amount!r}) = {nxt.tolist()}",
                step=k,
                partial=Trajectory(states=tuple(states), moves=tuple(done)),
            )
        states.append(nxt)
        done.append((int(i), int(j), float(amount)))
        current = nxt
    return Trajectory(states=tuple(states), moves=tuple(done))
