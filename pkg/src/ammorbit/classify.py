"""Recovering a rule's invariant from the orbits its swaps trace out.

In log coordinates the reachable set of a conforming two-token rule is a
straight line of negative slope -c, and the weight of the underlying
invariant x**w * y**(1-w) is w = c / (1 + c).  For n tokens the orbit
lies on a hyperplane whose normal, rescaled to sum to one, is the weight
vector.  This module samples orbits, fits lines and hyperplanes by total
least squares, and turns fits back into weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AmmError,
    ClassificationError,
    ConfigError,
    DegenerateSampleError,
    DomainError,
    SamplingError,
    UsageError,
    VerticalFitError,
)
from .rand import log_uniform, trial_rng
from .rules import SwapRule, swap
from .state import require_valid

# Log points closer than this are not distinct enough to anchor a fit.
DISTINCT_EPS = 1e-10

# Singular values below this count as zero when ranking a centered cloud.
RANK_EPS = 1e-10

# Normal components must clear this after sign normalization.
COMPONENT_EPS = 1e-9

MIN_ORBIT_SAMPLES = 8


@dataclass(frozen=True)
class OrbitConfig:
    """Sampling and tolerance knobs for classification runs."""

    seed: int = 0
    samples: int = 64
    tolerance: float = 1e-9
    amount_range: tuple[float, float] = (1e-3, 1.0)

    def __post_init__(self):
        if not (0 <= self.seed < 2**64):
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed!r}")
        if self.samples < MIN_ORBIT_SAMPLES:
            raise ConfigError(f"samples must be >= {MIN_ORBIT_SAMPLES}, got {self.samples}")
        lo, hi = self.amount_range
        if not (0.0 < lo <= hi and math.isfinite(hi)):
            raise ConfigError(f"amount_range must satisfy 0 < lo <= hi, got ({lo!r}, {hi!r})")
        if not (0.0 < self.tolerance < 1.0):
            raise ConfigError(f"tolerance must lie in (0, 1), got {self.tolerance!r}")


@dataclass(frozen=True)
class OrbitSample:
    """States visited while wandering one orbit, plus their log images."""

    rule: str
    start: np.ndarray
    states: tuple[np.ndarray, ...]
    log_points: np.ndarray
    seed: int


@dataclass(frozen=True)
class LineFit:
    """Total-least-squares line v = slope * u + intercept in log space.

    slope_magnitude is -slope when the slope is negative, else None;
    residual is the largest orthogonal distance of any point.
    """

    slope: float
    intercept: float
    residual: float
    slope_magnitude: float | None


@dataclass(frozen=True)
class HyperplaneFit:
    """Least-variance hyperplane normal . z = offset through a log cloud."""

    normal: np.ndarray
    offset: float
    weights: np.ndarray
    residual: float


@dataclass(frozen=True)
class OrbitFit:
    start: tuple[float, ...]
    seed: int
    slope: float
    intercept: float
    residual: float
    invariant_value: float
    invariant_spread: float


@dataclass(frozen=True)
class ClassificationReport:
    rule: str
    orbits: tuple[OrbitFit, ...]
    pooled_slope: float | None
    weight_estimate: float | None
    slope_spread: float | None
    residual_max: float | None
    verdict: bool
    failure: str | None
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class SliceFit:
    token_a: int
    token_b: int
    slope: float
    residual: float
    others_fixed: bool
    ok: bool


@dataclass(frozen=True)
class SliceReport:
    rule: str
    point: tuple[float, ...]
    slices: tuple[SliceFit, ...]
    verdict: bool
    failure: str | None


def _orbit_directions(n: int) -> list[tuple[int, int]]:
    """Deterministic cycle of trade directions covering every ordered pair."""
    if n == 2:
        return [(0, 1), (1, 0)]
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def sample_orbit(rule: SwapRule, s0, count: int = 64, seed: int = 0) -> OrbitSample:
    """Record count forward swaps (count+1 states) wandering one orbit.

    Directions cycle so the walk does not drift off in one token, and
    amounts are log-uniform fractions of the input reserve.  Hitting the
    domain boundary raises SamplingError carrying the partial sample.
    """
    if count < MIN_ORBIT_SAMPLES:
        raise UsageError(f"count must be >= {MIN_ORBIT_SAMPLES}, got {count}")
    start = require_valid(s0)
    if start.size != rule.dimension:
        raise UsageError(f"rule {rule.name!r} is {rule.dimension}-token, start has {start.size}")
    rng = trial_rng(seed, 0)
    directions = _orbit_directions(rule.dimension)
    fractions = log_uniform(rng, 1e-3, 1.0, count)
    states = [start]
    current = start
    for step in range(count):
        i, j = directions[step % len(directions)]
        amount = float(fractions[step] * current[i])
        nxt = swap(rule, current, i, j, amount)
        if not (np.all(np.isfinite(nxt)) and np.all(nxt > 0.0)):
            partial = _finish_sample(rule, start, states, seed)
            raise SamplingError(
                f"orbit sampling hit the domain boundary of {rule.name!r} at step "
                f"{step + 1}: swap({current.tolist()}, {i}, {j}, {amount!r}) = {nxt.tolist()}",
                partial=partial,
            )
        states.append(nxt)
        current = nxt
    return _finish_sample(rule, start, states, seed)


def _finish_sample(rule: SwapRule, start: np.ndarray, states: list, seed: int) -> OrbitSample:
    logs = np.log(np.stack(states))
    logs.flags.writeable = False
    return OrbitSample(rule=rule.name, start=start, states=tuple(states),
                       log_points=logs, seed=seed)


def _require_spread(cloud: np.ndarray) -> None:
    diffs = cloud[:, None, :] - cloud[None, :, :]
    diameter = float(np.max(np.linalg.norm(diffs, axis=2)))
    if diameter <= DISTINCT_EPS:
        raise DegenerateSampleError(
            f"all {cloud.shape[0]} log points coincide within {DISTINCT_EPS}"
        )


def fit_log_line(sample: OrbitSample) -> LineFit:
    """Fit the best line through a two-token sample's log points.

    Total least squares: the line direction is the principal axis of the
    centered cloud, so both coordinates are treated symmetrically.
    """
    cloud = np.asarray(sample.log_points, dtype=float)
    if cloud.ndim != 2 or cloud.shape[1] != 2:
        raise UsageError(f"line fits need two-token samples, got shape {cloud.shape}")
    _require_spread(cloud)
    mean = cloud.mean(axis=0)
    centered = cloud - mean
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    direction = vt[0]
    normal = vt[1]
    if abs(direction[0]) <= 1e-12:
        raise VerticalFitError("log points fall on a vertical line; no finite slope")
    slope = float(direction[1] / direction[0])
    intercept = float(mean[1] - slope * mean[0])
    residual = float(np.max(np.abs(centered @ normal)))
    magnitude = -slope if slope < 0.0 else None
    return LineFit(slope=slope, intercept=intercept, residual=residual,
                   slope_magnitude=magnitude)


def weight_from_slope(slope_magnitude: float) -> float:
    """Map the line's downhill rate c to the invariant weight c / (1 + c)."""
    if not (isinstance(slope_magnitude, (int, float)) and math.isfinite(slope_magnitude)):
        raise DomainError(f"slope magnitude must be finite, got {slope_magnitude!r}")
    if slope_magnitude <= 0.0:
        raise DomainError(f"slope magnitude must be positive, got {slope_magnitude!r}")
    c = float(slope_magnitude)
    return c / (1.0 + c)


def _pooled_slope(fits: list[LineFit]) -> float:
    # Orbits with larger residuals say less about the common slope.
    weights = np.array([1.0 / (fit.residual + 1e-300) for fit in fits])
    slopes = np.array([fit.slope for fit in fits])
    return float(np.dot(weights, slopes) / np.sum(weights))


def verify_level_sets(rule: SwapRule, starts, cfg: OrbitConfig) -> ClassificationReport:
    """Classify a two-token rule from several sampled orbits.

    Samples one orbit per start (orbit k reseeded as cfg.seed xor k),
    fits each in log space, and accepts only if every slope is strictly
    negative, the slopes agree within cfg.tolerance, and the implied
    invariant is constant along each orbit.  Starts landing on the same
    orbit are merged with a warning.
    """
    starts = [require_valid(s) for s in starts]
    if len(starts) < 2:
        raise UsageError("need at least two starts on distinct orbits")
    if rule.dimension != 2:
        raise UsageError("verify_level_sets handles two-token rules; "
                         "use fit_log_hyperplane for more tokens")

    def fail(msg: str, orbits: list[OrbitFit]) -> ClassificationReport:
        return ClassificationReport(rule=rule.name, orbits=tuple(orbits), pooled_slope=None,
                                    weight_estimate=None, slope_spread=None, residual_max=None,
                                    verdict=False, failure=msg)

    fits: list[LineFit] = []
    samples: list[OrbitSample] = []
    partial: list[OrbitFit] = []
    for k, start in enumerate(starts):
        orbit_seed = (cfg.seed ^ k) & 0xFFFFFFFFFFFFFFFF
        try:
            sample = sample_orbit(rule, start, cfg.samples, seed=orbit_seed)
            fit = fit_log_line(sample)
        except AmmError as exc:
            return fail(f"orbit {k} (start {start.tolist()}): {exc}", partial)
        if fit.slope >= 0.0:
            return fail(
                f"orbit {k} (start {start.tolist()}): slope {fit.slope!r} is not negative",
                partial,
            )
        samples.append(sample)
        fits.append(fit)
        partial.append(OrbitFit(start=tuple(start.tolist()), seed=orbit_seed,
                                slope=fit.slope, intercept=fit.intercept,
                                residual=fit.residual, invariant_value=math.nan,
                                invariant_spread=math.nan))

    slopes = [fit.slope for fit in fits]
    spread = float(max(slopes) - min(slopes))
    pooled = _pooled_slope(fits)
    w_hat = weight_from_slope(-pooled)
    residual_max = float(max(fit.residual for fit in fits))

    warnings: list[str] = []
    orbit_fits: list[OrbitFit] = []
    values: list[float] = []
    for k, (sample, fit) in enumerate(zip(samples, fits)):
        # Invariant implied by the pooled fit, evaluated along the orbit.
        logs = np.asarray(sample.log_points)
        phi = np.exp(w_hat * logs[:, 0] + (1.0 - w_hat) * logs[:, 1])
        lo, hi = float(np.min(phi)), float(np.max(phi))
        spread_k = (hi - lo) / hi
        level = float(np.median(phi))
        orbit_fits.append(OrbitFit(start=tuple(sample.start.tolist()), seed=sample.seed,
                                   slope=fit.slope, intercept=fit.intercept,
                                   residual=fit.residual, invariant_value=level,
                                   invariant_spread=float(spread_k)))
        values.append(level)

    verdict = True
    failure = None
    if spread > cfg.tolerance:
        verdict = False
        failure = f"slope spread {spread!r} exceeds tolerance {cfg.tolerance!r}"
    for k, fit in enumerate(orbit_fits):
        if verdict and fit.invariant_spread > cfg.tolerance:
            verdict = False
            failure = (f"orbit {k}: implied invariant varies by {fit.invariant_spread!r} "
                       f"(tolerance {cfg.tolerance!r})")
    for a in range(len(values)):
        for b in range(a + 1, len(values)):
            ref = max(abs(values[a]), abs(values[b]))
            if abs(values[a] - values[b]) <= cfg.tolerance * ref:
                warnings.append(
                    f"starts {a} and {b} lie on the same orbit "
                    f"(invariant {values[a]!r}); treating them as one level"
                )

    return ClassificationReport(rule=rule.name, orbits=tuple(orbit_fits), pooled_slope=pooled,
                                weight_estimate=w_hat, slope_spread=spread,
                                residual_max=residual_max, verdict=verdict, failure=failure,
                                warnings=tuple(warnings))


def fit_log_hyperplane(sample: OrbitSample) -> HyperplaneFit:
    """Fit normal . z = offset through an n-token sample's log points.

    The normal is the least-variance direction of the centered cloud,
    sign-normalized to positive component sum.  A conforming rule yields
    an all-positive normal; weights are the normal rescaled to sum 1.
    """
    cloud = np.asarray(sample.log_points, dtype=float)
    if cloud.ndim != 2 or cloud.shape[1] < 2:
        raise UsageError(f"hyperplane fits need an (m, n>=2) cloud, got shape {cloud.shape}")
    n = cloud.shape[1]
    if cloud.shape[0] < n:
        raise DegenerateSampleError(f"need at least {n} points to pin an {n}-token hyperplane")
    mean = cloud.mean(axis=0)
    centered = cloud - mean
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    rank = int(np.sum(sv > RANK_EPS))
    if rank < n - 1:
        raise DegenerateSampleError(
            f"centered cloud has rank {rank} < {n - 1}; orbit sampling did not "
            f"explore enough directions"
        )
    normal = vt[-1]
    total = float(np.sum(normal))
    if total < 0.0:
        normal = -normal
        total = -total
    if float(np.min(normal)) <= COMPONENT_EPS:
        raise ClassificationError(
            f"fitted normal {normal.tolist()} has non-positive or near-zero components; "
            f"the sampled rule does not hold a weighted product fixed"
        )
    weights = normal / total
    offset = float(np.dot(normal, mean))
    residual = float(np.max(np.abs(centered @ normal)))
    out_normal = normal.copy()
    out_normal.flags.writeable = False
    out_weights = weights.copy()
    out_weights.flags.writeable = False
    return HyperplaneFit(normal=out_normal, offset=offset, weights=out_weights,
                         residual=residual)


def _sample_pair_chain(rule: SwapRule, p: np.ndarray, i: int, j: int,
                       count: int, seed: int, amount_range) -> list[np.ndarray]:
    rng = trial_rng(seed, 0)
    fractions = log_uniform(rng, amount_range[0], amount_range[1], count)
    states = [p]
    current = p
    for step in range(count):
        a, b = (i, j) if step % 2 == 0 else (j, i)
        amount = float(fractions[step] * current[a])
        nxt = swap(rule, current, a, b, amount)
        if not (np.all(np.isfinite(nxt)) and np.all(nxt > 0.0)):
            raise SamplingError(
                f"slice ({i}, {j}) of {rule.name!r} hit the domain boundary at step {step + 1}",
                partial=states,
            )
        states.append(nxt)
        current = nxt
    return states


def check_slices(rule: SwapRule, p, cfg: OrbitConfig) -> SliceReport:
    """Probe every token pair of an n-token rule through two-token slices.

    For each pair (i, j) a chain of (i, j)-only swaps is sampled from p;
    the (u_i, u_j) log points must fall on a strictly decreasing line
    within cfg.tolerance while every other coordinate stays bitwise
    fixed.  For a weighted-product rule the slice slope is -w_i / w_j.
    """
    point = require_valid(p)
    if rule.dimension < 3:
        raise UsageError("check_slices needs a rule with at least three tokens")
    if point.size != rule.dimension:
        raise UsageError(f"point has {point.size} coordinates, rule has {rule.dimension}")

    n = rule.dimension
    slices: list[SliceFit] = []
    verdict = True
    failure = None
    for i in range(n):
        for j in range(i + 1, n):
            slice_seed = (cfg.seed ^ (i * n + j)) & 0xFFFFFFFFFFFFFFFF
            try:
                states = _sample_pair_chain(rule, point, i, j, cfg.samples,
                                            slice_seed, cfg.amount_range)
            except AmmError as exc:
                verdict = False
                failure = failure or f"pair ({i}, {j}): {exc}"
                slices.append(SliceFit(token_a=i, token_b=j, slope=math.nan,
                                       residual=math.nan, others_fixed=False, ok=False))
                continue
            cloud = np.stack(states)
            others = [k for k in range(n) if k not in (i, j)]
            others_fixed = all(
                all(state[k] == point[k] for k in others) for state in states
            )
            logs = np.log(cloud[:, (i, j)])
            pair_sample = OrbitSample(rule=rule.name, start=point,
                                      states=tuple(states), log_points=logs,
                                      seed=slice_seed)
            try:
                fit = fit_log_line(pair_sample)
            except AmmError as exc:
                verdict = False
                failure = failure or f"pair ({i}, {j}): {exc}"
                slices.append(SliceFit(token_a=i, token_b=j, slope=math.nan,
                                       residual=math.nan, others_fixed=others_fixed,
                                       ok=False))
                continue
            ok = (fit.slope < 0.0 and fit.residual <= cfg.tolerance and others_fixed)
            if not ok:
                verdict = False
                failure = failure or (
                    f"pair ({i}, {j}): slope {fit.slope!r}, residual {fit.residual!r}, "
                    f"others_fixed {others_fixed}"
                )
            slices.append(SliceFit(token_a=i, token_b=j, slope=fit.slope,
                                   residual=fit.residual, others_fixed=others_fixed, ok=ok))
    return SliceReport(rule=rule.name, point=tuple(point.tolist()),
                       slices=tuple(slices), verdict=verdict, failure=failure)


def check_equal_weights(fit: HyperplaneFit, tol: float) -> bool:
    """True iff every fitted weight matches 1/n within tol."""
    w = np.asarray(fit.weights, dtype=float)
    return bool(np.max(np.abs(w - 1.0 / w.size)) <= tol)


def orbit_to_csv(sample: OrbitSample) -> str:
    """CSV with one row per state: x1..xn, then their logs u1..un."""
    n = int(sample.log_points.shape[1])
    header = ",".join([f"x{k + 1}" for k in range(n)] + [f"u{k + 1}" for k in range(n)])
    lines = [header]
    for state, logs in zip(sample.states, sample.log_points):
        row = [format(float(v), ".17g") for v in state] + \
              [format(float(v), ".17g") for v in logs]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def classification_to_dict(report: ClassificationReport) -> dict:
    """JSON-ready form of a classification report."""
    return {
        "rule": report.rule,
        "w_hat": report.weight_estimate,
        "pooled_slope": report.pooled_slope,
        "slope_spread": report.slope_spread,
        "residual_max": report.residual_max,
        "verdict": bool(report.verdict),
        "failure": report.failure,
        "warnings": list(report.warnings),
        "orbits": [
            {
                "start": list(fit.start),
                "seed": int(fit.seed),
                "slope": fit.slope,
                "intercept": fit.intercept,
                "residual": fit.residual,
                "invariant_value": fit.invariant_value,
                "invariant_spread": fit.invariant_spread,
            }
            for fit in report.orbits
        ],
    }
