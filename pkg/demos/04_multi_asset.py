"""Beyond two tokens: orbits fill hyperplanes and pairwise slices agree.

The log cloud of an n-token weighted pool is flat: one fit recovers all
n weights at once, and freezing all but two tokens recovers each
pairwise weight ratio from the slice slope.
"""

import numpy as np

from ammorbit import (
    OrbitConfig,
    as_reserves,
    check_equal_weights,
    check_slices,
    fit_log_hyperplane,
    sample_orbit,
    weighted_product,
)

weights = [0.5, 0.3, 0.2]
rule = weighted_product(weights)
start = as_reserves([1.0, 1.0, 1.0])

sample = sample_orbit(rule, start, count=64, seed=11)
fit = fit_log_hyperplane(sample)
print(f"rule {rule.name}")
print(f"  recovered weights {np.round(fit.weights, 15).tolist()}")
print(f"  worst error       {np.max(np.abs(fit.weights - np.array(weights))):.2e}")
print(f"  plane residual    {fit.residual:.2e}")

report = check_slices(rule, start, OrbitConfig(seed=11, samples=32))
print("\npairwise slices (slope should be -w_i/w_j):")
for piece in report.slices:
    want = -weights[piece.token_a] / weights[piece.token_b]
    print(f"  tokens ({piece.token_a},{piece.token_b}): slope {piece.slope:.12f}"
          f"  target {want:.12f}  spectators fixed: {piece.others_fixed}")
print(f"verdict: {report.verdict}")

# symmetric pools must weight every token equally
flat = weighted_product([0.25, 0.25, 0.25, 0.25])
flat_fit = fit_log_hyperplane(sample_orbit(flat, as_reserves([1.0] * 4), count=64, seed=2))
print(f"\n4-token symmetric pool weights {np.round(flat_fit.weights, 12).tolist()}")
print(f"equal-weight check: {check_equal_weights(flat_fit, 1e-9)}")
