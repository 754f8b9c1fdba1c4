"""Recovering a pool's weight from nothing but its trades.

Reachable states in log coordinates fall on a straight line whose slope
is -w/(1-w); fitting that line across several orbits reads the weight
back out to machine precision.
"""

import numpy as np

from ammorbit import OrbitConfig, as_reserves, fit_log_line, sample_orbit, verify_level_sets, wgm

rule = wgm(0.8)
sample = sample_orbit(rule, as_reserves([1.0, 1.0]), count=64, seed=7)

fit = fit_log_line(sample)
print(f"one orbit of {rule.name}:")
print(f"  fitted log-space slope {fit.slope:.15f}  (exact: {-0.8 / 0.2})")
print(f"  orthogonal residual    {fit.residual:.2e}")

starts = [as_reserves(s) for s in ([1.0, 1.0], [3.0, 0.4], [0.2, 6.0], [1.5, 1.5])]
report = verify_level_sets(rule, starts, OrbitConfig(seed=7, samples=64))
print(f"\nacross {len(starts)} orbits:")
print(f"  w_hat        {report.weight_estimate!r}")
print(f"  slope spread {report.slope_spread:.2e}")
print(f"  verdict      {report.verdict}")

print("\nweight sweep:")
for w in (0.1, 0.25, 0.5, 0.75, 0.9):
    fit = fit_log_line(sample_orbit(wgm(w), as_reserves([1.0, 1.0]), count=64, seed=1))
    w_hat = fit.slope_magnitude / (1.0 + fit.slope_magnitude)
    print(f"  true {w:<5} recovered {w_hat:.15f}  error {abs(w_hat - w):.1e}")

# states reachable from (1,1) never put both log coordinates on the same
# side of zero: one token gets richer only as the other gets poorer
pts = sample.log_points
print(f"\nmax u*v on the (1,1)-orbit: {np.max(pts[:, 0] * pts[:, 1]):.2e} (<= 0 up to roundoff)")
