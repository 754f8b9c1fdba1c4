"""Randomized axiom checking with shrinking counterexamples.

A conforming rule sails through thousands of adversarial trials; the
constant-sum rule is caught immediately, and the shrinker walks the raw
witness down to the tidy unit-cell counterexample.
"""

from ammorbit import TrialConfig, check_all, constant_sum, shrink, wgm

cfg = TrialConfig(seed=7, trials=2000)

print("== weighted rule, w = 0.5 ==")
for report in check_all(wgm(0.5), cfg):
    print(f"  {report.axiom:<22} passed={report.passed} trials={report.trials}")

print("\n== weighted rule, w = 0.3 ==")
for report in check_all(wgm(0.3), cfg):
    tag = "" if report.passed else "   <- only the two-token mirror test"
    print(f"  {report.axiom:<22} passed={report.passed}{tag}")

print("\n== constant-sum rule ==")
for report in check_all(constant_sum(), TrialConfig(seed=7, trials=100)):
    print(f"  {report.axiom:<22} passed={report.passed}")
    if report.passed:
        continue
    raw = report.witness
    print(f"      raw witness (trial {raw.trial}): {raw.inputs}")
    small = shrink(report, constant_sum())
    print(f"      shrunk to: {small.witness.inputs}")
    print(f"      observed:  {small.witness.observed}")
