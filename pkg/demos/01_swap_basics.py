"""Tour of the swap engine: building rules, trading, and chaining trades."""

from ammorbit import as_reserves, chain, constant_sum, out_amount, parse_rule, swap, wgm

def pretty(state) -> tuple:
    return tuple(float(v) for v in state)


pool = as_reserves([1.0, 1.0])
rule = wgm(0.5)

print(f"rule {rule.name}: weights {pretty(rule.weights)}")
print(f"start at {pretty(pool)}, invariant {rule.invariant(pool)}")

after = swap(rule, pool, 0, 1, 1.0)
print(f"pay in 1.0 X  -> pool {pretty(after)}  (trader got {out_amount(rule, pool, 0, 1, 1.0)} Y)")

back = swap(rule, after, 1, 0, 0.5)
print(f"pay in 0.5 Y  -> pool {pretty(back)}  (round trip closes exactly here)")

# a heavier X weight makes X cheap to add: the pool pays out much more Y
skewed = parse_rule("wgm:0.8")
print(f"\n{skewed.name}: same unit trade pays {out_amount(skewed, pool, 0, 1, 1.0)} Y")

# a whole trajectory in one call
traj = chain(rule, pool, [(0, 1, 1.0), (1, 0, 0.5), (0, 1, 3.0)])
print("\nchained trades:")
for k, s in enumerate(traj.states):
    print(f"  step {k}: {pretty(s)}")

# the constant-sum rule happily drains a token to zero; later demos show
# how the axiom checks catch that
flat = constant_sum()
print(f"\n{flat.name}: (1,1) + 1.0 X -> {pretty(swap(flat, pool, 0, 1, 1.0))}")
