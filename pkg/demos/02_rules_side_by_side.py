"""Run all eight budgeted approval rules on the same random election and
compare their picks against the exact optimum."""
import numpy as np

from epblab import (
    ALL_RULES,
    TieBreak,
    generate_environment,
    optimal_set,
    sample_quality_vector,
    sample_signal_profile,
    tally,
    utility,
)

rng = np.random.default_rng(7)
env = generate_environment(m=8, alpha=5.0, budget=8.0, lmax=2, rng=rng)
L = sample_quality_vector(env, rng)
profile = sample_signal_profile(env, L, n=100, rng=rng)
tb = TieBreak.identity(env.m)

best, best_value = optimal_set(env, L)
print("costs:    ", np.round(env.costs, 2))
print("qualities:", L)
print(f"optimum:   {best.members} (value {best_value:.0f}, cost {best.total_cost:.2f})")
print()
print(f"{'rule':14s} {'winners':22s} {'value':>5s} {'cost':>6s} {'ratio':>6s}")
for rule in ALL_RULES:
    w = tally(rule, env, profile, tb)
    value = utility(env, w.members, L)
    ratio = value / best_value if best_value else 1.0
    print(f"{rule.value:14s} {str(w.members):22s} {value:5.0f} {w.total_cost:6.2f} {ratio:6.3f}")
