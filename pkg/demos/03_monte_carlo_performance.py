"""Estimate how close each rule gets to the optimum as the electorate grows.

Unit costs: most rules head to ratio 1 quickly.  The bare equal-shares rule
lags because it can leave budget unspent; greedy cover converges slowly.
"""
from epblab import EnvParams, Rule, empirical_performance

setting = EnvParams(m=8, alpha=1.0, budget=4.0, lmax=2)

print(f"{'n':>5s}", *(f"{r.value:>13s}" for r in Rule))
for n in (10, 20, 50, 100):
    row = []
    for rule in Rule:
        rec = empirical_performance(setting, rule, n=n, trials=20, samples=25, seed=1)
        row.append(f"{rec.mean_ratio:10.3f}+-{rec.ci95_half_width:.3f}")
    print(f"{n:5d}", *row)

print()
print("general costs (alpha=5, budget=8), n=100:")
setting5 = EnvParams(m=8, alpha=5.0, budget=8.0, lmax=2)
for rule in Rule:
    rec = empirical_performance(setting5, rule, n=100, trials=20, samples=25, seed=1)
    print(f"  {rule.value:14s} {rec.mean_ratio:.3f} +- {rec.ci95_half_width:.3f}")
