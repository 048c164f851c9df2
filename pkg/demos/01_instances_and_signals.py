"""Walk through a small instance: costs, budget, latent qualities, signals.

Three projects with costs (4, 3, 2) compete for a budget of 7.  Each project
has a hidden binary quality; voters only see one noisy thumbs-up/down signal
per project and approve exactly what they saw.
"""
import numpy as np

from epblab import (
    Environment,
    is_quality_dominant,
    sample_quality_vector,
    sample_signal_profile,
    utility,
)

env = Environment(
    costs=np.array([4.0, 3.0, 2.0]),
    budget=7.0,
    lmax=1,
    priors=np.array([[0.2, 0.8], [0.4, 0.6], [0.6, 0.4]]),
    q=np.array([[0.3, 0.7], [0.35, 0.65], [0.4, 0.6]]),
)

print("costs:", env.costs, " budget:", env.budget)
print("quality dominant signal structure:", is_quality_dominant(env.q))

rng = np.random.default_rng(42)
L = sample_quality_vector(env, rng)
print("drawn qualities:", L)

profile = sample_signal_profile(env, L, n=100, rng=rng)
print("approval counts from 100 agents:", profile.sum(axis=0))
print("expected approval rates:        ", env.q[np.arange(env.m), L] * 100)

# utilities of the three two-project bundles under the drawn qualities
for members in ([0, 1], [0, 2], [1, 2]):
    print(f"utility of {members}: {utility(env, members, L):.0f}")
