"""Tour of the GP belief: conditioning, posterior queries, sampling.

Run:  python demos/01_gp_belief_basics.py
"""

import numpy as np

from gpscreen import GPBelief, KernelSpec

rng = np.random.default_rng(0)

# An empty belief is the prior: zero mean, kernel variance everywhere.
kernel = KernelSpec(lengthscale=1.0, signal_variance=1.0)
belief = GPBelief.empty(kernel, noise_variance=0.1)

x_query = np.array([[0.0], [0.5], [2.0]])
prior = belief.posterior(x_query)
print("prior mean     :", np.round(prior.mean, 4))
print("prior variance :", np.round(prior.variances, 4))

# Condition on two (molecule, outcome) observations. Beliefs are immutable:
# each condition() returns a new snapshot and extends the cached Cholesky
# factor instead of refitting.
belief = belief.condition([0.0], 1.2)
belief = belief.condition([2.0], -0.3)

post = belief.posterior(x_query)
print("\nafter observing (0.0, 1.2) and (2.0, -0.3):")
print("posterior mean     :", np.round(post.mean, 4))
print("posterior variance :", np.round(post.variances, 4))

# Joint function samples respect the posterior covariance between points;
# near x=0 they hug 1.2, near x=2 they hug -0.3.
draws = belief.sample_function_values(x_query, rng, size=5)
print("\nfive joint posterior draws (rows):")
print(np.round(draws, 3))

# Outcome samples add observation noise on top of the function value.
ys = [belief.sample_outcome([0.5], rng) for _ in range(5)]
print("\nfive predictive outcomes at x=0.5:", np.round(ys, 3))

# Incremental conditioning is exact: rebuilding from scratch on the same
# data gives the same posterior to machine precision.
scratch = GPBelief.from_data(kernel, 0.1, [[0.0], [2.0]], [1.2, -0.3])
gap = np.max(np.abs(scratch.posterior(x_query).mean - post.mean))
print(f"\nincremental vs from-scratch posterior mean gap: {gap:.2e}")
