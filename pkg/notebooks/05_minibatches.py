# %% [markdown]
# # Minibatch gradients
#
# Sampling a few points per group with replacement gives a gradient whose
# average matches the full-data one. Per-sample sequence losses spread over
# several nats while the gradient components differ by hundredths, so small
# batches make the ascent wander; it settles only as the batch grows.

# %%
import numpy as np

from mixmax import MixMaxProblem, SolverConfig, chain_oracle_set, sample_chain, sample_sequences, solve

rng = np.random.default_rng(1)
chains = [sample_chain(4, 1.0, rng) for _ in range(3)]
problem = MixMaxProblem([sample_sequences(c, 200, rng) for c in chains], chain_oracle_set(chains))
w = np.array([0.2, 0.3, 0.5])

draws = np.array([problem.minibatch_gradient(w, 32, rng) for _ in range(2000)])
print("full      ", np.round(problem.gradient(w), 4))
print("mean of MB", np.round(draws.mean(axis=0), 4), "+/-", np.round(draws.std(axis=0) / np.sqrt(2000), 4))

# %%
full = solve(problem, SolverConfig(step_size=2.0, n_steps=10))
for batch in (8, 64, 512, 2000):
    mb = solve(problem, SolverConfig(step_size=2.0, n_steps=10, batch_size=batch, seed=7))
    print(batch, np.round(mb.weights, 3), "vs full", np.round(full.weights, 3))
