# %% [markdown]
# # Proxies fit from data
#
# Without the true chains, each group's chain is estimated from counts. The
# data can be split (one part fits the proxy, the other drives the ascent)
# or reused for both. Objectives below are exact: the entropy of the
# mixture over every sequence.

# %%
import numpy as np

from mixmax import MixMaxProblem, SolverConfig, chain_oracle_set, sample_chain, sample_sequences, solve
from mixmax.estimation import SplitPlan, e2mixmax, markov_fitter
from mixmax.verify import population_problem

rng = np.random.default_rng(3)
chains = [sample_chain(4, 1.0, rng) for _ in range(3)]
population = population_problem(chains)
fit = markov_fitter(4, 10)
cfg = SolverConfig(step_size=2.0, n_steps=10)

# %%
for n in (100, 400, 1600):
    data = [sample_sequences(c, n, rng) for c in chains]
    exact = solve(MixMaxProblem(data, chain_oracle_set(chains)), cfg)
    line = [f"n={n:5d}", f"true {population.objective(exact.weights):.4f}"]
    for plan in (SplitPlan("split", 0.75), SplitPlan("split", 0.25), SplitPlan("data_reuse")):
        rep = e2mixmax(data, plan, cfg, fit)
        line.append(f"{plan.label} {population.objective(rep.weights):.4f}")
    print("  ".join(line))
