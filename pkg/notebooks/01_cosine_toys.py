# %% [markdown]
# # Cosine toys
#
# Two binary groups whose label probabilities mirror each other around 0.5.
# Any mixture other than the even one favors one group, so the minimax
# mixture is the even split and its predictor guesses 0.5 everywhere.

# %%
import numpy as np

from mixmax import MixMaxProblem, SolverConfig, solve, toy_oracles
from mixmax.verify import grid_search, worst_group_eval

rng = np.random.default_rng(0)
oracles, sampler = toy_oracles("binary_cosine", "mirror")
train = sampler(10000, rng)
report = solve(MixMaxProblem(train, oracles), SolverConfig(step_size=0.5, n_steps=100))
print("weights", np.round(report.weights, 4))

# %%
exact = sampler.exact()
for w in ([0.5, 0.5], report.weights, [1.0, 0.0]):
    wg = worst_group_eval(exact, oracles, weights=w)
    print(np.round(w, 4), "group CE", np.round(wg.group_losses, 4), "worst acc", round(wg.worst_accuracy, 3))

# %% [markdown]
# The shifted variant breaks the symmetry, so the weights move off 0.5.

# %%
shifted, shifted_sampler = toy_oracles("binary_cosine", "shifted")
problem = MixMaxProblem(shifted_sampler.exact(), shifted)
print("solver", np.round(solve(problem, SolverConfig(0.5, 100)).weights, 3), "grid", grid_search(problem)[0])

# %% [markdown]
# Regression with three groups: a cosine, the constant 0.1 and the constant
# 0.8. The two constants bracket the cosine, so the cosine group drops out
# and the mixture predicts their midpoint.

# %%
reg, reg_sampler = toy_oracles("regression_cosine", "b")
problem = MixMaxProblem(reg_sampler(10000, rng), reg, "squared_error")
rep = solve(problem, SolverConfig(step_size=2.0, n_steps=100))
print("solver", np.round(rep.weights, 3), "objective", round(rep.final_objective, 5))
print("grid  ", grid_search(problem))
