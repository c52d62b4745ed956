# %% [markdown]
# # Checks on the gradient and the optimizer
#
# Finite differences against the analytic gradient, concavity on exact
# problems (and its failure on small samples), gradient unbiasedness over
# resampled datasets, and solver-versus-grid agreement.

# %%
import numpy as np

from mixmax import MixMaxProblem, toy_oracles
from mixmax import suites
from mixmax.verify import concavity_probe

for suite in ("gradients", "concavity", "unbiasedness"):
    result = suites.SUITES[suite](seed=0)
    print(result.summary())
    for line in result.lines[:5]:
        print("   ", line)

# %% [markdown]
# Concavity needs the population measures. Twenty samples per group are
# enough to break it.

# %%
oracles, sampler = toy_oracles("binary_cosine", "shifted")
rng = np.random.default_rng(0)
margins = [concavity_probe(MixMaxProblem(sampler(20, rng), oracles), 20, rng).worst_margin for _ in range(20)]
print("worst margin on 20-sample draws", min(margins))

# %%
print(suites.oracle(seed=0, n_instances=2).summary())
