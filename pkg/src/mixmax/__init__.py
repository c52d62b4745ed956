"""Minimax-optimal data mixtures for group DRO by entropic mirror ascent."""

from .baselines import balanced_weights, resolve_baseline, single_group_weights
from .estimation import (
    KdeModel,
    SplitPlan,
    e2mixmax,
    fit_kde,
    fit_markov_proxy,
    kde_density,
    markov_fitter,
    split_samples,
)
from .losses import cross_entropy, loss_output_gradient, squared_error
from .mixture import (
    DegeneratePointError,
    GroupOracle,
    GroupOracleSet,
    mixture_density,
    mixture_predict,
    mixture_predict_gradient,
)
from .objective import MixMaxProblem, Samples, emixmax_gradient, minibatch_gradient, mixmax_objective
from .simplex import l1_distance, mirror_ascent_step, uniform
from .solver import SolveReport, SolverConfig, solve
from .synthetic import (
    MarkovChainSpec,
    chain_as_oracle,
    chain_oracle_set,
    sample_chain,
    sample_sequences,
    sequence_log_prob,
    toy_oracles,
)
from .verify import (
    concavity_probe,
    finite_diff_gradient,
    grid_search,
    unbiasedness_test,
    worst_group_eval,
)

__version__ = "0.1.0"
