"""Independent checks on the optimizer and gradients.

Exhaustive grid search over the simplex, central finite differences along
simplex tangents, random concavity probes, a Monte-Carlo unbiasedness test
against enumerated population gradients, and worst-group evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .mixture import GroupOracle, GroupOracleSet, mixture_predict
from .objective import MixMaxProblem, Samples
from .simplex import check_weights, simplex_grid
from .synthetic import chain_oracle_set, enumerate_sequences, log_prob_matrix, sample_sequences

MAX_GRID_POINTS = 1_000_000
TIE_TOL = 1e-12


def default_grid_step(k: int) -> float:
    return 0.01 if k <= 3 else 0.05


def grid_size(k: int, step: float) -> int:
    n = round(1.0 / step)
    return comb(n + k - 1, k - 1)


def grid_search(problem: MixMaxProblem, step: float | None = None) -> tuple:
    """Best grid point of the objective; ties (within ``TIE_TOL``) go to the lexicographically smallest."""
    step = default_grid_step(problem.k) if step is None else step
    size = grid_size(problem.k, step)
    if size > MAX_GRID_POINTS:
        raise ValueError(f"grid of {size} points exceeds the limit of {MAX_GRID_POINTS}")
    grid = simplex_grid(problem.k, step)
    values = problem.objective_many(grid)
    # values within rounding of the maximum count as ties
    top = values.max()
    best = int(np.flatnonzero(values >= top - TIE_TOL * max(1.0, abs(top)))[0])
    return grid[best], float(values[best])


def tangent_directions(k: int) -> np.ndarray:
    """Rows ``(e_i - e_j) / sqrt(2)`` for all ``i < j``."""
    rows = []
    for i, j in combinations(range(k), 2):
        d = np.zeros(k)
        d[i], d[j] = 1.0, -1.0
        rows.append(d / np.sqrt(2.0))
    return np.array(rows).reshape(-1, k)


def finite_diff_gradient(problem: MixMaxProblem, weights, h: float = 1e-5, directions=None) -> tuple:
    """Central differences of the objective along simplex tangents.

    Returns ``(directions, derivatives)``. Compare against
    ``directions @ problem.gradient(weights)``.
    """
    lam = check_weights(weights, problem.k)
    if np.any(lam < 10 * h):
        raise ValueError(f"weights must be at least 10h={10 * h} from the boundary: {lam}")
    dirs = tangent_directions(problem.k) if directions is None else np.atleast_2d(directions)
    plus = problem.objective_many(lam + h * dirs)
    minus = problem.objective_many(lam - h * dirs)
    return dirs, (plus - minus) / (2 * h)


@dataclass
class ConcavityReport:
    passed: bool
    worst_margin: float
    trials: int


def concavity_probe(problem: MixMaxProblem, trials: int, rng, tol: float = 1e-9) -> ConcavityReport:
    """Midpoint-style concavity check at random pairs and a grid of mixing levels.

    The margin ``obj(a l1 + (1-a) l2) - a obj(l1) - (1-a) obj(l2)`` is recorded
    for ``a`` in 0.1, ..., 0.9; the probe passes if no margin falls below ``-tol``.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    alphas = np.linspace(0.1, 0.9, 9)
    worst = np.inf
    for _ in range(trials):
        l1, l2 = rng.dirichlet(np.ones(problem.k), size=2)
        mixes = alphas[:, None] * l1 + (1 - alphas[:, None]) * l2
        vals = problem.objective_many(np.vstack([l1, l2, mixes]))
        margin = vals[2:] - alphas * vals[0] - (1 - alphas) * vals[1]
        worst = min(worst, float(margin.min()))
    return ConcavityReport(worst >= -tol, worst, trials)


@dataclass
class UnbiasednessReport:
    passed: bool
    population: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    z: np.ndarray
    n_datasets: int


def population_problem(chains) -> MixMaxProblem:
    """MixMax problem over the chains' full distributions (every sequence enumerated).

    Each group's samples are the whole support weighted by that chain's
    probabilities; covariates carry the support index so the oracles are
    table lookups.
    """
    chains = list(chains)
    support = enumerate_sequences(chains[0].vocab_size, chains[0].max_length)
    probs = np.exp(log_prob_matrix(chains, support))
    index = np.arange(len(support))
    pops = [Samples(index, support, weights=p) for p in probs]

    def lookup(row):
        return GroupOracle(label_prob=lambda xs, ys: row[np.asarray(xs, dtype=np.int64)])

    oracle_set = GroupOracleSet([lookup(p) for p in probs], "no_shift")
    return MixMaxProblem(pops, oracle_set, "cross_entropy")


def population_gradient(chains, weights) -> np.ndarray:
    """Exact MixMax gradient by enumeration."""
    return population_problem(chains).gradient(weights)


def unbiasedness_test(
    chains, weights, n_datasets: int, samples_per_length: int, rng, n_sigma: float = 3.0
) -> UnbiasednessReport:
    """Mean of full-data gradients over fresh datasets vs the population gradient."""
    chains = list(chains)
    lam = check_weights(weights, len(chains))
    pop = population_gradient(chains, lam)
    oracle_set = chain_oracle_set(chains)
    grads = np.empty((n_datasets, len(chains)))
    for t in range(n_datasets):
        data = [sample_sequences(c, samples_per_length, rng) for c in chains]
        grads[t] = MixMaxProblem(data, oracle_set, "cross_entropy").gradient(lam)
    mean = grads.mean(axis=0)
    stderr = grads.std(axis=0, ddof=1) / np.sqrt(n_datasets)
    z = np.where(stderr > 0, (mean - pop) / np.where(stderr > 0, stderr, 1.0), 0.0)
    close = np.where(stderr > 0, np.abs(z) <= n_sigma, np.isclose(mean, pop, rtol=0, atol=1e-12))
    return UnbiasednessReport(bool(np.all(close)), pop, mean, stderr, z, n_datasets)


@dataclass
class WorstGroupReport:
    group_losses: np.ndarray
    worst: float
    worst_group: int
    weights: np.ndarray | None
    group_accuracies: np.ndarray | None = None

    @property
    def worst_accuracy(self) -> float | None:
        return None if self.group_accuracies is None else float(self.group_accuracies.min())


def _accuracies(datasets, oracle_set, weights, predictor):
    accs = []
    for d in datasets:
        if predictor is not None:
            out = np.asarray(predictor(d.x))
        else:
            out = mixture_predict(weights, oracle_set, d.x)
        hit = (np.argmax(out, axis=1) == np.asarray(d.y)).astype(float)
        accs.append(float(hit @ d.normalized_weights()))
    return np.array(accs)


def worst_group_eval(
    datasets, oracle_set: GroupOracleSet, loss: str = "cross_entropy", weights=None, predictor=None
) -> WorstGroupReport:
    """Per-group mean loss of the mixture predictor (or a supplied predictor).

    ``predictor`` maps a batch of covariates to outputs and replaces the
    mixture of the oracle set. Accuracies are reported for classification
    when full class-probability outputs are available.
    """
    datasets = list(datasets)
    if any(len(d) == 0 for d in datasets):
        raise ValueError("every test group needs samples")
    if predictor is None:
        lam = check_weights(weights, len(oracle_set))
        losses = MixMaxProblem(datasets, oracle_set, loss).group_losses(lam)
    else:
        lam = None
        single = GroupOracleSet([GroupOracle(predict=predictor)] * len(datasets))
        losses = MixMaxProblem(datasets, single, loss).group_losses(
            np.full(len(datasets), 1.0 / len(datasets))
        )
    accs = None
    has_outputs = predictor is not None or all(o.predict is not None for o in oracle_set.oracles)
    if loss == "cross_entropy" and has_outputs:
        accs = _accuracies(datasets, oracle_set, lam, predictor)
    worst = int(np.argmax(losses))
    return WorstGroupReport(losses, float(losses[worst]), worst, lam, accs)


def population_objective(chains, weights) -> float:
    """Exact MixMax objective of a set of chains (entropy of the mixture)."""
    return population_problem(chains).objective(weights)


__all__ = [
    "ConcavityReport",
    "UnbiasednessReport",
    "WorstGroupReport",
    "concavity_probe",
    "finite_diff_gradient",
    "grid_search",
    "population_gradient",
    "population_problem",
    "population_objective",
    "tangent_directions",
    "unbiasedness_test",
    "worst_group_eval",
]
