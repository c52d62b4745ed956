"""Named verification suites with their default parameters.

Each suite returns a :class:`SuiteResult` with a pass flag, the worst margin
seen and one line of detail per check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .objective import MixMaxProblem
from .simplex import l1_distance
from .solver import SolverConfig, solve
from .synthetic import chain_oracle_set, sample_chain, sample_sequences, toy_oracles
from .verify import concavity_probe, finite_diff_gradient, grid_search, population_problem, unbiasedness_test

GRADIENT_RTOL = 1e-5
CONCAVITY_TOL = 1e-9
ORACLE_L1 = 0.02
ORACLE_OBJECTIVE = 1e-3


@dataclass
class SuiteResult:
    name: str
    passed: bool
    worst: float
    lines: list = field(default_factory=list)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: worst margin {self.worst:.3e}"


TOY_CASES = [
    ("binary_cosine", "mirror", "cross_entropy"),
    ("binary_cosine", "shifted", "cross_entropy"),
    ("regression_cosine", "a", "squared_error"),
    ("regression_cosine", "b", "squared_error"),
]


def _random_instance(i: int, rng):
    """Cycle through Markov and toy instances."""
    kind = i % 5
    if kind == 0:
        chains = [sample_chain(4, 1.0, rng) for _ in range(3)]
        data = [sample_sequences(c, 20, rng) for c in chains]
        return "markov", MixMaxProblem(data, chain_oracle_set(chains), "cross_entropy")
    family, variant, loss = TOY_CASES[kind - 1]
    oracle_set, sampler = toy_oracles(family, variant)
    return f"{family}/{variant}", MixMaxProblem(sampler(500, rng), oracle_set, loss)


def gradient_relative_error(problem, weights, h: float = 1e-5) -> float:
    """Norm-wise relative error between finite-difference and analytic tangent derivatives."""
    dirs, fd = finite_diff_gradient(problem, weights, h)
    analytic = dirs @ problem.gradient(weights)
    return float(np.linalg.norm(fd - analytic) / max(np.linalg.norm(analytic), 1e-8))


def gradients(seed: int = 0, n_instances: int = 100, h: float = 1e-5) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    lines = []
    for i in range(n_instances):
        name, problem = _random_instance(i, rng)
        lam = 0.8 * rng.dirichlet(np.ones(problem.k)) + 0.2 / problem.k
        err = gradient_relative_error(problem, lam, h)
        worst = max(worst, err)
        lines.append(f"{i:3d} {name:28s} rel err {err:.2e}")
    return SuiteResult("gradients", worst <= GRADIENT_RTOL, worst, lines)


def exact_problems(markov_seed: int = 0) -> list:
    """Exact-oracle problems whose data are full populations."""
    out = []
    for family, variant, loss in TOY_CASES:
        oracle_set, sampler = toy_oracles(family, variant)
        out.append((f"{family}/{variant}", MixMaxProblem(sampler.exact(), oracle_set, loss)))
    rng = np.random.default_rng(markov_seed)
    chains = [sample_chain(3, 1.0, rng, max_length=4) for _ in range(3)]
    out.append(("markov V=3 L=4", population_problem(chains)))
    return out


def concavity(seed: int = 0, trials: int = 100) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = np.inf
    lines = []
    passed = True
    for name, problem in exact_problems(seed):
        rep = concavity_probe(problem, trials, rng, CONCAVITY_TOL)
        worst = min(worst, rep.worst_margin)
        passed &= rep.passed
        lines.append(f"{name:28s} worst margin {rep.worst_margin:.3e}")
    return SuiteResult("concavity", passed, worst, lines)


def unbiasedness(seed: int = 0, n_datasets: int = 1000, samples_per_length: int = 10) -> SuiteResult:
    rng = np.random.default_rng(seed)
    chains = [sample_chain(3, 1.0, rng, max_length=4) for _ in range(3)]
    rep = unbiasedness_test(chains, np.full(3, 1 / 3), n_datasets, samples_per_length, rng)
    lines = [
        f"population {np.array2string(rep.population, precision=5)}",
        f"mean       {np.array2string(rep.mean, precision=5)}",
        f"z-scores   {np.array2string(rep.z, precision=2)}",
    ]
    return SuiteResult("unbiasedness", rep.passed, float(np.max(np.abs(rep.z))), lines)


def oracle_instance(seed: int, k: int, samples_per_length: int = 200):
    rng = np.random.default_rng([seed, k])
    chains = [sample_chain(4, 1.0, rng) for _ in range(k)]
    data = [sample_sequences(c, samples_per_length, rng) for c in chains]
    return MixMaxProblem(data, chain_oracle_set(chains), "cross_entropy")


def solve_refined(problem):
    """Ten steps at step size 2, then 100 refining steps at 0.5."""
    coarse = solve(problem, SolverConfig(step_size=2.0, n_steps=10))
    return solve(problem, SolverConfig(step_size=0.5, n_steps=100), init=coarse.weights)


def oracle(seed: int = 0, n_instances: int = 10) -> SuiteResult:
    worst = 0.0
    passed = True
    lines = []
    for i in range(n_instances):
        for k in (2, 3):
            problem = oracle_instance(seed + i, k)
            report = solve_refined(problem)
            best, best_value = grid_search(problem, 0.01)
            dist = l1_distance(report.weights, best)
            gap = abs(best_value - report.final_objective)
            ok = dist <= ORACLE_L1 and gap <= ORACLE_OBJECTIVE
            passed &= ok
            worst = max(worst, dist)
            lines.append(f"seed {seed + i} K={k} l1 {dist:.4f} objective gap {gap:.2e} {'ok' if ok else 'FAIL'}")
    return SuiteResult("oracle", passed, worst, lines)


SUITES = {
    "gradients": gradients,
    "concavity": concavity,
    "unbiasedness": unbiasedness,
    "oracle": oracle,
}
