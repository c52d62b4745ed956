import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixmax import MixMaxProblem, Samples, chain_oracle_set, sample_chain, sample_sequences, toy_oracles
from mixmax.losses import cross_entropy, squared_error
from mixmax.mixture import DegeneratePointError, GroupOracle, GroupOracleSet, mixture_predict
from mixmax.objective import emixmax_gradient, minibatch_gradient, mixmax_objective
from mixmax.suites import gradient_relative_error
from mixmax.verify import finite_diff_gradient

from conftest import interior_weights


def test_single_group_is_mean_loss():
    oracle_set, sampler = toy_oracles("binary_cosine", "mirror")
    data = sampler(300, np.random.default_rng(0))
    one = GroupOracleSet([oracle_set.oracles[0]])
    expected = np.mean([cross_entropy(o, y) for o, y in zip(oracle_set.oracles[0].outputs(data[0].x), data[0].y)])
    assert mixmax_objective([1.0], [data[0]], one) == pytest.approx(expected, rel=1e-12)
    # K=1: the gradient's only component is the same mean loss
    assert emixmax_gradient([1.0], [data[0]], one)[0] == pytest.approx(expected, rel=1e-12)


def test_mirror_toy_uniform_weights_give_ln2(mirror_toy, rng):
    oracle_set, sampler = mirror_toy
    for n in (5, 100, 2000):
        assert mixmax_objective([0.5, 0.5], sampler(n, rng), oracle_set) == pytest.approx(np.log(2), abs=1e-12)


def test_regression_closed_form():
    oracle_set, sampler = toy_oracles("regression_cosine", "b")
    data = sampler(50, np.random.default_rng(1))
    assert mixmax_objective([0.0, 0.5, 0.5], data, oracle_set, "squared_error") == pytest.approx(0.1225, abs=1e-12)


def test_objective_matches_direct_recomputation(rng):
    """Loop over samples with the plain loss functions as an independent oracle."""
    oracle_set, sampler = toy_oracles("regression_cosine", "a")
    data = sampler(40, rng)
    lam = interior_weights(rng, 3)
    total = 0.0
    for p, d in enumerate(data):
        f = mixture_predict(lam, oracle_set, d.x)
        total += lam[p] * np.mean([squared_error(f[i], d.y[i]) for i in range(len(d))])
    assert mixmax_objective(lam, data, oracle_set, "squared_error") == pytest.approx(total, rel=1e-12)


def test_identical_groups_symmetric_gradient(rng):
    chain = sample_chain(4, 1.0, rng)
    data = sample_sequences(chain, 20, rng)
    g = emixmax_gradient([0.5, 0.5], [data, data], chain_oracle_set([chain, chain]))
    assert g[0] == pytest.approx(g[1], rel=1e-14)


def test_markov_gradient_matches_fd(markov3, rng):
    _, problem = markov3
    for _ in range(10):
        assert gradient_relative_error(problem, interior_weights(rng, 3)) <= 1e-6


@pytest.mark.parametrize(
    "family, variant, loss",
    [
        ("binary_cosine", "mirror", "cross_entropy"),
        ("binary_cosine", "shifted", "cross_entropy"),
        ("regression_cosine", "a", "squared_error"),
        ("regression_cosine", "b", "squared_error"),
    ],
)
@pytest.mark.parametrize("mode", ["no_shift", "covariate_shift"])
def test_toy_gradient_matches_fd(family, variant, loss, mode, rng):
    oracle_set, sampler = toy_oracles(family, variant, mode)
    problem = MixMaxProblem(sampler(200, rng), oracle_set, loss)
    for _ in range(5):
        assert gradient_relative_error(problem, interior_weights(rng, problem.k)) <= 1e-5


def test_fd_self_consistency_across_step_sizes(markov3, rng):
    _, problem = markov3
    lam = interior_weights(rng, 3)
    _, a = finite_diff_gradient(problem, lam, 1e-4)
    _, b = finite_diff_gradient(problem, lam, 1e-5)
    np.testing.assert_allclose(a, b, rtol=1e-5)


def test_full_pass_minibatch_equals_full_gradient(markov3, rng):
    _, problem = markov3
    lam = interior_weights(rng, 3)
    full = problem.minibatch_gradient(lam, 1, rng, indices=np.arange(len(problem.owner)))
    np.testing.assert_allclose(full, problem.gradient(lam), rtol=1e-12)


def test_minibatch_unbiased_monte_carlo(markov3):
    _, problem = markov3
    rng = np.random.default_rng(99)
    lam = np.array([0.2, 0.3, 0.5])
    draws = np.array([problem.minibatch_gradient(lam, 16, rng) for _ in range(2000)])
    mean = draws.mean(axis=0)
    se = draws.std(axis=0, ddof=1) / np.sqrt(len(draws))
    assert np.all(np.abs(mean - problem.gradient(lam)) <= 3 * se)


def test_minibatch_identical_groups_symmetric_in_expectation(rng):
    chain = sample_chain(4, 1.0, rng)
    data = sample_sequences(chain, 20, rng)
    problem = MixMaxProblem([data, data], chain_oracle_set([chain, chain]))
    draws = np.array([problem.minibatch_gradient([0.5, 0.5], 8, rng) for _ in range(2000)])
    diff = draws[:, 0] - draws[:, 1]
    assert abs(diff.mean()) <= 3 * diff.std(ddof=1) / np.sqrt(len(diff))


def test_free_function_minibatch(markov3):
    chains, problem = markov3
    g = minibatch_gradient([1 / 3] * 3, problem.datasets, problem.oracle_set, "cross_entropy", 5, np.random.default_rng(0))
    assert g.shape == (3,) and np.all(np.isfinite(g))


def test_weighted_samples_equal_repeated_samples(rng):
    oracle_set, sampler = toy_oracles("binary_cosine", "shifted")
    data = sampler(30, rng)
    reps = [rng.integers(1, 4, size=30) for _ in data]
    weighted = [Samples(d.x, d.y, weights=r.astype(float)) for d, r in zip(data, reps)]
    repeated = [Samples(np.repeat(d.x, r), np.repeat(d.y, r)) for d, r in zip(data, reps)]
    lam = [0.3, 0.7]
    a, b = MixMaxProblem(weighted, oracle_set), MixMaxProblem(repeated, oracle_set)
    assert a.objective(lam) == pytest.approx(b.objective(lam), rel=1e-12)
    np.testing.assert_allclose(a.gradient(lam), b.gradient(lam), rtol=1e-12)


def test_objective_many_matches_objective(markov3, rng):
    _, problem = markov3
    lams = rng.dirichlet(np.ones(3), size=25)
    many = problem.objective_many(lams, chunk_elems=1000)
    np.testing.assert_allclose(many, [problem.objective(l) for l in lams], rtol=1e-12)


def test_empty_group_rejected(mirror_toy):
    oracle_set, _ = mirror_toy
    with pytest.raises(ValueError):
        MixMaxProblem([Samples(np.zeros(0), np.zeros(0, int)), Samples([0.5], [1])], oracle_set)


def test_degenerate_point_propagates():
    dead = GroupOracle(predict=lambda x: np.tile([0.5, 0.5], (len(x), 1)), density=lambda x: np.zeros(len(x)))
    live = GroupOracle(predict=lambda x: np.tile([0.5, 0.5], (len(x), 1)), density=lambda x: np.ones(len(x)))
    s = GroupOracleSet([dead, live], "covariate_shift")
    problem = MixMaxProblem([Samples([0.1, 0.2], [0, 1]), Samples([0.3], [1])], s)
    with pytest.raises(DegeneratePointError):
        problem.objective([1.0, 0.0])
    with pytest.raises(DegeneratePointError):
        problem.gradient([1.0, 0.0])
    assert problem.objective([0.5, 0.5]) == pytest.approx(np.log(2))


def test_clamped_probability_keeps_objective_finite():
    zero = GroupOracle(label_prob=lambda x, y: np.zeros(len(y)))
    one = GroupOracle(label_prob=lambda x, y: np.ones(len(y)))
    problem = MixMaxProblem([Samples([0.0], [0]), Samples([0.0], [0])], GroupOracleSet([zero, one]))
    value = problem.objective([1.0, 0.0])
    assert np.isfinite(value) and value == pytest.approx(-np.log(1e-12))
    assert np.all(np.isfinite(problem.gradient([1.0, 0.0])))


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_objective_bounds(seed):
    """Between 0 and the worst group's loss under the worst vertex predictor."""
    rng = np.random.default_rng(seed)
    oracle_set, sampler = toy_oracles("binary_cosine", "shifted")
    problem = MixMaxProblem(sampler(50, rng), oracle_set)
    lam = rng.dirichlet(np.ones(2))
    value = problem.objective(lam)
    vertex_worst = max(problem.group_losses(v).max() for v in np.eye(2))
    assert 0 <= value <= vertex_worst + 1e-12
