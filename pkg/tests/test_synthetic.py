import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from itertools import product

from mixmax import MixMaxProblem
from mixmax.mixture import mixture_label_prob
from mixmax.synthetic import (
    PAD,
    MarkovChainSpec,
    chain_oracle_set,
    enumerate_sequences,
    log_prob_matrix,
    population_samples,
    sample_chain,
    sample_sequences,
    sequence_log_prob,
    sequence_log_probs,
    toy_oracles,
    toy_spec,
)
from mixmax.verify import grid_search, population_problem


def pad(seq, lmax=10):
    return list(seq) + [PAD] * (lmax - len(seq))


def brute_log_prob(chain, seq):
    """Plain loop over the transition table."""
    p = chain.initial[seq[0]] / chain.max_length
    for a, b in zip(seq[:-1], seq[1:]):
        p *= chain.transition[a, b]
    return np.log(p)


def test_sample_chain_valid(rng):
    c = sample_chain(4, 1.0, rng)
    assert c.vocab_size == 4 and c.max_length == 10
    np.testing.assert_allclose(c.transition.sum(axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(c.initial, 0.25)


def test_sample_chain_reproducible():
    a = sample_chain(4, 1.0, np.random.default_rng(5))
    b = sample_chain(4, 1.0, np.random.default_rng(5))
    np.testing.assert_array_equal(a.transition, b.transition)


def test_large_magnitude_rows_near_uniform():
    rng = np.random.default_rng(0)
    devs = [np.abs(sample_chain(4, 1e6, rng).transition - 0.25).max() for _ in range(100)]
    assert max(devs) < 0.01


@pytest.mark.parametrize("v, mag", [(1, 1.0), (4, 0.0), (4, -2.0)])
def test_sample_chain_rejects(v, mag, rng):
    with pytest.raises(ValueError):
        sample_chain(v, mag, rng)


def test_spec_validation():
    with pytest.raises(ValueError):
        MarkovChainSpec(np.array([[0.5, 0.6], [0.5, 0.5]]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        MarkovChainSpec(np.eye(2), np.array([0.5, 0.5]), max_length=0)


def test_spec_roundtrip(rng):
    c = sample_chain(3, 2.0, rng, max_length=5)
    d = MarkovChainSpec.from_dict(c.to_dict())
    np.testing.assert_array_equal(d.transition, c.transition)
    assert d.max_length == 5


def test_length_one_log_prob():
    c = sample_chain(4, 1.0, np.random.default_rng(1))
    assert sequence_log_prob(c, pad([2])) == pytest.approx(-np.log(40), abs=1e-12)


def test_identity_chain():
    c = MarkovChainSpec(np.eye(4), np.full(4, 0.25))
    assert sequence_log_prob(c, pad([2, 2, 2])) == pytest.approx(np.log(0.1 * 0.25))
    assert sequence_log_prob(c, pad([2, 1])) == -np.inf


def test_log_prob_matches_brute_force(rng):
    c = sample_chain(4, 1.0, rng)
    for _ in range(50):
        n = int(rng.integers(1, 11))
        seq = rng.integers(0, 4, size=n)
        assert sequence_log_prob(c, pad(seq)) == pytest.approx(brute_log_prob(c, seq), rel=1e-12)


@pytest.mark.parametrize("seq", [pad([4]), pad([0, -1, 1]), [PAD] * 10, pad([0] * 11, 11)])
def test_log_prob_rejects(seq):
    c = sample_chain(4, 1.0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        sequence_log_prob(c, seq)


def test_log_prob_matrix_rows(rng):
    chains = [sample_chain(3, 1.0, rng, max_length=4) for _ in range(3)]
    seqs = enumerate_sequences(3, 4)
    m = log_prob_matrix(chains, seqs)
    for c, row in zip(chains, m):
        np.testing.assert_array_equal(row, sequence_log_probs(c, seqs))


@given(st.integers(0, 2**31), st.integers(2, 9))
@settings(max_examples=50, deadline=None)
def test_concatenation_additivity(seed, n):
    rng = np.random.default_rng(seed)
    c = sample_chain(4, 1.0, rng)
    seq = rng.integers(0, 4, size=n + 1)
    diff = sequence_log_prob(c, pad(seq)) - sequence_log_prob(c, pad(seq[:-1]))
    assert diff == pytest.approx(np.log(c.transition[seq[-2], seq[-1]]), abs=1e-12)


def test_enumeration_sums_to_one(rng):
    c = sample_chain(3, 1.0, rng, max_length=4)
    seqs = enumerate_sequences(3, 4)
    assert len(seqs) == 3 + 9 + 27 + 81
    assert np.exp(sequence_log_probs(c, seqs)).sum() == pytest.approx(1.0, abs=1e-12)


def test_enumeration_limit():
    with pytest.raises(ValueError):
        enumerate_sequences(4, 12)


@pytest.mark.parametrize("n", [800, 200])
def test_sample_counts(n, rng):
    c = sample_chain(4, 1.0, rng)
    s = sample_sequences(c, n, rng)
    assert len(s) == 10 * n
    np.testing.assert_array_equal(np.bincount(s.strata)[1:], [n] * 10)


def test_unigram_frequencies_within_band():
    rng = np.random.default_rng(11)
    c = MarkovChainSpec(np.full((4, 4), 0.25), np.full(4, 0.25))
    s = sample_sequences(c, 4000, rng)
    first = s.y[s.strata == 1, 0]
    counts = np.bincount(first, minlength=4)
    n = len(first)
    sd = np.sqrt(n * 0.25 * 0.75)
    assert np.all(np.abs(counts - n * 0.25) <= 3 * sd)


def test_sampled_transitions_match_chain():
    """Empirical bigram frequencies of long sequences against the transition table."""
    rng = np.random.default_rng(2)
    c = sample_chain(3, 1.0, rng)
    s = sample_sequences(c, 3000, rng)
    src, dst = s.y[:, :-1], s.y[:, 1:]
    live = dst != PAD
    counts = np.zeros((3, 3))
    np.add.at(counts, (src[live], dst[live]), 1)
    n = counts.sum(axis=1, keepdims=True)
    sd = np.sqrt(c.transition * (1 - c.transition) / n)
    assert np.all(np.abs(counts / n - c.transition) <= 4 * sd + 1e-12)


def test_oracle_vertex_and_identical_chains(rng):
    a, b = sample_chain(3, 1.0, rng, max_length=4), sample_chain(3, 1.0, rng, max_length=4)
    seqs = enumerate_sequences(3, 4)
    s = chain_oracle_set([a, b])
    x = np.zeros(len(seqs))
    np.testing.assert_allclose(mixture_label_prob([1.0, 0.0], s, x, seqs), np.exp(sequence_log_probs(a, seqs)))
    mixed = mixture_label_prob([0.5, 0.5], s, x, seqs)
    brute = [0.5 * np.exp(brute_log_prob(a, q[q != PAD])) + 0.5 * np.exp(brute_log_prob(b, q[q != PAD])) for q in seqs]
    np.testing.assert_allclose(mixed, brute, rtol=1e-12)
    pop = population_samples(a)
    same = MixMaxProblem([pop, pop], chain_oracle_set([a, a]))
    single = MixMaxProblem([pop], chain_oracle_set([a]))
    assert same.objective([0.5, 0.5]) == pytest.approx(single.objective([1.0]), rel=1e-12)


def test_length_prior_does_not_move_argmax(rng):
    chains = [sample_chain(3, 1.0, rng, max_length=4) for _ in range(3)]
    with_prior = population_problem(chains)
    # the same problem with the 1/L factor removed from every probability
    without = population_problem(chains)
    without.probs = with_prior.probs * 4
    lam1, v1 = grid_search(with_prior, 0.02)
    lam2, v2 = grid_search(without, 0.02)
    np.testing.assert_array_equal(lam1, lam2)
    assert v1 - v2 == pytest.approx(np.log(4), abs=1e-12)


def test_mirror_toy_conditionals_sum_to_one():
    spec = toy_spec("binary_cosine", "mirror")
    x = np.linspace(0, 1, 101)
    np.testing.assert_allclose(spec.conditionals[0](x) + spec.conditionals[1](x), 1.0, atol=1e-15)


def test_regression_variant_a():
    spec = toy_spec("regression_cosine", "a")
    x = np.linspace(0, 1, 1001)
    vals = np.stack([f(x) for f in spec.conditionals])
    np.testing.assert_allclose(vals[0], 0.2 * np.cos(np.pi * x) + 0.5)
    np.testing.assert_allclose(vals[1], 0.1)
    np.testing.assert_allclose(vals[2], 0.15)
    assert (vals.max(axis=0) - vals.min(axis=0)).max() <= 0.7


@pytest.mark.parametrize("family, variant", [("binary_cosine", "cosine"), ("ternary", "a"), ("regression_cosine", "c")])
def test_unknown_toy(family, variant):
    with pytest.raises(ValueError):
        toy_oracles(family, variant)


def test_classification_sampler_binomial_band():
    oracle_set, sampler = toy_oracles("binary_cosine", "shifted")
    rng = np.random.default_rng(4)
    data = sampler(200_000, rng)
    for d, o in zip(data, oracle_set.oracles):
        sel = d.x <= 0.1
        n = sel.sum()
        target = o.outputs(d.x[sel])[:, 1].mean()
        sd = np.sqrt(target * (1 - target) / n)
        assert abs(d.y[sel].mean() - target) <= 3 * sd


def test_quadrature_is_exact_for_known_integral():
    # E[p(1|x)] for 0.5cos(pi x)+0.5 on U[0,1] is 0.5
    oracle_set, sampler = toy_oracles("binary_cosine", "mirror")
    d = sampler.exact(64)[0]
    assert d.normalized_weights() @ d.y == pytest.approx(0.5, abs=1e-14)
    r = toy_oracles("regression_cosine", "a")[1].exact(64)[0]
    assert r.normalized_weights() @ r.y == pytest.approx(0.5, abs=1e-14)
