import numpy as np
import pytest

from mixmax import MixMaxProblem, chain_oracle_set, sample_chain, sample_sequences, toy_oracles


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def markov3(rng):
    """Three V=4 chains (magnitude 1) with 30 samples per length each."""
    chains = [sample_chain(4, 1.0, rng) for _ in range(3)]
    data = [sample_sequences(c, 30, rng) for c in chains]
    return chains, MixMaxProblem(data, chain_oracle_set(chains), "cross_entropy")


@pytest.fixture
def mirror_toy(rng):
    oracle_set, sampler = toy_oracles("binary_cosine", "mirror")
    return oracle_set, sampler


def interior_weights(rng, k, floor=0.05):
    return (1 - k * floor) * rng.dirichlet(np.ones(k)) + floor
