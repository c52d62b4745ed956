"""Synthetic group families with exact samplers, predictors and densities.

Two families are provided:

* first-order Markov chains over a small vocabulary whose transition rows
  are drawn from a symmetric Dirichlet; the modeled object is the whole
  sequence, with a uniform prior over lengths ``1..max_length`` and a
  uniform initial-token distribution;
* one-dimensional cosine toys on ``x ~ U[0, 1]`` for binary classification
  and deterministic regression.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .mixture import GroupOracle, GroupOracleSet
from .objective import Samples

PAD = -1


@dataclass(frozen=True)
class MarkovChainSpec:
    transition: np.ndarray
    initial: np.ndarray
    max_length: int = 10

    def __post_init__(self):
        t = np.asarray(self.transition, dtype=float)
        pi = np.asarray(self.initial, dtype=float)
        v = t.shape[0]
        if t.shape != (v, v) or v < 2:
            raise ValueError(f"transition matrix must be square with V >= 2, got {t.shape}")
        if pi.shape != (v,):
            raise ValueError("initial distribution must have one entry per token")
        if self.max_length < 1:
            raise ValueError("max_length must be at least 1")
        for row in np.vstack([t, pi]):
            if np.any(row < 0) or abs(row.sum() - 1.0) > 1e-12:
                raise ValueError("transition rows and initial distribution must lie on the simplex")
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "initial", pi)

    @property
    def vocab_size(self) -> int:
        return self.transition.shape[0]

    def to_dict(self) -> dict:
        return {
            "transition": self.transition.tolist(),
            "initial": self.initial.tolist(),
            "max_length": self.max_length,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MarkovChainSpec":
        return cls(np.array(d["transition"]), np.array(d["initial"]), int(d["max_length"]))


def sample_chain(vocab_size: int, magnitude: float, rng, max_length: int = 10) -> MarkovChainSpec:
    """Draw every transition row from Dirichlet(magnitude * 1)."""
    if vocab_size < 2:
        raise ValueError("vocabulary needs at least two tokens")
    if not magnitude > 0:
        raise ValueError("Dirichlet magnitude must be positive")
    rows = rng.dirichlet(np.full(vocab_size, float(magnitude)), size=vocab_size)
    rows /= rows.sum(axis=1, keepdims=True)
    return MarkovChainSpec(rows, np.full(vocab_size, 1.0 / vocab_size), max_length)


def sequence_lengths(seqs) -> np.ndarray:
    return np.sum(np.asarray(seqs) != PAD, axis=1)


def _check_sequences(seqs, vocab_size: int, max_length: int) -> np.ndarray:
    seqs = np.atleast_2d(np.asarray(seqs, dtype=np.int64))
    mask = seqs != PAD
    lengths = mask.sum(axis=1)
    if np.any(lengths < 1) or np.any(lengths > max_length):
        raise ValueError(f"sequence lengths must lie in 1..{max_length}")
    if np.any(mask[:, 1:] & ~mask[:, :-1]):
        raise ValueError("padding must only appear at the end of a sequence")
    if np.any(seqs >= vocab_size) or np.any(seqs < PAD):
        raise ValueError("token out of range")
    return seqs


def _step_index(seqs, vocab_size: int):
    """First tokens and flat transition indices; padded steps map to ``V*V``."""
    mask = seqs != PAD
    tok = np.where(mask, seqs, 0)
    flat = np.where(mask[:, 1:], tok[:, :-1] * vocab_size + tok[:, 1:], vocab_size * vocab_size)
    return tok[:, 0], flat


def _log_probs_from_index(chain, first, flat) -> np.ndarray:
    with np.errstate(divide="ignore"):
        table = np.append(np.log(chain.transition).ravel(), 0.0)
        log_pi = np.log(chain.initial)
    out = log_pi[first] - np.log(chain.max_length)
    if flat.shape[1]:
        out = out + np.take(table, flat).sum(axis=1)
    return out


def sequence_log_probs(chain: MarkovChainSpec, seqs) -> np.ndarray:
    """Log-probability of each row of a padded ``(n, L)`` token array."""
    seqs = _check_sequences(seqs, chain.vocab_size, chain.max_length)
    return _log_probs_from_index(chain, *_step_index(seqs, chain.vocab_size))


def log_prob_matrix(chains, seqs) -> np.ndarray:
    """``(K, n)`` log-probabilities of the same sequences under several chains."""
    chains = list(chains)
    v, lmax = chains[0].vocab_size, chains[0].max_length
    if any(c.vocab_size != v or c.max_length != lmax for c in chains):
        raise ValueError("chains must share vocabulary size and max length")
    first, flat = _step_index(_check_sequences(seqs, v, lmax), v)
    return np.stack([_log_probs_from_index(c, first, flat) for c in chains])


def sequence_log_prob(chain: MarkovChainSpec, seq) -> float:
    """Log-probability of one sequence, length prior included."""
    return float(sequence_log_probs(chain, np.asarray(seq)[None, :])[0])


def sample_sequences(chain: MarkovChainSpec, n_per_length: int, rng) -> Samples:
    """``n_per_length`` sequences of every length ``1..max_length``.

    Sequences are returned padded to ``max_length`` and ordered by length;
    ``strata`` holds the lengths.
    """
    if n_per_length < 1:
        raise ValueError("n_per_length must be at least 1")
    lmax = chain.max_length
    cdf_pi = np.cumsum(chain.initial)
    cdf_t = np.cumsum(chain.transition, axis=1)
    v = chain.vocab_size
    blocks = []
    for length in range(1, lmax + 1):
        block = np.full((n_per_length, lmax), PAD, dtype=np.int64)
        u = rng.random((n_per_length, length))
        cur = np.minimum(np.searchsorted(cdf_pi, u[:, 0], side="right"), v - 1)
        block[:, 0] = cur
        for t in range(1, length):
            cur = np.minimum(np.sum(cdf_t[cur] <= u[:, t : t + 1], axis=1), v - 1)
            block[:, t] = cur
        blocks.append(block)
    seqs = np.vstack(blocks)
    return Samples(np.zeros(len(seqs)), seqs, strata=sequence_lengths(seqs))


@lru_cache(maxsize=8)
def _enumerate(vocab_size: int, max_length: int) -> np.ndarray:
    blocks = []
    for length in range(1, max_length + 1):
        grid = np.indices((vocab_size,) * length).reshape(length, -1).T
        block = np.full((len(grid), max_length), PAD, dtype=np.int64)
        block[:, :length] = grid
        blocks.append(block)
    out = np.vstack(blocks)
    out.setflags(write=False)
    return out


def enumerate_sequences(vocab_size: int, max_length: int, limit: int = 5_000_000) -> np.ndarray:
    """Every sequence of length ``1..max_length``, padded, shortest first."""
    count = sum(vocab_size**length for length in range(1, max_length + 1))
    if count > limit:
        raise ValueError(f"{count} sequences exceed the enumeration limit {limit}")
    return _enumerate(vocab_size, max_length)


def population_samples(chain: MarkovChainSpec, support=None) -> Samples:
    """The chain's full distribution as a weighted sample collection."""
    seqs = enumerate_sequences(chain.vocab_size, chain.max_length) if support is None else support
    probs = np.exp(sequence_log_probs(chain, seqs))
    return Samples(np.zeros(len(seqs)), seqs, weights=probs)


def chain_as_oracle(chain: MarkovChainSpec) -> GroupOracle:
    """Oracle whose label probability is the exact sequence probability.

    The covariate is a dummy singleton and is ignored.
    """

    def label_prob(xs, ys):
        return np.exp(sequence_log_probs(chain, ys))

    return GroupOracle(label_prob=label_prob)


def chain_oracle_set(chains) -> GroupOracleSet:
    return GroupOracleSet([chain_as_oracle(c) for c in chains], "no_shift")


# ---------------------------------------------------------------------------
# cosine toys

TOY_VARIANTS = {
    "binary_cosine": ("mirror", "shifted"),
    "regression_cosine": ("a", "b"),
}


@dataclass(frozen=True)
class ToySpec:
    """Conditionals of a cosine toy; ``conditionals[p](x)`` is P(y=1|x) or E[y|x]."""

    family: str
    variant: str
    conditionals: tuple

    @property
    def classification(self) -> bool:
        return self.family == "binary_cosine"


def toy_spec(family: str, variant: str) -> ToySpec:
    if family == "binary_cosine":
        first = lambda x: 0.5 * np.cos(np.pi * x) + 0.5  # noqa: E731
        if variant == "mirror":
            second = lambda x: -0.5 * np.cos(np.pi * x) + 0.5  # noqa: E731
        elif variant == "shifted":
            second = lambda x: -0.5 * np.cos(np.pi * (x - 0.2)) + 0.5  # noqa: E731
        else:
            raise ValueError(f"unknown binary_cosine variant {variant!r}")
        return ToySpec(family, variant, (first, second))
    if family == "regression_cosine":
        third = {"a": 0.15, "b": 0.8}.get(variant)
        if third is None:
            raise ValueError(f"unknown regression_cosine variant {variant!r}")
        funcs = (
            lambda x: 0.2 * np.cos(np.pi * x) + 0.5,
            lambda x: np.full(np.shape(x), 0.1),
            lambda x: np.full(np.shape(x), third),
        )
        return ToySpec(family, variant, funcs)
    raise ValueError(f"unknown toy family {family!r}")


def _uniform_density(x):
    x = np.asarray(x, dtype=float)
    return ((x >= 0) & (x <= 1)).astype(float)


def _toy_oracle(cond: Callable, classification: bool) -> GroupOracle:
    if classification:

        def predict(x):
            p1 = cond(np.asarray(x, dtype=float))
            return np.column_stack([1.0 - p1, p1])

    else:

        def predict(x):
            return np.asarray(cond(np.asarray(x, dtype=float)), dtype=float)[:, None]

    return GroupOracle(predict=predict, density=_uniform_density)


class ToySampler:
    """Draws per-group datasets for a toy, or builds quadrature datasets.

    ``sampler(n, rng)`` returns ``n`` samples per group. ``sampler.exact()``
    returns Gauss-Legendre weighted collections whose weighted means equal
    population expectations up to quadrature error.
    """

    def __init__(self, spec: ToySpec):
        self.spec = spec

    def __call__(self, n: int, rng) -> list:
        out = []
        for cond in self.spec.conditionals:
            x = rng.random(n)
            if self.spec.classification:
                y = (rng.random(n) < cond(x)).astype(np.int64)
            else:
                y = np.asarray(cond(x), dtype=float)
            out.append(Samples(x, y))
        return out

    def exact(self, n_nodes: int = 256) -> list:
        nodes, wts = np.polynomial.legendre.leggauss(n_nodes)
        x = 0.5 * (nodes + 1.0)
        w = 0.5 * wts
        out = []
        for cond in self.spec.conditionals:
            p = np.asarray(cond(x), dtype=float)
            if self.spec.classification:
                xs = np.concatenate([x, x])
                ys = np.concatenate([np.zeros(n_nodes, np.int64), np.ones(n_nodes, np.int64)])
                out.append(Samples(xs, ys, weights=np.concatenate([w * (1 - p), w * p])))
            else:
                out.append(Samples(x, p, weights=w))
        return out


def toy_oracles(family: str, variant: str, shift_mode: str = "no_shift"):
    """Exact oracles and a sampler for a cosine toy."""
    spec = toy_spec(family, variant)
    oracles = [_toy_oracle(c, spec.classification) for c in spec.conditionals]
    return GroupOracleSet(oracles, shift_mode), ToySampler(spec)
