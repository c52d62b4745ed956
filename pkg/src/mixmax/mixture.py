"""Bayes-optimal mixture predictor and its partial derivatives in the weights.

Every function here works on a batch of covariates; single points are a
batch of one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .simplex import check_weights

SHIFT_MODES = ("no_shift", "covariate_shift")


class DegeneratePointError(ValueError):
    """The weighted mixture density vanishes at a queried covariate."""

    def __init__(self, x):
        self.x = x
        super().__init__(f"mixture density is zero at x={x!r}")


@dataclass(frozen=True)
class GroupOracle:
    """Per-group predictor and (optionally) covariate density.

    ``predict`` maps a batch of covariates to an ``(n, m)`` array of outputs
    (class probabilities or regression values). ``density`` maps the batch to
    ``(n,)`` nonnegative values. ``label_prob`` maps ``(xs, ys)`` to the
    probability assigned to each observed label; it is needed when the label
    space is too large to materialize, e.g. whole sequences.
    """

    predict: Callable | None = None
    density: Callable | None = None
    label_prob: Callable | None = None

    @property
    def has_density(self) -> bool:
        return self.density is not None

    def outputs(self, xs) -> np.ndarray:
        if self.predict is None:
            raise TypeError("oracle only provides label probabilities")
        out = np.asarray(self.predict(xs), dtype=float)
        if out.ndim == 1:
            out = out[:, None]
        return out

    def densities(self, xs) -> np.ndarray:
        if self.density is None:
            raise TypeError("oracle has no covariate density")
        d = np.asarray(self.density(xs), dtype=float)
        if np.any(d < 0):
            raise ValueError("covariate density must be nonnegative")
        return d

    def label_probs(self, xs, ys) -> np.ndarray:
        if self.label_prob is not None:
            return np.asarray(self.label_prob(xs, ys), dtype=float)
        probs = self.outputs(xs)
        ys = np.asarray(ys, dtype=int)
        return probs[np.arange(len(ys)), ys]


@dataclass(frozen=True)
class GroupOracleSet:
    oracles: tuple
    shift_mode: str = "no_shift"

    def __init__(self, oracles: Sequence[GroupOracle], shift_mode: str = "no_shift"):
        if shift_mode not in SHIFT_MODES:
            raise ValueError(f"unknown shift mode {shift_mode!r}")
        oracles = tuple(oracles)
        if not oracles:
            raise ValueError("need at least one group oracle")
        if shift_mode == "covariate_shift" and not all(o.has_density for o in oracles):
            raise ValueError("covariate_shift requires a density on every oracle")
        object.__setattr__(self, "oracles", oracles)
        object.__setattr__(self, "shift_mode", shift_mode)

    def __len__(self) -> int:
        return len(self.oracles)

    @property
    def covariate_shift(self) -> bool:
        return self.shift_mode == "covariate_shift"

    def density_matrix(self, xs) -> np.ndarray:
        """``(K, n)`` densities of every group at every covariate."""
        return np.stack([o.densities(xs) for o in self.oracles])


def _mixture_total(weights, dens, xs) -> np.ndarray:
    total = weights @ dens
    bad = np.flatnonzero(~(total > 0))
    if bad.size:
        raise DegeneratePointError(np.asarray(xs)[bad[0]])
    return total


def mixture_density(weights, oracle_set: GroupOracleSet, xs) -> np.ndarray:
    """``sum_p weights_p p(x)`` at each covariate."""
    if not oracle_set.covariate_shift:
        raise TypeError("mixture density is only defined in covariate_shift mode")
    w = check_weights(weights, len(oracle_set))
    return w @ oracle_set.density_matrix(xs)


def mixture_predict(weights, oracle_set: GroupOracleSet, xs) -> np.ndarray:
    """Bayes-optimal prediction for the weighted mixture, shape ``(n, m)``."""
    w = check_weights(weights, len(oracle_set))
    outs = np.stack([o.outputs(xs) for o in oracle_set.oracles])  # (K, n, m)
    if not oracle_set.covariate_shift:
        return np.einsum("k,knm->nm", w, outs)
    dens = oracle_set.density_matrix(xs)
    total = _mixture_total(w, dens, xs)
    return np.einsum("k,kn,knm->nm", w, dens, outs) / total[:, None]


def mixture_label_prob(weights, oracle_set: GroupOracleSet, xs, ys) -> np.ndarray:
    """Mixture probability of each observed label (classification only)."""
    w = check_weights(weights, len(oracle_set))
    probs = np.stack([o.label_probs(xs, ys) for o in oracle_set.oracles])
    if not oracle_set.covariate_shift:
        return w @ probs
    dens = oracle_set.density_matrix(xs)
    total = _mixture_total(w, dens, xs)
    return (w @ (dens * probs)) / total


def mixture_predict_gradient(weights, oracle_set: GroupOracleSet, xs) -> np.ndarray:
    """Raw partials of the mixture prediction in each weight, ``(K, n, m)``.

    Without covariate shift the prediction is linear and the partial in
    ``weights_p`` is ``f_p(x)``. Under covariate shift the quotient rule gives
    ``p(x) (f_p(x) - f_mix(x)) / sum_q weights_q q(x)``.
    """
    w = check_weights(weights, len(oracle_set))
    outs = np.stack([o.outputs(xs) for o in oracle_set.oracles])
    if not oracle_set.covariate_shift:
        return outs
    dens = oracle_set.density_matrix(xs)
    total = _mixture_total(w, dens, xs)
    mixed = np.einsum("k,kn,knm->nm", w, dens, outs) / total[:, None]
    return dens[:, :, None] * (outs - mixed[None]) / total[None, :, None]
