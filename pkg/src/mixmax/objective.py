"""Empirical MixMax objective and its gradient estimators.

``MixMaxProblem`` queries every oracle once on every sample and keeps the
results, so the objective and its gradient are cheap to re-evaluate at many
weights (solver steps, grid search, finite differences).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .losses import EPS, check_loss_kind
from .mixture import DegeneratePointError, GroupOracleSet
from .simplex import check_weights


@dataclass
class Samples:
    """One group's labeled samples.

    ``x`` holds covariates (first axis indexes samples), ``y`` holds class
    labels, regression targets, or padded token sequences (pad value -1).
    ``weights`` are optional nonnegative sample weights; they are normalized
    per group, so a weighted collection can represent a population exactly.
    ``strata`` optionally labels samples for stratified splitting.
    """

    x: np.ndarray
    y: np.ndarray
    weights: np.ndarray | None = None
    strata: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x)
        self.y = np.asarray(self.y)
        if len(self.x) != len(self.y):
            raise ValueError(f"{len(self.x)} covariates but {len(self.y)} targets")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.weights.shape != (len(self.y),) or np.any(self.weights < 0):
                raise ValueError("sample weights must be a nonnegative vector, one per sample")
        if self.strata is not None:
            self.strata = np.asarray(self.strata)

    def __len__(self) -> int:
        return len(self.y)

    def subset(self, idx) -> "Samples":
        idx = np.asarray(idx)
        return Samples(
            self.x[idx],
            self.y[idx],
            None if self.weights is None else self.weights[idx],
            None if self.strata is None else self.strata[idx],
        )

    def normalized_weights(self) -> np.ndarray:
        if self.weights is None:
            return np.full(len(self), 1.0 / len(self))
        total = self.weights.sum()
        if not total > 0:
            raise ValueError("sample weights sum to zero")
        return self.weights / total


@dataclass
class MixMaxProblem:
    """Objective ``sum_p lam_p E_{D_p}[loss(f_lam(x), y)]`` for fixed data and oracles."""

    datasets: Sequence[Samples]
    oracle_set: GroupOracleSet
    loss: str = "cross_entropy"

    def __post_init__(self):
        check_loss_kind(self.loss)
        self.datasets = list(self.datasets)
        self.k = len(self.oracle_set)
        if len(self.datasets) != self.k:
            raise ValueError(f"{len(self.datasets)} datasets for {self.k} oracles")
        for p, d in enumerate(self.datasets):
            if len(d) == 0:
                raise ValueError(f"group {p} has no samples")
        self.sizes = np.array([len(d) for d in self.datasets])
        self.offsets = np.concatenate([[0], np.cumsum(self.sizes)])
        self.owner = np.repeat(np.arange(self.k), self.sizes)
        self.sample_weights = np.concatenate([d.normalized_weights() for d in self.datasets])
        self._evaluate_oracles()

    def _evaluate_oracles(self):
        oracles = self.oracle_set.oracles
        shift = self.oracle_set.covariate_shift
        if shift:
            self.dens = np.concatenate(
                [self.oracle_set.density_matrix(d.x) for d in self.datasets], axis=1
            )
        else:
            self.dens = None
        if self.loss == "cross_entropy":
            self.probs = np.concatenate(
                [np.stack([o.label_probs(d.x, d.y) for o in oracles]) for d in self.datasets],
                axis=1,
            )
            self.weighted_probs = self.dens * self.probs if shift else None
        else:
            outs, targets = [], []
            for d in self.datasets:
                group_out = np.stack([o.outputs(d.x) for o in oracles])
                y = np.asarray(d.y, dtype=float).reshape(len(d), -1)
                if group_out.shape[2] != y.shape[1]:
                    raise ValueError("regression target arity differs from oracle output")
                outs.append(group_out)
                targets.append(y)
            self.outs = np.concatenate(outs, axis=1)
            self.targets = np.concatenate(targets, axis=0)

    def _degenerate(self, flat_index: int):
        p = int(self.owner[flat_index])
        i = flat_index - self.offsets[p]
        raise DegeneratePointError(self.datasets[p].x[i])

    def _mix_total(self, lam, dens, idx=None):
        total = lam @ dens
        bad = np.flatnonzero(~(total > 0))
        if bad.size:
            self._degenerate(int(bad[0] if idx is None else idx[bad[0]]))
        return total

    def _terms(self, lam, idx=None):
        """Per-sample loss and its partials through the predictor.

        Returns ``(loss, d)`` with ``loss`` of shape ``(n,)`` and ``d[q, i]`` the
        derivative of sample ``i``'s loss in ``lam_q`` holding the group
        weight fixed. Without covariate shift the predictor is taken as
        ``sum_p lam_p f_p / sum_p lam_p``, so its partial is ``f_q - f_lam``;
        on the simplex this is the same function, and the gradient only moves
        by a constant shared by every component.
        """
        sel = slice(None) if idx is None else idx
        dens = None if self.dens is None else self.dens[:, sel]
        if self.loss == "cross_entropy":
            probs = self.probs[:, sel]
            if dens is None:
                o = lam @ probs
                do = probs - o
            else:
                total = self._mix_total(lam, dens, idx)
                o = (lam @ self.weighted_probs[:, sel]) / total
                do = dens * (probs - o) / total
            live = o > EPS
            oc = np.where(live, o, EPS)
            return -np.log(oc), do * np.where(live, -1.0 / oc, 0.0)
        outs = self.outs[:, sel]
        y = self.targets[sel]
        if dens is None:
            f = np.einsum("k,knm->nm", lam, outs)
            df = outs - f[None]
        else:
            total = self._mix_total(lam, dens, idx)
            f = np.einsum("k,kn,knm->nm", lam, dens, outs) / total[:, None]
            df = dens[:, :, None] * (outs - f[None]) / total[None, :, None]
        resid = f - y
        return np.sum(resid**2, axis=1), 2.0 * np.einsum("knm,nm->kn", df, resid)

    def group_losses(self, weights) -> np.ndarray:
        """Mean loss of the mixture predictor on each group's data."""
        lam = check_weights(weights, self.k)
        loss, _ = self._terms(lam)
        return np.bincount(self.owner, self.sample_weights * loss, minlength=self.k)

    def objective(self, weights) -> float:
        lam = check_weights(weights, self.k)
        return float(lam @ self.group_losses(lam))

    def gradient(self, weights) -> np.ndarray:
        """Exact gradient of :meth:`objective` in the weights (full data)."""
        lam = check_weights(weights, self.k)
        return self._gradient(lam, None, self.sample_weights)

    def _gradient(self, lam, idx, w):
        loss, d = self._terms(lam, idx)
        owner = self.owner if idx is None else self.owner[idx]
        direct = np.bincount(owner, w * loss, minlength=self.k)
        return direct + d @ (lam[owner] * w)

    def sample_batch(self, batch_size: int, rng) -> np.ndarray:
        """Flat indices of ``batch_size`` draws with replacement from every group."""
        if batch_size < 1:
            raise ValueError("batch size must be at least 1")
        parts = []
        for p, d in enumerate(self.datasets):
            if d.weights is None:
                local = rng.integers(0, len(d), size=batch_size)
            else:
                local = rng.choice(len(d), size=batch_size, p=d.normalized_weights())
            parts.append(self.offsets[p] + local)
        return np.concatenate(parts)

    def minibatch_gradient(self, weights, batch_size: int, rng, indices=None) -> np.ndarray:
        """Gradient estimate from ``batch_size`` resampled points per group.

        ``indices`` overrides the sampling with explicit flat indices (each
        group's points weighted uniformly); passing every index reproduces
        the unweighted full-data gradient.
        """
        lam = check_weights(weights, self.k)
        idx = self.sample_batch(batch_size, rng) if indices is None else np.asarray(indices)
        counts = np.bincount(self.owner[idx], minlength=self.k)
        if np.any(counts == 0):
            raise ValueError("every group needs at least one point in the batch")
        w = 1.0 / counts[self.owner[idx]]
        return self._gradient(lam, idx, w)

    def objective_many(self, weight_rows, chunk_elems: int = 2_000_000) -> np.ndarray:
        """Objective at each row of a ``(G, K)`` array of weights."""
        lams = np.atleast_2d(np.asarray(weight_rows, dtype=float))
        n = len(self.owner)
        per_row = n * (1 if self.loss == "cross_entropy" else self.outs.shape[2])
        step = max(1, chunk_elems // max(per_row, 1))
        out = np.empty(len(lams))
        for start in range(0, len(lams), step):
            block = lams[start : start + step]
            out[start : start + step] = self._objective_block(block)
        return out

    def _objective_block(self, lams):
        if self.dens is not None:
            total = lams @ self.dens
            bad = np.argwhere(~(total > 0))
            if bad.size:
                self._degenerate(int(bad[0, 1]))
        if self.loss == "cross_entropy":
            if self.dens is None:
                o = lams @ self.probs
            else:
                o = (lams @ self.weighted_probs) / total
            loss = -np.log(np.maximum(o, EPS))
        else:
            if self.dens is None:
                f = np.einsum("gk,knm->gnm", lams, self.outs)
            else:
                f = np.einsum("gk,kn,knm->gnm", lams, self.dens, self.outs) / total[:, :, None]
            loss = np.sum((f - self.targets[None]) ** 2, axis=2)
        return np.sum(loss * lams[:, self.owner] * self.sample_weights, axis=1)


def mixmax_objective(weights, datasets, oracle_set, loss="cross_entropy") -> float:
    return MixMaxProblem(datasets, oracle_set, loss).objective(weights)


def emixmax_gradient(weights, datasets, oracle_set, loss="cross_entropy") -> np.ndarray:
    return MixMaxProblem(datasets, oracle_set, loss).gradient(weights)


def minibatch_gradient(weights, datasets, oracle_set, loss, batch_size, rng) -> np.ndarray:
    return MixMaxProblem(datasets, oracle_set, loss).minibatch_gradient(weights, batch_size, rng)
