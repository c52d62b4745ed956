"""Proxy models and the empirical-squared pipeline.

When the true group predictors are unknown they are replaced by models fit
on part of the data (or on all of it, with data reuse), and the mirror
ascent is run on the remaining part.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .mixture import GroupOracle, GroupOracleSet
from .objective import MixMaxProblem, Samples
from .solver import SolveReport, SolverConfig, solve
from .synthetic import PAD, MarkovChainSpec, chain_as_oracle


def fit_markov_proxy(
    samples: Samples, vocab_size: int, max_length: int, smoothing: float = 0.5
) -> MarkovChainSpec:
    """Additively smoothed transition and first-token frequencies."""
    if vocab_size < 1:
        raise ValueError("vocabulary size must be positive")
    if smoothing < 0:
        raise ValueError("smoothing must be nonnegative")
    seqs = np.asarray(samples.y, dtype=np.int64)
    if len(seqs) == 0:
        raise ValueError("cannot fit a proxy on zero sequences")
    w = np.ones(len(seqs)) if samples.weights is None else samples.weights
    first = seqs[:, 0]
    pi_counts = np.bincount(first, weights=w, minlength=vocab_size)
    src, dst = seqs[:, :-1], seqs[:, 1:]
    live = (src != PAD) & (dst != PAD)
    rows = np.broadcast_to(w[:, None], src.shape)[live]
    t_counts = np.zeros((vocab_size, vocab_size))
    np.add.at(t_counts, (src[live], dst[live]), rows)
    t_counts += smoothing
    totals = t_counts.sum(axis=1, keepdims=True)
    if np.any(totals == 0):
        unseen = np.flatnonzero(totals[:, 0] == 0).tolist()
        raise ValueError(f"no transitions observed from states {unseen} and smoothing is 0")
    pi = (pi_counts + smoothing) / (pi_counts.sum() + vocab_size * smoothing)
    return MarkovChainSpec(t_counts / totals, pi / pi.sum(), max_length)


@dataclass(frozen=True)
class KdeModel:
    points: np.ndarray
    bandwidth: np.ndarray

    def to_dict(self) -> dict:
        return {"points": self.points.tolist(), "bandwidth": self.bandwidth.tolist()}


def fit_kde(points) -> KdeModel:
    """Product Gaussian kernel with Scott's bandwidth per dimension.

    ``h_j = std_j * n ** (-1 / (d + 4))`` using the unbiased standard
    deviation.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n, d = pts.shape
    if n < 2:
        raise ValueError("need at least two points to fit a KDE")
    sd = pts.std(axis=0, ddof=1)
    if np.any(sd == 0):
        raise ValueError(f"zero variance in covariate dimensions {np.flatnonzero(sd == 0).tolist()}")
    return KdeModel(pts, sd * n ** (-1.0 / (d + 4)))


def kde_density(model: KdeModel, x) -> np.ndarray:
    """Density at each query point (``(m,)`` or ``(m, d)``)."""
    q = np.asarray(x, dtype=float)
    d = model.points.shape[1]
    q = q.reshape(-1, d)
    h = model.bandwidth
    out = np.empty(len(q))
    norm = np.prod(h) * (2 * np.pi) ** (d / 2)
    step = max(1, 4_000_000 // max(1, model.points.size))
    for start in range(0, len(q), step):
        z = (q[start : start + step, None, :] - model.points[None]) / h
        out[start : start + step] = np.exp(-0.5 * np.sum(z * z, axis=2)).mean(axis=1)
    return out / norm


def fit_binned_predictor(
    samples: Samples, n_bins: int = 20, kind: str = "cross_entropy",
    n_classes: int = 2, smoothing: float = 1.0, low: float = 0.0, high: float = 1.0,
) -> GroupOracle:
    """Piecewise-constant predictor for one-dimensional covariates.

    Classification bins hold smoothed label frequencies; regression bins
    hold the mean target (falling back to the global mean for empty bins).
    """
    x = np.asarray(samples.x, dtype=float).ravel()
    edges = np.linspace(low, high, n_bins + 1)

    def bin_of(v):
        return np.clip(np.searchsorted(edges, np.asarray(v, dtype=float), side="right") - 1, 0, n_bins - 1)

    b = bin_of(x)
    if kind == "cross_entropy":
        y = np.asarray(samples.y, dtype=np.int64)
        counts = np.zeros((n_bins, n_classes))
        np.add.at(counts, (b, y), 1.0)
        counts += smoothing
        table = counts / counts.sum(axis=1, keepdims=True)
    else:
        y = np.asarray(samples.y, dtype=float).reshape(len(x), -1)
        sums = np.zeros((n_bins, y.shape[1]))
        np.add.at(sums, b, y)
        n = np.bincount(b, minlength=n_bins)[:, None]
        table = np.where(n > 0, sums / np.maximum(n, 1), y.mean(axis=0))

    return GroupOracle(predict=lambda v: table[bin_of(np.ravel(v))])


def markov_fitter(vocab_size: int, max_length: int, smoothing: float = 0.5) -> Callable:
    def fit(samples: Samples) -> GroupOracle:
        return chain_as_oracle(fit_markov_proxy(samples, vocab_size, max_length, smoothing))

    return fit


def binned_fitter(n_bins: int = 20, kind: str = "cross_entropy", **kwargs) -> Callable:
    def fit(samples: Samples) -> GroupOracle:
        return fit_binned_predictor(samples, n_bins, kind, **kwargs)

    return fit


# ---------------------------------------------------------------------------
# splitting


@dataclass(frozen=True)
class SplitPlan:
    """``mode`` is ``"split"`` (``ratio`` of each group fits the proxy) or ``"data_reuse"``."""

    mode: str = "split"
    ratio: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("split", "data_reuse"):
            raise ValueError(f"unknown split mode {self.mode!r}")
        if self.mode == "split" and not 0 < self.ratio < 1:
            raise ValueError(f"split ratio must lie in (0, 1), got {self.ratio}")

    @property
    def label(self) -> str:
        if self.mode == "data_reuse":
            return "data_reuse"
        a = round(100 * self.ratio)
        return f"split_{a}_{100 - a}"


def split_samples(samples: Samples, ratio: float, rng) -> tuple:
    """Random (proxy, gradient) partition, stratified by ``samples.strata`` if set."""
    strata = np.zeros(len(samples), dtype=int) if samples.strata is None else samples.strata
    first, second = [], []
    for s in np.unique(strata):
        idx = np.flatnonzero(strata == s)
        idx = idx[rng.permutation(len(idx))]
        cut = int(round(ratio * len(idx)))
        first.append(np.sort(idx[:cut]))
        second.append(np.sort(idx[cut:]))
    a, b = np.concatenate(first), np.concatenate(second)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("split produced an empty part")
    return samples.subset(a), samples.subset(b)


def _with_density(oracle: GroupOracle, model: KdeModel) -> GroupOracle:
    return GroupOracle(
        predict=oracle.predict,
        density=lambda x: kde_density(model, x),
        label_prob=oracle.label_prob,
    )


def fit_proxies(datasets: Sequence[Samples], fit_oracle: Callable, shift_mode: str = "no_shift") -> GroupOracleSet:
    oracles = []
    for d in datasets:
        o = fit_oracle(d)
        if shift_mode == "covariate_shift":
            o = _with_density(o, fit_kde(d.x))
        oracles.append(o)
    return GroupOracleSet(oracles, shift_mode)


def e2mixmax(
    datasets: Sequence[Samples],
    plan: SplitPlan,
    config: SolverConfig,
    fit_oracle: Callable,
    loss: str = "cross_entropy",
    shift_mode: str = "no_shift",
) -> SolveReport:
    """Fit proxies on one part of each group and run mirror ascent on the other.

    With ``plan.mode == "data_reuse"`` both steps use all the data. Under
    covariate shift a KDE density is fit next to each proxy predictor.
    The fitted oracle set is attached as ``report.proxies``.
    """
    if plan.mode == "data_reuse":
        proxy_parts = grad_parts = list(datasets)
    else:
        # every group restarts from the plan's seed, so equal-sized groups share a partition
        pairs = [split_samples(d, plan.ratio, np.random.default_rng(plan.seed)) for d in datasets]
        proxy_parts = [p for p, _ in pairs]
        grad_parts = [g for _, g in pairs]
    proxies = fit_proxies(proxy_parts, fit_oracle, shift_mode)
    report = solve(MixMaxProblem(grad_parts, proxies, loss), config)
    report.meta.update({
        "plan": plan.label,
        "proxy_sizes": [len(p) for p in proxy_parts],
        "gradient_sizes": [len(g) for g in grad_parts],
    })
    report.proxies = proxies
    return report
