"""Cross-entropy and squared error, with gradients in the prediction."""

from __future__ import annotations

import numpy as np

EPS = 1e-12
LOSS_KINDS = ("cross_entropy", "squared_error")


def check_loss_kind(kind: str) -> str:
    if kind not in LOSS_KINDS:
        raise ValueError(f"unknown loss kind {kind!r}; expected one of {LOSS_KINDS}")
    return kind


def _class_probs(o) -> np.ndarray:
    o = np.asarray(o, dtype=float)
    if o.ndim != 1 or o.size < 1:
        raise ValueError("cross-entropy needs a vector of class probabilities")
    if np.any(o < 0) or abs(o.sum() - 1.0) > 1e-9:
        raise ValueError(f"class probabilities must lie on the simplex: {o}")
    return o


def _label(y, m: int) -> int:
    if isinstance(y, (bool, np.bool_)) or int(y) != y:
        raise ValueError(f"label must be an integer, got {y!r}")
    if not 0 <= y < m:
        raise ValueError(f"label {y} out of range for {m} classes")
    return int(y)


def cross_entropy(o, y, eps: float = EPS) -> float:
    """``-log(max(o[y], eps))`` for class probabilities ``o``."""
    o = _class_probs(o)
    y = _label(y, o.size)
    return float(-np.log(max(o[y], eps)))


def squared_error(o, y) -> float:
    o = np.atleast_1d(np.asarray(o, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if o.shape != y.shape:
        raise ValueError(f"arity mismatch: prediction {o.shape}, target {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("regression target must be finite")
    return float(np.sum((o - y) ** 2))


def loss(kind: str, o, y) -> float:
    if check_loss_kind(kind) == "cross_entropy":
        return cross_entropy(o, y)
    return squared_error(o, y)


def loss_output_gradient(kind: str, o, y, eps: float = EPS) -> np.ndarray:
    """Gradient of the loss with respect to the prediction ``o``.

    For cross-entropy this is ``-1/max(o[y], eps)`` at index ``y`` and zero
    elsewhere; for squared error it is ``2 (o - y)``.
    """
    if check_loss_kind(kind) == "cross_entropy":
        o = _class_probs(o)
        y = _label(y, o.size)
        g = np.zeros_like(o)
        g[y] = -1.0 / max(o[y], eps)
        return g
    o = np.atleast_1d(np.asarray(o, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if o.shape != y.shape:
        raise ValueError(f"arity mismatch: prediction {o.shape}, target {y.shape}")
    return 2.0 * (o - y)
