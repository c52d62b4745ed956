"""Mixture weights on the probability simplex and the entropic mirror step."""

from __future__ import annotations

import numpy as np

SUM_TOL = 1e-12


def check_weights(weights, k: int | None = None) -> np.ndarray:
    """Validate a point on the simplex and return it as a float array.

    Raises ``ValueError`` if any entry is negative, the entries do not sum
    to one within ``SUM_TOL`` (scaled by the dimension), or the length
    differs from ``k``.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError(f"mixture weights must be a non-empty vector, got shape {w.shape}")
    if k is not None and w.size != k:
        raise ValueError(f"expected {k} mixture weights, got {w.size}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError(f"mixture weights must be finite and nonnegative: {w}")
    if abs(w.sum() - 1.0) > SUM_TOL * max(1, w.size):
        raise ValueError(f"mixture weights must sum to 1, got {w.sum()!r}")
    return w


def uniform(k: int) -> np.ndarray:
    """Uniform weights 1/k over k groups."""
    if int(k) != k or k < 1:
        raise ValueError(f"number of groups must be a positive integer, got {k}")
    return np.full(int(k), 1.0 / k)


def mirror_ascent_step(weights, grad, step_size: float) -> np.ndarray:
    """One entropic mirror ascent update.

    Multiplies each weight by ``exp(step_size * grad)`` and renormalizes.
    The largest exponent is subtracted first; the normalization makes the
    result independent of that shift.
    """
    w = np.asarray(weights, dtype=float)
    g = np.asarray(grad, dtype=float)
    if g.shape != w.shape:
        raise ValueError(f"gradient shape {g.shape} does not match weights {w.shape}")
    if not np.all(np.isfinite(g)):
        raise FloatingPointError(f"non-finite gradient: {g}")
    if not step_size > 0:
        raise ValueError(f"step size must be positive, got {step_size}")
    z = step_size * g
    z = z - z.max()
    out = w * np.exp(z)
    total = out.sum()
    if not total > 0:
        raise FloatingPointError("mirror step collapsed all weights to zero")
    return out / total


def l1_distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.abs(a - b).sum())


def simplex_grid(k: int, step: float) -> np.ndarray:
    """All points of the simplex whose coordinates are multiples of ``step``.

    Rows come out in lexicographic order, smallest first.
    """
    n = round(1.0 / step)
    if n < 1 or abs(n * step - 1.0) > 1e-9:
        raise ValueError(f"grid step must divide 1, got {step}")
    if k == 1:
        return np.ones((1, 1))
    rows = []

    def fill(prefix, remaining, slots):
        if slots == 1:
            rows.append(prefix + [remaining])
            return
        for i in range(remaining + 1):
            fill(prefix + [i], remaining - i, slots - 1)

    fill([], n, k)
    return np.asarray(rows, dtype=float) / n
