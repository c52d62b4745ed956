"""Fixed mixture-weight baselines."""

from __future__ import annotations

import numpy as np

from .simplex import check_weights, uniform


def balanced_weights(k: int) -> np.ndarray:
    return uniform(k)


def single_group_weights(k: int, index: int) -> np.ndarray:
    """Vertex of the simplex putting all mass on one group."""
    if not 0 <= index < k:
        raise ValueError(f"group index {index} out of range for {k} groups")
    w = np.zeros(k)
    w[index] = 1.0
    return w


def resolve_baseline(name: str, k: int, mixmax_weights=None) -> np.ndarray:
    """Weights for a baseline name: ``balanced``, ``vertex:<i>`` or ``mixmax``."""
    if name == "balanced":
        return balanced_weights(k)
    if name.startswith("vertex:"):
        try:
            index = int(name.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad vertex baseline {name!r}") from None
        return single_group_weights(k, index)
    if name == "mixmax":
        if mixmax_weights is None:
            raise ValueError("mixmax baseline needs solved weights")
        return check_weights(mixmax_weights, k)
    raise ValueError(f"unknown baseline {name!r}")
