"""Entropic mirror ascent on the MixMax objective."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .objective import MixMaxProblem
from .simplex import check_weights, mirror_ascent_step, uniform


@dataclass(frozen=True)
class SolverConfig:
    step_size: float = 2.0
    n_steps: int = 10
    batch_size: int | None = None
    convergence_tol: float = 0.01
    seed: int = 0
    early_stop: bool = False

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError(f"step size must be positive, got {self.step_size}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"number of steps must be a positive integer, got {self.n_steps}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch size must be positive")
        if self.convergence_tol < 0:
            raise ValueError("convergence tolerance must be nonnegative")


@dataclass
class SolveReport:
    """Result of a solve.

    ``trajectory`` holds ``(step, weights, objective)`` starting at step 0
    (the initial weights). ``converged_at`` is the first step whose objective
    moved by at most the tolerance, or ``None``.
    """

    weights: np.ndarray
    trajectory: list
    converged: bool
    steps_taken: int
    converged_at: int | None = None
    grad_norms: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    proxies: object = None

    @property
    def objectives(self) -> np.ndarray:
        return np.array([obj for _, _, obj in self.trajectory])

    @property
    def final_objective(self) -> float:
        return float(self.trajectory[-1][2])

    @property
    def last_change(self) -> float:
        obj = self.objectives
        return float(abs(obj[-1] - obj[-2])) if len(obj) > 1 else float("nan")

    def to_dict(self) -> dict:
        return {
            "weights": [float(v) for v in self.weights],
            "converged": self.converged,
            "converged_at": self.converged_at,
            "steps_taken": self.steps_taken,
            "trajectory": [
                {"step": s, "weights": [float(v) for v in w], "objective": float(o)}
                for s, w, o in self.trajectory
            ],
            "grad_norms": [float(g) for g in self.grad_norms],
            "meta": self.meta,
        }


def _checked_objective(problem, lam, step):
    value = problem.objective(lam)
    if not np.isfinite(value):
        raise FloatingPointError(f"objective is {value} at step {step}, weights {lam}")
    return value


def solve(problem: MixMaxProblem, config: SolverConfig, init=None) -> SolveReport:
    """Run ``config.n_steps`` mirror ascent steps from uniform (or ``init``) weights.

    Convergence is recorded the first time successive objectives differ by
    at most ``config.convergence_tol``; iteration continues to ``n_steps``
    unless ``config.early_stop`` is set.
    """
    rng = np.random.default_rng(config.seed)
    lam = uniform(problem.k) if init is None else check_weights(init, problem.k)
    value = _checked_objective(problem, lam, 0)
    trajectory = [(0, lam.copy(), value)]
    grad_norms = []
    converged_at = None
    step = 0
    for step in range(1, config.n_steps + 1):
        if config.batch_size is None:
            grad = problem.gradient(lam)
        else:
            grad = problem.minibatch_gradient(lam, config.batch_size, rng)
        grad_norms.append(float(np.linalg.norm(grad)))
        lam = mirror_ascent_step(lam, grad, config.step_size)
        new_value = _checked_objective(problem, lam, step)
        trajectory.append((step, lam.copy(), new_value))
        if converged_at is None and abs(new_value - value) <= config.convergence_tol:
            converged_at = step
        value = new_value
        if config.early_stop and converged_at is not None:
            break
    return SolveReport(
        weights=lam,
        trajectory=trajectory,
        converged=converged_at is not None,
        steps_taken=step,
        converged_at=converged_at,
        grad_norms=grad_norms,
    )
