"""Experiment runner: configured trial sweeps written to CSV plus a JSON manifest.

Experiments
-----------
``toy_ce_mirror``, ``toy_ce_shifted``
    Two-group binary cosine toys with cross-entropy.
``toy_l2_a``, ``toy_l2_b``
    Three-group cosine regression toys (third group constant 0.15 or 0.8).
``markov_magnitudes``
    Markov-chain groups swept over Dirichlet magnitudes.
``markov_samples``
    Markov-chain groups swept over samples per length.

CSV columns (fixed for every experiment)::

    experiment, setting, trial, method, lambda_0 .. lambda_{K-1},
    objective, worst_group_loss, worst_group_accuracy, converged, error

``objective`` is the MixMax objective of the row's weights under exact
oracles, evaluated on quadrature nodes for toys, on the held-out test
sequences for ``markov_magnitudes`` and on every enumerated sequence for
``markov_samples``. ``worst_group_loss`` and ``worst_group_accuracy`` come
from the exact mixture predictor on the same evaluation data (accuracy is
blank where there is no class-probability output). ``converged`` is blank
for fixed baselines.

Seeding: trial ``t`` of setting ``s`` uses
``numpy.random.SeedSequence([seed, s, t])``; every row can be replayed from
the manifest alone.
"""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import resolve_baseline
from .estimation import SplitPlan, binned_fitter, e2mixmax, markov_fitter
from .objective import MixMaxProblem
from .solver import SolverConfig, solve
from .synthetic import chain_oracle_set, sample_chain, sample_sequences, toy_oracles
from .verify import population_problem, worst_group_eval

OUTPUT_ENV = "MIXMAX_OUTPUT_DIR"

TOYS = {
    "toy_ce_mirror": ("binary_cosine", "mirror", "cross_entropy"),
    "toy_ce_shifted": ("binary_cosine", "shifted", "cross_entropy"),
    "toy_l2_a": ("regression_cosine", "a", "squared_error"),
    "toy_l2_b": ("regression_cosine", "b", "squared_error"),
}
EXPERIMENTS = tuple(TOYS) + ("markov_magnitudes", "markov_samples")

# defaults for each experiment; anything in the config file overrides these
DEFAULTS = {
    "toy_ce_mirror": {"samples_per_group": 10000, "solver": {"step_size": 0.5, "n_steps": 100}},
    "toy_ce_shifted": {"samples_per_group": 10000, "solver": {"step_size": 0.5, "n_steps": 100}},
    "toy_l2_a": {"samples_per_group": 10000, "solver": {"step_size": 2.0, "n_steps": 100}},
    "toy_l2_b": {"samples_per_group": 10000, "solver": {"step_size": 2.0, "n_steps": 100}},
    "markov_magnitudes": {
        "magnitudes": [1.0, 3.0, 5.0, 7.0, 10.0],
        "samples_per_length": 800,
        "methods": ["mixmax", "e2mixmax:split:0.75", "e2mixmax:data_reuse"],
        "baselines": ["balanced"],
    },
    "markov_samples": {
        "magnitudes": [1.0],
        "samples_per_length": [100, 200, 400, 800, 1600, 3200],
        "methods": [
            "mixmax",
            "e2mixmax:split:0.75",
            "e2mixmax:split:0.5",
            "e2mixmax:split:0.25",
            "e2mixmax:data_reuse",
        ],
        "baselines": ["balanced"],
    },
}


@dataclass
class ExperimentConfig:
    experiment: str
    trials: int = 15
    seed: int = 0
    n_groups: int = 3
    vocab_size: int = 4
    max_length: int = 10
    magnitudes: list = field(default_factory=lambda: [1.0])
    samples_per_length: object = 800
    test_samples_per_length: int = 200
    samples_per_group: int = 10000
    smoothing: float = 0.5
    n_bins: int = 20
    quadrature_nodes: int = 256
    methods: list = field(default_factory=lambda: ["mixmax"])
    baselines: list = field(default_factory=lambda: ["balanced"])
    solver: dict = field(default_factory=dict)
    output: str = "results"

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        name = raw.get("experiment")
        if name not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {name!r}; known: {', '.join(EXPERIMENTS)}")
        merged = json.loads(json.dumps(DEFAULTS[name]))
        for key, value in raw.items():
            if key == "solver":
                merged.setdefault("solver", {}).update(value)
            else:
                merged[key] = value
        known = set(cls.__dataclass_fields__)
        unknown = set(merged) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**merged)
        cfg.solver_config(0)
        for m in cfg.methods:
            _parse_method(m)
        for b in cfg.baselines:
            resolve_baseline(b, cfg.k, np.full(cfg.k, 1.0 / cfg.k))
        if cfg.trials < 1:
            raise ValueError("trials must be at least 1")
        return cfg

    @property
    def k(self) -> int:
        if self.experiment in TOYS:
            return 2 if TOYS[self.experiment][0] == "binary_cosine" else 3
        return self.n_groups

    def solver_config(self, seed: int) -> SolverConfig:
        opts = {"step_size": 2.0, "n_steps": 10}
        opts.update(self.solver)
        return SolverConfig(seed=seed, **opts)

    def settings(self) -> list:
        """``(label, value)`` pairs swept over by the experiment."""
        if self.experiment in TOYS:
            return [("variant=" + TOYS[self.experiment][1], None)]
        if self.experiment == "markov_magnitudes":
            return [(f"magnitude={float(m):g}", float(m)) for m in self.magnitudes]
        sizes = self.samples_per_length
        sizes = sizes if isinstance(sizes, list) else [sizes]
        return [(f"samples_per_length={int(n)}", int(n)) for n in sizes]


def _parse_method(name: str):
    """``mixmax`` or ``e2mixmax:data_reuse`` or ``e2mixmax:split:<ratio>``."""
    if name == "mixmax":
        return None
    parts = name.split(":")
    if parts[0] == "e2mixmax":
        if parts[1:] == ["data_reuse"]:
            return SplitPlan("data_reuse")
        if len(parts) == 3 and parts[1] == "split":
            return SplitPlan("split", float(parts[2]))
    raise ValueError(f"unknown method {name!r}")


def trial_seed(seed: int, setting: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, setting, trial])


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def _row(cfg, label, trial, method, weights, objective, wg, converged, error=""):
    row = {"experiment": cfg.experiment, "setting": label, "trial": trial, "method": method}
    for p in range(cfg.k):
        row[f"lambda_{p}"] = None if weights is None else float(weights[p])
    row["objective"] = objective
    row["worst_group_loss"] = None if wg is None else wg.worst
    row["worst_group_accuracy"] = None if wg is None else wg.worst_accuracy
    row["converged"] = converged
    row["error"] = error
    return row


def _toy_task(cfg, ss):
    family, variant, loss = TOYS[cfg.experiment]
    oracle_set, sampler = toy_oracles(family, variant)
    rng = np.random.default_rng(ss)
    train = sampler(cfg.samples_per_group, rng)
    evaluation = sampler.exact(cfg.quadrature_nodes)
    fitter = binned_fitter(cfg.n_bins, loss)
    return oracle_set, train, evaluation, loss, fitter, None


def _markov_task(cfg, ss, value):
    magnitude = value if cfg.experiment == "markov_magnitudes" else float(cfg.magnitudes[0])
    spl = value if cfg.experiment == "markov_samples" else int(cfg.samples_per_length)
    rng = np.random.default_rng(ss)
    chains = [sample_chain(cfg.vocab_size, magnitude, rng, cfg.max_length) for _ in range(cfg.k)]
    oracle_set = chain_oracle_set(chains)
    train = [sample_sequences(c, spl, rng) for c in chains]
    test = [sample_sequences(c, cfg.test_samples_per_length, rng) for c in chains]
    fitter = markov_fitter(cfg.vocab_size, cfg.max_length, cfg.smoothing)
    pop = population_problem(chains) if cfg.experiment == "markov_samples" else None
    return oracle_set, train, test, "cross_entropy", fitter, pop


def run_trial(cfg: ExperimentConfig, setting_index: int, trial: int) -> list:
    """All rows of one trial; failures become rows carrying the error text."""
    label, value = cfg.settings()[setting_index]
    ss = trial_seed(cfg.seed, setting_index, trial)
    data_ss, solve_ss = ss.spawn(2)
    solve_seed = int(solve_ss.generate_state(1)[0])
    try:
        if cfg.experiment in TOYS:
            oracle_set, train, evaluation, loss, fitter, pop = _toy_task(cfg, data_ss)
        else:
            oracle_set, train, evaluation, loss, fitter, pop = _markov_task(cfg, data_ss, value)
        eval_problem = pop if pop is not None else MixMaxProblem(evaluation, oracle_set, loss)
    except Exception as exc:  # noqa: BLE001
        return [_row(cfg, label, trial, "setup", None, None, None, None, f"{type(exc).__name__}: {exc}")]

    rows = []
    mixmax_weights = None
    for method in cfg.methods:
        try:
            plan = _parse_method(method)
            config = cfg.solver_config(solve_seed)
            if plan is None:
                report = solve(MixMaxProblem(train, oracle_set, loss), config)
                mixmax_weights = report.weights
            else:
                plan = SplitPlan(plan.mode, plan.ratio, seed=solve_seed)
                report = e2mixmax(train, plan, config, fitter, loss)
            wg = worst_group_eval(evaluation, oracle_set, loss, report.weights)
            obj = eval_problem.objective(report.weights)
            rows.append(_row(cfg, label, trial, method, report.weights, obj, wg, report.converged))
        except Exception as exc:  # noqa: BLE001
            rows.append(_row(cfg, label, trial, method, None, None, None, None, f"{type(exc).__name__}: {exc}"))
    for name in cfg.baselines:
        try:
            w = resolve_baseline(name, cfg.k, mixmax_weights)
            wg = worst_group_eval(evaluation, oracle_set, loss, w)
            rows.append(_row(cfg, label, trial, name, w, eval_problem.objective(w), wg, None))
        except Exception as exc:  # noqa: BLE001
            rows.append(_row(cfg, label, trial, name, None, None, None, None, f"{type(exc).__name__}: {exc}"))
    return rows


def _run_task(args):
    cfg, s, t = args
    return run_trial(cfg, s, t)


def run_rows(cfg: ExperimentConfig, workers: int = 1) -> list:
    tasks = [(cfg, s, t) for s in range(len(cfg.settings())) for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_task, tasks))
    else:
        chunks = [_run_task(task) for task in tasks]
    return [row for chunk in chunks for row in chunk]


def rows_to_csv(rows: list, k: int) -> str:
    columns = ["experiment", "setting", "trial", "method"]
    columns += [f"lambda_{p}" for p in range(k)]
    columns += ["objective", "worst_group_loss", "worst_group_accuracy", "converged", "error"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def load_config(path) -> ExperimentConfig:
    """Read an experiment config, or the config stored in a run manifest."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if "config" in raw and "version" in raw:
        raw = raw["config"]
    return ExperimentConfig.from_dict(raw)


def run(cfg: ExperimentConfig, out_dir=None, workers: int = 1) -> tuple:
    """Run an experiment and write ``<experiment>.csv`` and ``<experiment>_manifest.json``.

    Returns the two paths. ``out_dir`` overrides the config's output
    directory, and the ``MIXMAX_OUTPUT_DIR`` environment variable overrides
    both.
    """
    out = Path(os.environ.get(OUTPUT_ENV) or out_dir or cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    rows = run_rows(cfg, workers)
    csv_path = out / f"{cfg.experiment}.csv"
    csv_path.write_text(rows_to_csv(rows, cfg.k), encoding="utf-8")
    seeds = [
        {"setting": label, "trial": t, "entropy": [cfg.seed, s, t]}
        for s, (label, _) in enumerate(cfg.settings())
        for t in range(cfg.trials)
    ]
    manifest = {
        "config": asdict(cfg),
        "seeds": seeds,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "notes": [
            "proxies are smoothed transition estimators (Markov) or binned label "
            "frequencies (toys), not trained neural networks",
            "DoReMi and gradient descent-ascent group DRO baselines are not included",
        ],
    }
    manifest_path = out / f"{cfg.experiment}_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return csv_path, manifest_path
