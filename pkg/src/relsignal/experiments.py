"""Experiment orchestration: noise-rate sweeps and minimax bound reports.

Sweeps fan independent (grid cell, trial) tasks out to a process pool; every
task derives its own random streams from the base seed and its grid
coordinates, so the emitted tables are identical for any worker count.
Failures inside a cell are captured into that cell's row instead of aborting
the sweep; the caller can tell a clean table from a wounded one via
``ResultTable.ok``.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng
from .bounds import BoundQuery, lower_bound_general, lower_bound_zero_error, upper_bound_ni_erm
from .fileio import read_features, read_labels
from .simplex import ValidationError
from .synth import (
    MinimaxInstanceSpec,
    UniformFlip,
    flip_labels,
    gaussian_mixture,
    mc_excess_risk,
)
from .trainer import TrainConfig, accuracy, cross_validate

__all__ = [
    "PhaseConfig",
    "MinimaxReportConfig",
    "ResultTable",
    "run_phase_experiment",
    "run_minimax_report",
]


@dataclass(frozen=True)
class ResultTable:
    """Rows plus per-group summary statistics, in deterministic order."""

    rows: tuple[dict, ...]
    summary: tuple[dict, ...] = ()

    @property
    def ok(self) -> bool:
        return all(row.get("error") is None for row in self.rows)

    def to_json_dict(self) -> dict:
        return {"rows": list(self.rows), "summary": list(self.summary), "ok": self.ok}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    def to_tsv(self) -> str:
        if not self.rows:
            return ""
        cols = list(self.rows[0].keys())
        lines = ["\t".join(cols)]
        for row in self.rows:
            lines.append("\t".join(_tsv_cell(row.get(c)) for c in cols))
        return "\n".join(lines) + "\n"


def _tsv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass(frozen=True)
class PhaseConfig:
    """A noise-rate sweep: flip labels at each rate, train, score accuracy.

    ``kind`` selects synthetic Gaussian mixtures or ingested feature files;
    the latter needs the four file paths and evaluates on the supplied
    held-out split.
    """

    noise_grid: tuple[float, ...]
    trials: int = 5
    base_seed: int = 0
    kind: str = "gaussian"
    n_per_class: int = 200
    n_test_per_class: int = 2000
    trainer: TrainConfig = field(default_factory=TrainConfig)
    workers: int | None = None
    train_features: str | None = None
    train_labels: str | None = None
    eval_features: str | None = None
    eval_labels: str | None = None

    def __post_init__(self):
        if not self.noise_grid:
            raise ValidationError("noise grid must be nonempty")
        if any(not 0.0 <= r <= 1.0 for r in self.noise_grid):
            raise ValidationError("noise rates must lie in [0, 1]")
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if self.kind not in ("gaussian", "features"):
            raise ValidationError(f"unknown experiment kind {self.kind!r}")
        if self.kind == "features":
            missing = [
                name
                for name in ("train_features", "train_labels", "eval_features", "eval_labels")
                if getattr(self, name) is None
            ]
            if missing:
                raise ValidationError(f"feature sweep needs paths for: {missing}")


def _phase_cell(args: tuple) -> dict:
    config, rho_idx, trial = args
    rho = config.noise_grid[rho_idx]
    row = {"rho": rho, "trial": trial, "accuracy": None, "error": None}
    try:
        if config.kind == "gaussian":
            train = gaussian_mixture(
                config.n_per_class,
                seed=rng.spawn_seed(config.base_seed, "phase-train", rho_idx, trial),
            )
            test = gaussian_mixture(
                config.n_test_per_class,
                seed=rng.spawn_seed(config.base_seed, "phase-test", rho_idx, trial),
            )
            x_train, y_clean = train.points, train.labels
            x_eval, y_eval = test.points, test.labels
            k = 2
        else:
            x_train = read_features(config.train_features)
            y_clean, k = read_labels(config.train_labels)
            x_eval = read_features(config.eval_features)
            y_eval, _ = read_labels(config.eval_labels, k)
        noisy = flip_labels(
            y_clean,
            UniformFlip(rho),
            k,
            seed=rng.spawn_seed(config.base_seed, "phase-flip", rho_idx, trial),
        )
        cv_config = TrainConfig(
            loss=config.trainer.loss,
            lambda_grid=config.trainer.lambda_grid,
            max_iter_grid=config.trainer.max_iter_grid,
            folds=config.trainer.folds,
            seed=rng.spawn_seed(config.base_seed, "phase-cv", rho_idx, trial),
            grad_tol=config.trainer.grad_tol,
        )
        report = cross_validate(x_train, noisy, cv_config, k=k)
        row["accuracy"] = accuracy(report.model, x_eval, y_eval)
        row["lambda"] = report.chosen_lambda
        row["max_iter"] = report.chosen_max_iter
    except Exception as exc:  # per-cell capture: sweeps outlive isolated failures
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _run_tasks(tasks: list[tuple], worker, workers: int | None) -> list[dict]:
    if workers is not None and workers <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks))


def run_phase_experiment(config: PhaseConfig) -> ResultTable:
    """Accuracy of the cross-validated trainer at each noise rate and trial."""
    tasks = [
        (config, rho_idx, trial)
        for rho_idx in range(len(config.noise_grid))
        for trial in range(config.trials)
    ]
    rows = _run_tasks(tasks, _phase_cell, config.workers)
    summary = []
    for rho_idx, rho in enumerate(config.noise_grid):
        cell_rows = rows[rho_idx * config.trials : (rho_idx + 1) * config.trials]
        accs = [r["accuracy"] for r in cell_rows if r["accuracy"] is not None]
        summary.append(
            {
                "rho": rho,
                "mean_accuracy": float(np.mean(accs)) if accs else None,
                "std_accuracy": float(np.std(accs)) if accs else None,
                "failures": sum(1 for r in cell_rows if r["error"] is not None),
            }
        )
    return ResultTable(rows=tuple(rows), summary=tuple(summary))


@dataclass(frozen=True)
class MinimaxReportConfig:
    """Analytic bounds tabulated against Monte-Carlo excess risk per cell.

    Each cell is a mapping with epsilon, kappa, v, k, n and optionally
    l_level; the Monte-Carlo column simulates the zero-error adversarial
    instance with the given learner.
    """

    cells: tuple[dict, ...]
    learner: str = "plurality"
    trials: int = 2000
    base_seed: int = 0
    delta: float = 1e-6
    workers: int | None = None

    def __post_init__(self):
        if not self.cells:
            raise ValidationError("cell grid must be nonempty")


def _minimax_cell(args: tuple) -> dict:
    config, cell_idx = args
    cell = dict(config.cells[cell_idx])
    row = dict(cell)
    row.update({"error": None})
    try:
        query = BoundQuery(
            epsilon=cell["epsilon"],
            kappa=cell["kappa"],
            v_natarajan=cell["v"],
            n=cell["n"],
            k=cell["k"],
            l_level=cell.get("l_level"),
        )
        lower_zero = lower_bound_zero_error(query)
        row["lower_zero"] = lower_zero.value
        row["lower_zero_valid"] = lower_zero.valid
        if cell.get("l_level") is not None:
            general = lower_bound_general(query)
            row["lower_general"] = general.value
            row["lower_general_valid"] = general.valid
        else:
            row["lower_general"] = None
            row["lower_general_valid"] = None
        row["upper"] = upper_bound_ni_erm(query).value
        spec = MinimaxInstanceSpec(
            variant="zero_error",
            epsilon=cell["epsilon"],
            kappa=cell["kappa"],
            v=cell["v"],
            k=cell["k"],
            delta=config.delta,
            n_design=cell["n"],
        )
        result = mc_excess_risk(
            spec,
            learner=config.learner,
            n=cell["n"],
            trials=config.trials,
            seed=rng.spawn_seed(config.base_seed, "minimax", cell_idx),
        )
        row["mc_mean"] = result.mean
        row["mc_stderr"] = result.stderr
        row["mc_x0_mean"] = result.region_breakdown["x0"]["mean"]
        row["mc_rest_mean"] = result.region_breakdown["rest"]["mean"]
        # the simulation must not contradict the analytic floor
        row["lower_consistent"] = result.mean + 3 * result.stderr >= lower_zero.value
        # recorded, not asserted: the upper bound presumes the noisy Bayes
        # rule lies in the fitted class
        row["upper_covers"] = row["upper"] >= result.mean - 3 * result.stderr
    except Exception as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_minimax_report(config: MinimaxReportConfig) -> ResultTable:
    """Analytic versus simulated excess risk across the parameter grid."""
    tasks = [(config, i) for i in range(len(config.cells))]
    rows = _run_tasks(tasks, _minimax_cell, config.workers)
    return ResultTable(rows=tuple(rows))


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse '0:1:0.05' (start:stop:step, inclusive) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"grid spec must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValidationError("grid step must be positive")
        count = int(round((stop - start) / step)) + 1
        return tuple(round(start + i * step, 10) for i in range(count))
    return tuple(float(p) for p in text.split(","))
