"""Command-line front end.

Subcommands: rss, immunity, bounds, simulate (gaussian | flip), minimax-sim,
train, estimate-rss, phase.  Results go to --out or stdout as JSON (default)
or TSV.  The exit code is 0 only when every requested cell succeeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bounds import (
    BoundQuery,
    lower_bound_general,
    lower_bound_zero_error,
    smooth_margin_bound,
    upper_bound_ni_erm,
)
from .estimate import attach_fit, estimate_report, fit_smooth_margin
from .experiments import (
    MinimaxReportConfig,
    PhaseConfig,
    parse_grid,
    run_minimax_report,
    run_phase_experiment,
)
from .fileio import read_features, read_labels, write_features, write_labels
from .immunity import find_counterexample, is_diagonally_dominant, universal_form_decompose
from .signal import region_masses
from .simplex import FinitePosteriorTriple, TransitionMatrix
from .synth import MinimaxInstanceSpec, UniformFlip, flip_labels, gaussian_mixture, mc_excess_risk
from .trainer import TrainConfig, accuracy, cross_validate


def _emit(args, payload: dict | str) -> None:
    if isinstance(payload, dict):
        text = json.dumps(payload, indent=2) + "\n"
    else:
        text = payload
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.add_argument("--out", default=None)


def _cmd_rss(args) -> int:
    doc = json.loads(Path(args.triple).read_text())
    triple = FinitePosteriorTriple.from_json_dict(doc)
    kappas = [float(v) for v in args.kappa.split(",")] if args.kappa else [0.0]
    report = region_masses(triple, kappas, tie_tol=args.tie_tol)
    _emit(args, report.to_json_dict())
    return 0


def _cmd_immunity(args) -> int:
    rows = json.loads(Path(args.matrix).read_text())
    matrix = TransitionMatrix(rows)
    e_off = universal_form_decompose(matrix, tol=args.tol)
    counter = find_counterexample(matrix, tol=args.tol)
    payload = {
        "diag_dominant": is_diagonally_dominant(matrix, tol=args.tol),
        "universal_form": e_off is not None,
        "e_offdiag": e_off,
        "counterexample": counter.to_list() if counter is not None else None,
    }
    _emit(args, payload)
    return 0


def _cmd_bounds(args) -> int:
    query = BoundQuery(
        epsilon=args.epsilon,
        kappa=args.kappa,
        v_natarajan=args.v,
        n=args.n,
        k=args.k,
        l_level=args.l,
        alpha=args.alpha,
        c_alpha=args.c_alpha,
    )
    which = {
        "upper": upper_bound_ni_erm,
        "lower-zero": lower_bound_zero_error,
        "lower-general": lower_bound_general,
        "smooth": smooth_margin_bound,
    }[args.which]
    _emit(args, which(query).to_json_dict())
    return 0


def _cmd_simulate_gaussian(args) -> int:
    sample = gaussian_mixture(args.n_per_class, seed=args.seed)
    if args.features_out:
        write_features(sample.points, np.float64, args.features_out)
    if args.labels_out:
        write_labels(sample.labels, 2, args.labels_out)
    if args.format == "tsv":
        lines = ["x1\tx2\tlabel"]
        for row, label in zip(sample.points, sample.labels):
            lines.append(f"{row[0]!r}\t{row[1]!r}\t{label}")
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(
            args,
            {
                "points": [[float(a) for a in row] for row in sample.points],
                "labels": [int(v) for v in sample.labels],
            },
        )
    return 0


def _cmd_simulate_flip(args) -> int:
    labels, k = read_labels(args.labels, args.k)
    flipped = flip_labels(labels, UniformFlip(args.rate), k, seed=args.seed)
    out = args.out or "-"
    if out == "-":
        _emit(args, {"labels": [int(v) for v in flipped], "k": k})
    else:
        write_labels(flipped, k, out)
    return 0


def _cmd_minimax_sim(args) -> int:
    spec = MinimaxInstanceSpec(
        variant=args.variant,
        epsilon=args.epsilon,
        kappa=args.kappa,
        v=args.v,
        k=args.k,
        delta=args.delta,
        n_design=args.n_design if args.n_design is not None else args.n,
        c=args.c,
        p=args.p,
        l_level=args.l,
    )
    result = mc_excess_risk(
        spec,
        learner=args.learner,
        n=args.n,
        trials=args.trials,
        seed=args.seed,
        keep_trials=args.format == "tsv",
    )
    if args.format == "tsv":
        lines = ["trial\texcess_risk\tx0\trest"]
        for row in result.per_trial:
            lines.append(
                f"{row['trial']}\t{row['excess_risk']!r}\t{row['x0']!r}\t{row['rest']!r}"
            )
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, result.to_json_dict())
    return 0


def _cmd_train(args) -> int:
    features = read_features(args.features)
    labels, k = read_labels(args.labels, args.k)
    config = TrainConfig(
        loss=args.loss,
        lambda_grid=tuple(float(v) for v in args.lambda_grid.split(",")),
        max_iter_grid=tuple(int(v) for v in args.iter_grid.split(",")),
        folds=args.folds,
        seed=args.seed,
    )
    report = cross_validate(features, labels, config, k=k)
    if args.model_out:
        Path(args.model_out).write_text(json.dumps(report.model.to_json_dict()))
    metrics = report.to_json_dict()
    metrics["train_accuracy"] = accuracy(report.model, features, labels)
    if args.eval_features and args.eval_labels:
        eval_x = read_features(args.eval_features)
        eval_y, _ = read_labels(args.eval_labels, k)
        metrics["eval_accuracy"] = accuracy(report.model, eval_x, eval_y)
    _emit(args, metrics)
    return 0


def _cmd_estimate_rss(args) -> int:
    train_x = read_features(args.train_features)
    clean_y, k = read_labels(args.clean_labels, args.k)
    noisy_y, _ = read_labels(args.noisy_labels, k)
    eval_x = read_features(args.eval_features)
    config = TrainConfig(
        loss=args.loss,
        lambda_grid=tuple(float(v) for v in args.lambda_grid.split(",")),
        max_iter_grid=tuple(int(v) for v in args.iter_grid.split(",")),
        folds=args.folds,
        seed=args.seed,
    )
    report = estimate_report(train_x, clean_y, noisy_y, eval_x, config, k=k)
    try:
        alpha, c_alpha = fit_smooth_margin(
            report, n_for_scoring=args.n_for_scoring, v=args.v, k=k
        )
        report = attach_fit(report, alpha, c_alpha)
    except ValueError as exc:
        sys.stderr.write(f"envelope fit skipped: {exc}\n")
    payload = report.to_json_dict()
    if args.eval_clean_labels:
        # accuracy of both plug-in models against held-out clean labels
        eval_y, _ = read_labels(args.eval_clean_labels, k)
        clean_cv = cross_validate(train_x, clean_y, config, k=k)
        noisy_cv = cross_validate(train_x, noisy_y, config, k=k)
        payload["eval_accuracy_clean_model"] = accuracy(clean_cv.model, eval_x, eval_y)
        payload["eval_accuracy_noisy_model"] = accuracy(noisy_cv.model, eval_x, eval_y)
    _emit(args, payload)
    return 0


def _cmd_phase(args) -> int:
    config = PhaseConfig(
        noise_grid=parse_grid(args.grid),
        trials=args.trials,
        base_seed=args.seed,
        kind=args.kind,
        n_per_class=args.n_per_class,
        n_test_per_class=args.n_test_per_class,
        trainer=TrainConfig(loss=args.loss, folds=args.folds),
        workers=args.workers,
        train_features=args.train_features,
        train_labels=args.train_labels,
        eval_features=args.eval_features,
        eval_labels=args.eval_labels,
    )
    table = run_phase_experiment(config)
    if args.format == "tsv":
        _emit(args, table.to_tsv())
    else:
        _emit(args, table.to_json_dict())
    return 0 if table.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relsignal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rss", help="signal-region report for a triple JSON file")
    _common_flags(p)
    p.add_argument("--triple", required=True)
    p.add_argument("--kappa", default="0", help="comma-separated thresholds")
    p.add_argument("--tie-tol", type=float, default=0.0)
    p.set_defaults(func=_cmd_rss)

    p = sub.add_parser("immunity", help="immunity diagnostics for a matrix JSON file")
    _common_flags(p)
    p.add_argument("--matrix", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_immunity)

    p = sub.add_parser("bounds", help="evaluate a closed-form bound")
    _common_flags(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--c-alpha", type=float, default=None)
    p.add_argument(
        "--which",
        choices=("upper", "lower-zero", "lower-general", "smooth"),
        required=True,
    )
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("simulate", help="data and noise generators")
    sim_sub = p.add_subparsers(dest="generator", required=True)

    g = sim_sub.add_parser("gaussian", help="two-blob Gaussian mixture")
    _common_flags(g)
    g.add_argument("--n-per-class", type=int, default=200)
    g.add_argument("--features-out", default=None)
    g.add_argument("--labels-out", default=None)
    g.set_defaults(func=_cmd_simulate_gaussian)

    g = sim_sub.add_parser("flip", help="uniform label flipping")
    _common_flags(g)
    g.add_argument("--labels", required=True)
    g.add_argument("--rate", type=float, required=True)
    g.add_argument("--k", type=int, default=None)
    g.set_defaults(func=_cmd_simulate_flip)

    p = sub.add_parser("minimax-sim", help="Monte-Carlo excess risk on adversarial instances")
    _common_flags(p)
    p.add_argument("--variant", choices=("zero_error", "general"), default="zero_error")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--n-design", type=int, default=None)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--l", type=float, default=None)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument(
        "--learner",
        choices=("plurality", "random_guess", "noisy_bayes", "clean_bayes"),
        default="plurality",
    )
    p.set_defaults(func=_cmd_minimax_sim)

    p = sub.add_parser("train", help="cross-validated noise-ignorant training")
    _common_flags(p)
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--loss", choices=("cross_entropy", "mae", "sigmoid"), default="cross_entropy")
    p.add_argument("--lambda-grid", default="0.0001,0.001,0.01,0.1,1,10,100")
    p.add_argument("--iter-grid", default="10,20,50,100")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--eval-features", default=None)
    p.add_argument("--eval-labels", default=None)
    p.add_argument("--model-out", default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("estimate-rss", help="empirical signal strength from plug-in posteriors")
    _common_flags(p)
    p.add_argument("--train-features", required=True)
    p.add_argument("--clean-labels", required=True)
    p.add_argument("--noisy-labels", required=True)
    p.add_argument("--eval-features", required=True)
    p.add_argument("--eval-clean-labels", default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--loss", choices=("cross_entropy", "mae", "sigmoid"), default="cross_entropy")
    p.add_argument("--lambda-grid", default="0.0001,0.001,0.01,0.1,1,10,100")
    p.add_argument("--iter-grid", default="10,20,50,100")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--v", type=int, default=10)
    p.add_argument("--n-for-scoring", type=int, default=50000)
    p.set_defaults(func=_cmd_estimate_rss)

    p = sub.add_parser("phase", help="noise-rate sweep with cross-validated training")
    _common_flags(p)
    p.add_argument("--kind", choices=("gaussian", "features"), default="gaussian")
    p.add_argument("--grid", default="0:1:0.05")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--n-per-class", type=int, default=200)
    p.add_argument("--n-test-per-class", type=int, default=2000)
    p.add_argument("--loss", choices=("cross_entropy", "mae", "sigmoid"), default="cross_entropy")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--train-features", default=None)
    p.add_argument("--train-labels", default=None)
    p.add_argument("--eval-features", default=None)
    p.add_argument("--eval-labels", default=None)
    p.set_defaults(func=_cmd_phase)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
