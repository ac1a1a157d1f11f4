"""Command-line front end: ``gkdr fit | cv | bench | eval``.

Exit codes: 0 success, 1 parse/IO failure, 2 invalid configuration,
3 numerical failure.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .data import SYNTHETIC, load_csv, standardize, train_test_split
from .errors import ConfigError, DataError, GkdrError
from .estimators import GkdrConfig, LowRankConfig, fit, normalize_method, project
from .evaluation import classification_error, run_synthetic_benchmark, subspace_error
from .kernels import KernelSpec, median_heuristic, output_median
from .model_selection import (CVConfig, cross_validate, default_multipliers, knn_predict,
                              prediction_error)

log = logging.getLogger("gkdr")

SCHEMA_VERSION = 1
LOW_RANK_AUTO_N = 2000


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def write_matrix_csv(path, A):
    """Headerless CSV, shortest round-trip decimal for every entry."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    with Path(path).open("w", encoding="utf-8") as fh:
        for row in A:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix_csv(path):
    try:
        A = np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read matrix from {path}: {exc}") from exc
    return A


def write_report(path, report):
    text = json.dumps(report, indent=2, allow_nan=False)
    if path is None or str(path) == "-":
        print(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text + "\n", encoding="utf-8")


def _report(command, config, seed, metrics, timings, **extra):
    report = {"schema_version": SCHEMA_VERSION, "gkdr_version": __version__,
              "command": command, "config": config, "seed": seed,
              "metrics": metrics, "timings": timings}
    report.update(extra)
    return report


# -- argument groups ------------------------------------------------------------

def _add_data_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--synth", choices=sorted(SYNTHETIC), help="synthetic dataset")
    src.add_argument("--input", type=Path, help="CSV file with a header row")
    p.add_argument("--n", type=int, default=200, help="synthetic sample size")
    p.add_argument("--label", help="name of the response/label column (CSV input)")
    p.add_argument("--task", choices=("classification", "regression"),
                   help="default: classification for CSV, regression for synthetic")
    p.add_argument("--no-standardize", action="store_true",
                   help="do not z-score CSV feature columns")


def _add_method_args(p):
    p.add_argument("--d", type=int, required=True, help="target dimension")
    p.add_argument("--method", default="gkdr", help="gkdr, gkdr-i or gkdr-v")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--low-rank", action="store_true",
                   help=f"use incomplete Cholesky factors (automatic when n > {LOW_RANK_AUTO_N})")
    p.add_argument("--ichol-tol", type=float, default=1e-6)
    p.add_argument("--max-rank", type=int)
    p.add_argument("--schedule", type=_ints, help="gkdr-i dimensions, e.g. 6,4,3,2,1")
    p.add_argument("--block-size", type=int, help="gkdr-v block size")


def _add_cv_args(p):
    p.add_argument("--multipliers", type=_floats, default=default_multipliers(),
                   help="bandwidth multipliers of the median distance (CV grid)")
    p.add_argument("--epsilons", type=_floats, default=(1e-7,), help="regularization grid")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--knn-k", type=int, default=5)


def _load(args):
    if args.synth:
        ds = SYNTHETIC[args.synth](args.n, args.seed)
        if args.task == "classification":
            raise ConfigError("synthetic datasets are regression problems")
        return ds
    if not args.label:
        raise ConfigError("--label is required with --input")
    return load_csv(args.input, args.label, args.task or "classification",
                    standardize_x=not args.no_standardize)


def _fit_options(args, n):
    low_rank = None
    if args.low_rank or n > LOW_RANK_AUTO_N:
        low_rank = LowRankConfig(args.ichol_tol, args.max_rank)
    return {"low_rank": low_rank, "i_schedule": args.schedule, "v_partition": args.block_size}


def _options_echo(opts):
    lr = opts["low_rank"]
    return {"low_rank": None if lr is None else {"tol": lr.tol, "max_rank": lr.max_rank},
            "schedule": None if opts["i_schedule"] is None else list(opts["i_schedule"]),
            "block_size": opts["v_partition"]}


def _data_echo(args, ds):
    echo = {"synth": args.synth, "input": None if args.input is None else str(args.input),
            "n": ds.n, "m": ds.m, "task": ds.task, "label": args.label,
            "standardize": bool(args.input is not None and not args.no_standardize)}
    if ds.labels is not None:
        echo["class_order"] = list(ds.labels)
    return echo


# -- commands ------------------------------------------------------------------

def cmd_fit(args):
    timings = {}
    t = time.perf_counter()
    ds = _load(args)
    timings["load"] = time.perf_counter() - t
    method = normalize_method(args.method)
    opts = _fit_options(args, ds.n)
    cv_table = None

    t = time.perf_counter()
    if args.sigma_x is not None or args.sigma_y is not None:
        if args.sigma_x is None or args.sigma_y is None:
            raise ConfigError("give both --sigma-x and --sigma-y")
        spec = KernelSpec(args.sigma_x, args.sigma_y, args.epsilons[0])
    elif args.multiplier is not None:
        c = args.multiplier
        spec = KernelSpec(c * median_heuristic(ds.X), c * output_median(ds.Y), args.epsilons[0])
    else:
        cv = CVConfig(args.knn_k, args.folds, args.multipliers, args.epsilons, ds.task, args.seed)
        report = cross_validate(ds.X, ds.Y, args.d, cv, method, **opts)
        spec = report.spec
        cv_table = report.to_dict()
    timings["select"] = time.perf_counter() - t

    t = time.perf_counter()
    proj = fit(ds.X, ds.Y, method, GkdrConfig(d=args.d, spec=spec, **opts))
    timings["fit"] = time.perf_counter() - t

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    proj_path = out / "projection.csv"
    write_matrix_csv(proj_path, proj.B)

    metrics = {"eigenvalues": [float(v) for v in proj.eigenvalues]}
    if ds.B0 is not None:
        metrics["subspace_error"] = subspace_error(ds.B0, proj.B)
    config = {"method": method, "d": args.d, **spec.to_dict(), **_options_echo(opts),
              "data": _data_echo(args, ds), "details": proj.details}
    report = _report("fit", config, args.seed, metrics, timings, cv_table=cv_table,
                     outputs={"projection": str(proj_path)})
    write_report(out / "report.json", report)
    log.info("wrote %s and %s", proj_path, out / "report.json")
    return 0


def cmd_cv(args):
    t = time.perf_counter()
    ds = _load(args)
    method = normalize_method(args.method)
    opts = _fit_options(args, ds.n)
    cv = CVConfig(args.knn_k, args.folds, args.multipliers, args.epsilons, ds.task, args.seed)
    report = cross_validate(ds.X, ds.Y, args.d, cv, method, **opts)
    best = min(report.table, key=lambda r: (r.mean_error, r.multiplier, r.epsilon))
    config = {"method": method, "d": args.d, "folds": args.folds, "knn_k": args.knn_k,
              "multipliers": list(args.multipliers), "epsilons": list(args.epsilons),
              **_options_echo(opts), "data": _data_echo(args, ds)}
    metrics = {"best_cv_error": best.mean_error, **report.spec.to_dict()}
    write_report(args.report, _report("cv", config, args.seed, metrics,
                                      {"total": time.perf_counter() - t},
                                      cv_table=report.to_dict()))
    return 0


def cmd_bench(args):
    method = normalize_method(args.method)
    cv = CVConfig(args.knn_k, args.folds, args.multipliers, args.epsilons)
    opts = {"low_rank": LowRankConfig(args.ichol_tol, args.max_rank) if args.low_rank else None,
            "i_schedule": args.schedule, "v_partition": args.block_size}
    res = run_synthetic_benchmark(args.dataset, args.n, method, args.reps, args.seed, cv=cv,
                                  threads=args.threads, **opts)
    row = res.table_row() + ("  (single replication: std reported as 0)" if res.singleton else "")
    # keep stdout pure JSON when the report goes there
    print(row, file=sys.stderr if args.report in (None, "-") else sys.stdout)
    config = {"dataset": args.dataset, "n": args.n, "method": method, "replications": args.reps,
              "folds": args.folds, "knn_k": args.knn_k, "multipliers": list(args.multipliers),
              "epsilons": list(args.epsilons), **_options_echo(opts)}
    metrics = {"mean_error": res.mean_error, "std_error": res.std_error, "sem": res.sem}
    write_report(args.report, _report("bench", config, args.seed, metrics,
                                      {"total": res.wall_time_seconds},
                                      benchmark=res.to_dict()))
    return 0


def cmd_eval(args):
    t = time.perf_counter()
    B = read_matrix_csv(args.projection)
    task = args.task or "classification"
    std = not args.no_standardize
    if args.train is not None:
        if args.test is None:
            raise ConfigError("--train requires --test")
        # standardize both files with the training statistics
        train = load_csv(args.train, args.label, task, standardize_x=False)
        test = load_csv(args.test, args.label, task, standardize_x=False)
        if task == "classification":
            test = _align_labels(train, test)
        if std:
            train.X, mean, scale = standardize(train.X)
            test.X = standardize(test.X, mean, scale)[0]
    elif args.input is not None:
        ds = load_csv(args.input, args.label, task, standardize_x=std)
        train, test = train_test_split(ds, train_fraction=args.train_fraction, seed=args.seed,
                                       stratify=task == "classification")
    else:
        raise ConfigError("give --train/--test or --input")

    if B.shape[0] != train.m:
        raise ConfigError(f"projection has {B.shape[0]} rows but the data has {train.m} features")
    k = args.knn_k
    if k is None:
        k = 7 if task == "classification" and train.Y.shape[1] == 2 else 5
    if k > train.n:
        raise ConfigError(f"k={k} exceeds the training size {train.n}")
    Z_train, Z_test = project(B, train.X), project(B, test.X)
    pred = knn_predict(Z_train, train.Y, Z_test, k, task)
    if task == "classification":
        metrics = {"classification_error": classification_error(pred, test.class_indices())}
    else:
        metrics = {"mean_squared_error": prediction_error(pred, test.Y, "regression")}
    outputs = {}
    if args.projected_out:
        write_matrix_csv(args.projected_out, Z_test)
        outputs["projected"] = str(args.projected_out)
    config = {"projection": str(args.projection), "d": int(B.shape[1]), "knn_k": k, "task": task,
              "train": None if args.train is None else str(args.train),
              "test": None if args.test is None else str(args.test),
              "input": None if args.input is None else str(args.input),
              "train_fraction": args.train_fraction, "standardize": std,
              "n_train": train.n, "n_test": test.n}
    write_report(args.report, _report("eval", config, args.seed, metrics,
                                      {"total": time.perf_counter() - t}, outputs=outputs))
    return 0


def _align_labels(train, test):
    """Re-encode the test one-hot columns in the training class order."""
    index = {c: i for i, c in enumerate(train.labels)}
    unknown = [c for c in test.labels if c not in index]
    if unknown:
        raise DataError(f"test labels {unknown} do not occur in the training file")
    Y = np.zeros((test.n, len(train.labels)))
    for row, j in enumerate(test.class_indices()):
        Y[row, index[test.labels[j]]] = 1.0
    test.Y, test.labels = Y, list(train.labels)
    return test


def build_parser():
    parser = argparse.ArgumentParser(prog="gkdr", description="Gradient-based kernel dimension reduction.",
                                     epilog="exit codes: 0 ok, 1 parse/IO, 2 invalid config, 3 numerical")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="estimate a projection and write it as CSV")
    _add_data_args(p)
    _add_method_args(p)
    _add_cv_args(p)
    p.add_argument("--multiplier", type=float, help="fixed bandwidth multiplier (skips CV)")
    p.add_argument("--sigma-x", type=float, help="explicit input bandwidth (skips CV)")
    p.add_argument("--sigma-y", type=float, help="explicit output bandwidth (skips CV)")
    p.add_argument("--out-dir", default=".", help="directory for projection.csv and report.json")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("cv", help="cross-validate the bandwidth grid")
    _add_data_args(p)
    _add_method_args(p)
    _add_cv_args(p)
    p.add_argument("--report", help="output JSON path (default: stdout)")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("bench", help="synthetic benchmark over replications")
    p.add_argument("--dataset", choices=("A", "B"), required=True)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--method", default="gkdr")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--low-rank", action="store_true")
    p.add_argument("--ichol-tol", type=float, default=1e-6)
    p.add_argument("--max-rank", type=int)
    p.add_argument("--schedule", type=_ints)
    p.add_argument("--block-size", type=int)
    _add_cv_args(p)
    p.add_argument("--report", help="output JSON path (default: stdout)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("eval", help="kNN error of projected data")
    p.add_argument("--projection", type=Path, required=True)
    p.add_argument("--train", type=Path)
    p.add_argument("--test", type=Path)
    p.add_argument("--input", type=Path, help="single CSV to split instead of --train/--test")
    p.add_argument("--train-fraction", type=float, default=0.5)
    p.add_argument("--label", required=True)
    p.add_argument("--task", choices=("classification", "regression"))
    p.add_argument("--knn-k", type=int, help="default 7 for binary classification, else 5")
    p.add_argument("--no-standardize", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--projected-out", type=Path, help="write projected test coordinates here")
    p.add_argument("--report", help="output JSON path (default: stdout)")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except GkdrError as exc:
        print(f"gkdr {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"gkdr {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
