"""Batch command-line surface.

Commands: stats, train, eval, grid, forecast, compare, scenario. Every
command reads CSV input, writes machine-readable outputs (JSON and/or
aligned CSV) under --out-dir, and prints its main JSON payload to stdout.
Exit codes: 0 ok (including completed runs with flagged grid cells),
2 input problem, 3 numeric failure, 4 non-convergence under --strict.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from datetime import date as Date, timedelta
from pathlib import Path

from .dataset import (
    COUNT_COLUMNS,
    CaseSeries,
    CsvSchema,
    fingerprint,
    impute_missing,
    parse_csv,
    summarize_series,
)
from .errors import InputError, NotConvergedError, NumericError
from .forecast import emit_plot_series, forecast, scenario_run
from .harness import (
    compare_models,
    default_grid,
    run_grid,
    select_best,
)
from .linear import LinRegConfig
from .manifest import RunManifest
from .metrics import evaluate
from .mlp import MlpConfig
from .models import (
    load_model,
    original_space_eval,
    predict_scaled,
    save_model,
    train_on_split,
)
from .preprocess import SplitSpec, build_supervised, standardized_split, transform
from .svr import KernelSpec, SvrConfig

STAT_ROWS = ("count", "mean", "std", "min", "25%", "50%", "75%", "max")
STAT_COLUMNS = ("day_index",) + COUNT_COLUMNS


def _write_json(path: Path, document: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=2)
        fh.write("\n")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _print_payload(document: dict) -> None:
    payload = {k: v for k, v in document.items() if k != "manifest"}
    print(json.dumps(payload, indent=2))


def _load_series(args: argparse.Namespace) -> CaseSeries:
    path = Path(args.csv)
    if not path.exists():
        raise InputError(f"input file not found: {path}")
    schema = CsvSchema(
        date=args.date_column,
        tests=args.tests_column,
        confirmed=args.confirmed_column,
        deaths=args.deaths_column,
    )
    series = parse_csv(
        path.read_text(encoding="utf-8"),
        schema,
        fill_gaps=args.fill_gaps,
        source_label=path.name,
    )
    if len(series) == 0:
        return series
    if args.impute != "none":
        series = impute_missing(series, args.impute)
    return series


def _split_spec(args: argparse.Namespace) -> SplitSpec:
    return SplitSpec(
        mode=args.split_mode, train_fraction=args.split_fraction, seed=args.seed
    )


def _config_snapshot(args: argparse.Namespace) -> dict:
    skip = {"func", "command"}
    return {
        k: (v if not isinstance(v, Path) else str(v))
        for k, v in sorted(vars(args).items())
        if k not in skip and not callable(v)
    }


def _manifest(args: argparse.Namespace, fp: dict | None) -> RunManifest:
    return RunManifest.start(
        command=args.command,
        argv=list(args._argv),
        config=_config_snapshot(args),
        input_fingerprint=fp,
        seed=getattr(args, "seed", None),
    )


def _parse_date(text: str, flag: str) -> Date:
    try:
        return Date.fromisoformat(text)
    except ValueError:
        raise InputError(f"{flag} must be an ISO date (YYYY-MM-DD), got {text!r}")


def _model_config(args: argparse.Namespace):
    if args.model == "mlp":
        return MlpConfig(
            hidden_layers=args.hidden_layers,
            neurons_per_layer=args.neurons,
            activation=args.activation,
            optimizer=args.optimizer,
            max_iterations=args.max_iterations,
            seed=args.seed,
            tolerance=args.tolerance,
            learning_rate=args.learning_rate,
        )
    if args.model == "svr":
        return SvrConfig(
            kernel=KernelSpec(
                kind=args.kernel,
                gamma=args.gamma,
                degree=args.degree,
                coef0=args.coef0,
            ),
            c=args.c,
            epsilon=args.epsilon,
            max_passes=args.max_passes,
        )
    return LinRegConfig(
        learning_rate=args.lr if args.lr is not None else 0.5,
        iterations=args.iterations,
    )


def cmd_stats(args: argparse.Namespace) -> int:
    series = _load_series_no_impute(args)
    manifest = _manifest(args, fingerprint(series) if len(series) else None)
    stats = summarize_series(series)
    document = {
        "columns": {col: stats[col].as_dict() for col in STAT_COLUMNS},
        "rows": len(series),
        "manifest": manifest.finish().as_dict(),
    }
    out = Path(args.out_dir)
    if args.format in ("json", "both"):
        _write_json(out / "stats.json", document)
    if args.format in ("csv", "both"):
        rows = []
        for stat in STAT_ROWS:
            row: list = [stat]
            for col in STAT_COLUMNS:
                value = stats[col].as_dict()[stat]
                row.append("" if value is None else value)
            rows.append(row)
        _write_csv(out / "stats.csv", ["statistic", *STAT_COLUMNS], rows)
    _print_payload(document)
    return 0


def _load_series_no_impute(args: argparse.Namespace) -> CaseSeries:
    impute = args.impute
    args.impute = "none"
    try:
        return _load_series(args)
    finally:
        args.impute = impute


def cmd_train(args: argparse.Namespace) -> int:
    series = _load_series(args)
    features = tuple(args.features.split(","))
    data = build_supervised(series, features, args.target)
    std = standardized_split(data, _split_spec(args))
    config = _model_config(args)
    model, result = train_on_split(args.model, config, std, features, args.target)
    manifest = _manifest(args, fingerprint(series))

    out = Path(args.out_dir)
    model_path = Path(args.out) if args.out else out / f"model_{args.model}_{args.target}.json"
    model_path.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, str(model_path))
    document = {
        "model_file": str(model_path),
        "family": args.model,
        "target": args.target,
        "eval": {
            "scaled": result.as_dict(),
            "original": original_space_eval(model, result).as_dict(),
        },
        "train_meta": model.train_meta,
        "manifest": manifest.finish().as_dict(),
    }
    if args.format in ("json", "both"):
        _write_json(out / "train_eval.json", document)
    _print_payload(document)
    if args.strict and not model.converged:
        raise NotConvergedError(
            f"fit did not converge (status {model.train_meta.get('status')!r})"
        )
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    model = load_model(args.model_file)
    series = _load_series(args)
    data = build_supervised(series, model.feature_names, model.target_name)
    x_scaled = transform(data.x, model.x_scaler)
    y_scaled = transform(data.y, model.y_scaler)
    result = evaluate(y_scaled, predict_scaled(model, x_scaled))
    manifest = _manifest(args, fingerprint(series))
    document = {
        "model_file": args.model_file,
        "family": model.family,
        "target": model.target_name,
        "n_rows": len(data),
        "eval": {
            "scaled": result.as_dict(),
            "original": original_space_eval(model, result).as_dict(),
        },
        "manifest": manifest.finish().as_dict(),
    }
    if args.format in ("json", "both"):
        _write_json(Path(args.out_dir) / "eval.json", document)
    _print_payload(document)
    return 0


def cmd_grid(args: argparse.Namespace) -> int:
    series = _load_series(args)
    slots = default_grid(
        mlp_hidden_layers=args.mlp_hidden_layers,
        mlp_neurons=args.mlp_neurons,
        seed=args.seed,
    )
    table = run_grid(
        series,
        _split_spec(args),
        slots,
        workers=args.workers,
        standardize=not args.no_standardize,
    )
    manifest = _manifest(args, fingerprint(series))
    document = dict(table.as_dict())
    document["manifest"] = manifest.finish().as_dict()
    out = Path(args.out_dir)
    if args.format in ("json", "both"):
        _write_json(out / "scoretable.json", document)
    if args.format in ("csv", "both"):
        rows = [
            [
                c.family,
                c.slot,
                c.target,
                "" if c.r2 is None else c.r2,
                "" if c.mse is None else c.mse,
                int(c.flagged),
                c.flag_reason or "",
            ]
            for c in table.cells
        ]
        _write_csv(
            out / "scoretable.csv",
            ["family", "slot", "target", "r2", "mse", "flagged", "flag_reason"],
            rows,
        )
    _print_payload(document)
    return 0


def cmd_forecast(args: argparse.Namespace) -> int:
    model = load_model(args.model_file)
    history = CaseSeries(records=())
    fp = None
    if args.csv:
        history = _load_series(args)
        fp = fingerprint(history)
        last_day_index = history.last_day_index
        start = (
            _parse_date(args.start, "--start")
            if args.start
            else history.last_date + timedelta(days=1)
        )
    else:
        if args.last_day_index is None or not args.start:
            raise InputError(
                "without --csv, both --last-day-index and --start are required"
            )
        last_day_index = args.last_day_index
        start = _parse_date(args.start, "--start")
    report = forecast(
        model,
        last_day_index=last_day_index,
        start_date=start,
        horizon=args.horizon,
        scenario_label=args.label,
    )
    manifest = _manifest(args, fp)
    document = dict(report.as_dict())
    document["manifest"] = manifest.finish().as_dict()
    out = Path(args.out_dir)
    if args.format in ("json", "both"):
        _write_json(out / "forecast.json", document)
    if args.format in ("csv", "both"):
        rows = [
            [r["date"], "" if r["observed"] is None else r["observed"],
             "" if r["predicted"] is None else r["predicted"],
             "" if r["scale"] is None else r["scale"]]
            for r in emit_plot_series(history, report, args.scale,
                                      target=model.target_name)
        ]
        _write_csv(out / "forecast.csv", ["date", "observed", "predicted", "scale"], rows)
    _print_payload(document)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    series = _load_series(args)
    spec = _split_spec(args)
    slots = default_grid(
        mlp_hidden_layers=args.mlp_hidden_layers,
        mlp_neurons=args.mlp_neurons,
        seed=args.seed,
    )
    table = run_grid(series, spec, slots, workers=args.workers)
    best = {fam: select_best(table, fam) for fam in ("mlp", "svr", "linreg")}
    report = compare_models(series, spec, best, args.target, args.horizon)
    manifest = _manifest(args, fingerprint(series))
    document = dict(report.as_dict())
    document["manifest"] = manifest.finish().as_dict()
    out = Path(args.out_dir)
    if args.format in ("json", "both"):
        _write_json(out / "comparison.json", document)
    if args.format in ("csv", "both"):
        rows = []
        for i, d in enumerate(report.dates):
            rows.append(
                [
                    d.isoformat(),
                    "" if report.observed[i] is None else report.observed[i],
                    report.predicted["mlp"][i],
                    report.predicted["svr"][i],
                    report.predicted["linreg"][i],
                ]
            )
        _write_csv(
            out / "comparison.csv",
            ["date", "observed", "mlp", "svr", "linreg"],
            rows,
        )
    _print_payload(document)
    return 0


def cmd_scenario(args: argparse.Namespace) -> int:
    series = _load_series(args)
    window_start = _parse_date(args.window_from, "--from")
    window_end = _parse_date(args.window_to, "--to")
    config = MlpConfig(
        hidden_layers=args.hidden_layers,
        neurons_per_layer=args.neurons,
        activation=args.activation,
        optimizer=args.optimizer,
        max_iterations=args.max_iterations,
        seed=args.seed,
        tolerance=args.tolerance,
        learning_rate=args.learning_rate,
    )
    result = scenario_run(
        series,
        window_start,
        window_end,
        "mlp",
        config,
        _split_spec(args),
        args.horizon,
        label=args.label,
    )
    manifest = _manifest(args, fingerprint(series))
    document = {
        "label": result.label,
        "window": {
            "from": result.window_start.isoformat(),
            "to": result.window_end.isoformat(),
        },
        "targets": {
            target: {
                "eval": {
                    "scaled": result.evals[target].as_dict(),
                    "original": result.evals_original[target].as_dict(),
                },
                "forecast": result.reports[target].as_dict(),
            }
            for target in result.reports
        },
        "manifest": manifest.finish().as_dict(),
    }
    out = Path(args.out_dir)
    if args.format in ("json", "both"):
        _write_json(out / "scenario.json", document)
    if args.format in ("csv", "both"):
        from .dataset import window as window_series

        part = window_series(series, window_start, window_end)
        for target, report in result.reports.items():
            rows = [
                [r["date"], "" if r["observed"] is None else r["observed"],
                 "" if r["predicted"] is None else r["predicted"],
                 "" if r["scale"] is None else r["scale"]]
                for r in emit_plot_series(part, report, args.scale, target=target)
            ]
            _write_csv(
                out / f"scenario_{target}.csv",
                ["date", "observed", "predicted", "scale"],
                rows,
            )
    _print_payload(document)
    return 0


def _add_io_flags(p: argparse.ArgumentParser, *, needs_csv: bool = True) -> None:
    if needs_csv:
        p.add_argument("csv", help="input CSV (date,tests,confirmed,deaths)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split-fraction", dest="split_fraction", type=float, default=0.8)
    p.add_argument(
        "--split-mode",
        dest="split_mode",
        choices=["chronological", "shuffled"],
        default="chronological",
    )
    p.add_argument("--impute", choices=["mean", "forward-fill", "none"], default="mean")
    p.add_argument("--out-dir", dest="out_dir", default=".")
    p.add_argument("--format", choices=["json", "csv", "both"], default="both")
    p.add_argument("--fill-gaps", dest="fill_gaps", action="store_true")
    p.add_argument("--date-column", dest="date_column", default="date")
    p.add_argument("--tests-column", dest="tests_column", default="tests")
    p.add_argument("--confirmed-column", dest="confirmed_column", default="confirmed")
    p.add_argument("--deaths-column", dest="deaths_column", default="deaths")


def _add_mlp_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--hidden-layers", dest="hidden_layers", type=int, default=2)
    p.add_argument("--neurons", type=int, default=16)
    p.add_argument(
        "--activation", choices=["tanh", "relu", "logistic"], default="tanh"
    )
    p.add_argument("--optimizer", choices=["lbfgs", "sgd", "adam"], default="lbfgs")
    p.add_argument("--max-iterations", dest="max_iterations", type=int, default=1000)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=1e-3)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epicast",
        description="Regression and forecasting toolkit for daily epidemic "
        "case-count series",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="describe-style summary per column")
    _add_io_flags(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="fit one model, write it, score it")
    _add_io_flags(p)
    p.add_argument("--model", choices=["mlp", "svr", "linreg"], required=True)
    p.add_argument("--target", choices=list(COUNT_COLUMNS), default="confirmed")
    p.add_argument("--features", default="day_index")
    p.add_argument("--out", default=None, help="model file path")
    p.add_argument("--strict", action="store_true", help="exit 4 on non-convergence")
    _add_mlp_flags(p)
    p.add_argument("--kernel", choices=["linear", "rbf", "poly"], default="rbf")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--coef0", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--max-passes", dest="max_passes", type=int, default=10000)
    p.add_argument("--lr", type=float, default=None, help="linreg learning rate")
    p.add_argument("--iterations", type=int, default=2500, help="linreg iterations")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a saved model on a CSV")
    p.add_argument("model_file")
    _add_io_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grid", help="run the 15-slot regressor grid")
    _add_io_flags(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--mlp-hidden-layers", dest="mlp_hidden_layers", type=int, default=2)
    p.add_argument("--mlp-neurons", dest="mlp_neurons", type=int, default=16)
    p.add_argument(
        "--no-standardize",
        dest="no_standardize",
        action="store_true",
        help="fit on raw values (demonstrates divergence flagging)",
    )
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("forecast", help="horizon forecast from a saved model")
    p.add_argument("model_file")
    p.add_argument("--csv", default=None, help="history CSV to anchor the forecast")
    _add_io_flags(p, needs_csv=False)
    p.add_argument("--horizon", type=int, default=30)
    p.add_argument("--start", default=None, help="first forecast date (ISO)")
    p.add_argument("--last-day-index", dest="last_day_index", type=int, default=None)
    p.add_argument("--scale", choices=["linear", "log"], default="linear")
    p.add_argument("--label", default="")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("compare", help="best slot per family on one axis")
    _add_io_flags(p)
    p.add_argument("--target", choices=list(COUNT_COLUMNS), default="confirmed")
    p.add_argument("--horizon", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--mlp-hidden-layers", dest="mlp_hidden_layers", type=int, default=2)
    p.add_argument("--mlp-neurons", dest="mlp_neurons", type=int, default=16)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("scenario", help="windowed train + forecast, both targets")
    _add_io_flags(p)
    p.add_argument("--from", dest="window_from", default="2021-06-15")
    p.add_argument("--to", dest="window_to", default="2021-08-10")
    p.add_argument("--horizon", type=int, default=30)
    p.add_argument("--label", default="critical")
    p.add_argument("--scale", choices=["linear", "log"], default="linear")
    _add_mlp_flags(p)
    p.set_defaults(func=cmd_scenario)

    return parser


def main(argv: list[str] | None = None) -> int:
    raw_argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(raw_argv)
    args._argv = raw_argv
    try:
        return args.func(args)
    except FileNotFoundError as err:
        print(json.dumps({"error": "input", "message": str(err)}), file=sys.stderr)
        return 2
    except InputError as err:
        print(
            json.dumps({"error": "input", "message": str(err)}), file=sys.stderr
        )
        return 2
    except NumericError as err:
        print(
            json.dumps({"error": "numeric", "message": str(err)}), file=sys.stderr
        )
        return 3
    except NotConvergedError as err:
        print(
            json.dumps({"error": "not_converged", "message": str(err)}),
            file=sys.stderr,
        )
        return 4


if __name__ == "__main__":
    sys.exit(main())
