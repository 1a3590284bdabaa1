"""Command-line front end: simulation experiments, CSV fitting, reports.

Subcommands:

* ``mccv simulate --config cfg.json`` - run a configured experiment and
  write "mean(sd)" tables (markdown and CSV).
* ``mccv fit --data file.csv --response NAME`` - select a model on a user
  dataset and write a JSON result with the selected columns, coefficients,
  and selection proportions.
* ``mccv report --result result.json`` - emit (variable, proportion) pairs
  sorted descending plus binned counts for external plotting.

All outputs are deterministic functions of the inputs and the seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .errors import MccvError
from .selector import METHOD_NAMES, method_from_name, run_selection
from .simgen import ExperimentConfig, run_experiment, standard_betas
from .solver import Dataset, standardize

PROPORTION_BIN_WIDTH = 0.05


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _load_csv(path: str, response: str):
    """Read a numeric CSV with a header row.

    Returns (column names sans response, X, y).  Row numbers in diagnostics
    are 1-based data rows (the header is not counted).
    """
    with open(path, newline="", encoding="utf-8") as fp:
        reader = csv.reader(fp)
        try:
            header = next(reader)
        except StopIteration:
            raise MccvError("empty CSV file") from None
        if response not in header:
            raise MccvError(
                f"response column {response!r} not found; columns: {header}"
            )
        y_col = header.index(response)
        names = [name for i, name in enumerate(header) if i != y_col]
        rows = []
        ys = []
        for row_number, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise MccvError(
                    f"row {row_number} has {len(row)} fields, expected {len(header)}"
                )
            values = []
            for i, cell in enumerate(row):
                try:
                    value = float(cell)
                except ValueError:
                    raise MccvError(
                        f"non-numeric value {cell!r} at row {row_number}, "
                        f"column {header[i]!r}"
                    ) from None
                if i == y_col:
                    ys.append(value)
                else:
                    values.append(value)
            rows.append(values)
    if len(rows) < 2:
        raise MccvError("need at least two data rows")
    return names, np.asarray(rows), np.asarray(ys)


def cmd_simulate(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(f"cannot read config: {exc}")
    for key, value in (
        ("master_seed", args.seed),
        ("reps", args.reps),
    ):
        if value is not None:
            raw[key] = value
    try:
        config = ExperimentConfig.from_dict(raw)
        tables = run_experiment(config, n_jobs=args.jobs)
    except MccvError as exc:
        return _fail(str(exc))
    out_dir = Path(args.out) if args.out else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    for table in tables:
        print(table.to_markdown())
        if out_dir is not None:
            stem = table.label.replace("=", "_").replace("/", "-")
            (out_dir / f"{stem}.md").write_text(table.to_markdown(), encoding="utf-8")
            (out_dir / f"{stem}.csv").write_text(table.to_csv(), encoding="utf-8")
    return 0


def cmd_fit(args) -> int:
    try:
        names, X, y = _load_csv(args.data, args.response)
        data = standardize(Dataset(X, y))
        method = method_from_name(
            args.method,
            n=data.n,
            n_c_exponent=args.n_c_exponent,
            b=args.b,
            k_folds=args.k_folds,
            ebic_gamma=args.ebic_gamma,
            enet_alpha=args.enet_alpha,
        )
        result = run_selection(
            data,
            method,
            grid_length=args.grid_length,
            grid_ratio=args.grid_ratio,
            seed=args.seed,
            n_jobs=args.jobs,
        )
    except MccvError as exc:
        return _fail(str(exc))
    report = result.to_report_dict(columns=names)
    report["method"] = args.method
    report["seed"] = args.seed
    report["n"] = data.n
    report["p"] = data.p
    if args.truth is not None:
        try:
            truth_names = set(
                json.loads(Path(args.truth).read_text(encoding="utf-8"))["oracle"]
            )
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            return _fail(f"cannot read truth sidecar: {exc}")
        selected = set(report["selected"])
        report["fn"] = len(truth_names - selected)
        report["fp"] = len(selected - truth_names)
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return 0


def cmd_report(args) -> int:
    try:
        report = json.loads(Path(args.result).read_text(encoding="utf-8"))
        columns = report["columns"]
        proportions = report["selection_proportions"]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        return _fail(f"cannot read result file: {exc}")
    if not proportions:
        return _fail("result has no selection proportions (information criterion?)")
    pairs = sorted(
        zip(columns, proportions), key=lambda kv: (-kv[1], kv[0])
    )
    if args.min_proportion > 0:
        pairs = [kv for kv in pairs if kv[1] > args.min_proportion]
    values = np.array([prop for _, prop in pairs])
    edges = np.arange(0.0, 1.0 + PROPORTION_BIN_WIDTH / 2, PROPORTION_BIN_WIDTH)
    counts, _ = (
        np.histogram(values, bins=edges) if values.size else (np.zeros(20, int), edges)
    )
    lines = ["variable,proportion"]
    lines += [f"{name},{prop!r}" for name, prop in pairs]
    proportions_text = "\n".join(lines) + "\n"
    bin_lines = ["bin_low,bin_high,count"]
    bin_lines += [
        f"{edges[i]:.2f},{edges[i + 1]:.2f},{int(c)}" for i, c in enumerate(counts)
    ]
    bins_text = "\n".join(bin_lines) + "\n"
    if args.out:
        Path(args.out).write_text(proportions_text, encoding="utf-8")
        bins_path = args.bins_out or str(
            Path(args.out).with_name(Path(args.out).stem + "_bins.csv")
        )
        Path(bins_path).write_text(bins_text, encoding="utf-8")
    else:
        print(proportions_text, end="")
        print(bins_text, end="")
    return 0


def cmd_export(args) -> int:
    """Write a synthetic benchmark dataset as CSV plus a truth sidecar."""
    from .simgen import CovSpec, sample_dataset

    try:
        truth = standard_betas(args.example, args.p, args.random_position, args.seed)
        spec = CovSpec(args.design, args.rho)
        data = sample_dataset(args.n, truth, spec, args.seed + 1)
    except (MccvError, ValueError) as exc:
        return _fail(str(exc))
    names = [f"x{j}" for j in range(args.p)]
    with open(args.out, "w", newline="", encoding="utf-8") as fp:
        writer = csv.writer(fp)
        writer.writerow(["y"] + names)
        for i in range(args.n):
            writer.writerow(
                [repr(float(data.y[i]))] + [repr(float(v)) for v in data.X[i]]
            )
    sidecar = {"oracle": [names[j] for j in truth.oracle]}
    Path(args.out).with_suffix(".truth.json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mccv",
        description="Modified cross-validation model selection for penalized regression",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a configured simulation experiment")
    sim.add_argument("--config", required=True, help="JSON experiment config")
    sim.add_argument("--out", help="directory for the result tables")
    sim.add_argument("--jobs", type=int, default=1, help="parallel repetitions")
    sim.add_argument("--seed", type=int, default=None, help="override master_seed")
    sim.add_argument("--reps", type=int, default=None, help="override reps")
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="select a model on a CSV dataset")
    fit.add_argument("--data", required=True, help="CSV with a header row")
    fit.add_argument("--response", required=True, help="response column name")
    fit.add_argument("--method", default="m-MCCV", choices=METHOD_NAMES)
    fit.add_argument("--n-c-exponent", type=float, default=0.75)
    fit.add_argument("--b", type=int, default=50)
    fit.add_argument("--k-folds", type=int, default=10)
    fit.add_argument("--grid-length", type=int, default=100)
    fit.add_argument("--grid-ratio", type=float, default=None)
    fit.add_argument("--ebic-gamma", type=float, default=1.0)
    fit.add_argument("--enet-alpha", type=float, default=0.5)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--jobs", type=int, default=1)
    fit.add_argument("--out", help="result JSON path (default: stdout)")
    fit.add_argument("--truth", help="sidecar JSON with the true oracle columns")
    fit.set_defaults(func=cmd_fit)

    rep = sub.add_parser("report", help="selection-proportion report")
    rep.add_argument("--result", required=True, help="result JSON from fit")
    rep.add_argument("--out", help="proportions CSV path (default: stdout)")
    rep.add_argument("--bins-out", help="binned-counts CSV path")
    rep.add_argument(
        "--min-proportion",
        type=float,
        default=0.0,
        help="keep only variables with proportion strictly above this",
    )
    rep.set_defaults(func=cmd_report)

    exp = sub.add_parser("export", help="write a synthetic dataset as CSV")
    exp.add_argument("--out", required=True, help="CSV output path")
    exp.add_argument("--n", type=int, required=True)
    exp.add_argument("--p", type=int, required=True)
    exp.add_argument("--example", default="Ex1", choices=("Ex1", "Ex2"))
    exp.add_argument("--design", default="independent")
    exp.add_argument("--rho", type=float, default=0.0)
    exp.add_argument("--random-position", action="store_true")
    exp.add_argument("--seed", type=int, default=0)
    exp.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
