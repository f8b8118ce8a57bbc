"""Command-line front end.

Exit codes: 0 success, 1 data/model error, 2 usage error.  Every run writes
``run_config.json`` with all resolved options into the output directory;
``costboost replay --config run_config.json`` reruns it.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from costboost import __version__
from costboost._io import atomic_write_text, fmt_float
from costboost.bagging import (
    ImportanceReport,
    fit_bagged,
    oob_error_curve,
    permutation_importance,
    select_features,
)
from costboost.boosting import CostMatrix, InvalidCostMatrix
from costboost.dataset import (
    DATASET_MAGIC,
    DISLIKE,
    FAVOR,
    dumps_dataset,
    imbalance_profile,
    load_dataset,
    load_survey_csv,
    synth_survey,
)
from costboost.errors import CostboostError, SchemaMismatch
from costboost.evaluation import (
    ALGORITHMS,
    ConfusionMatrix,
    LearnerSpec,
    compare_algorithms,
    cost_sweep,
    crossval,
)
from costboost.modelio import dumps_model, load_model
from costboost.reports import (
    LONG_COLUMNS,
    confusion_rows,
    cv_rows,
    format_confusion,
    format_table,
    metric_rows,
    to_csv,
)
from costboost.tree import TreeParams

OUTPUT_ENV = "COSTBOOST_OUTPUT_DIR"
DEFAULT_OUTPUT = "costboost-out"
CONFIG_NAME = "run_config.json"
TRAINABLE = ("adaboost", "gentleboost", "bagging", "svm")


class UsageError(Exception):
    """Bad flag values detected after argparse; exit code 2."""


def parse_cost(text: str) -> CostMatrix:
    try:
        return CostMatrix.parse(text)
    except InvalidCostMatrix as exc:
        raise UsageError(f"--cost {text!r}: {exc}") from None


def parse_costs(text: str) -> list[CostMatrix]:
    return [parse_cost(part) for part in text.split(";") if part.strip()]


def parse_names(text: str | None) -> list[str]:
    return [] if not text else [t.strip() for t in text.split(",") if t.strip()]


def parse_algorithms(text: str, allowed=ALGORITHMS) -> list[str]:
    algos = parse_names(text)
    bad = [a for a in algos if a not in allowed]
    if bad or not algos:
        raise UsageError(f"unknown algorithm(s) {bad}; choose from {', '.join(allowed)}")
    return algos


class Outputs:
    """Collects files in memory; nothing touches disk until ``commit``."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.files: dict[Path, str] = {}

    def add(self, name, text: str, absolute: bool = False):
        path = Path(name) if absolute else self.directory / name
        self.files[path] = text

    def commit(self) -> list[Path]:
        for path, text in self.files.items():
            atomic_write_text(path, text)
        return list(self.files)


# --------------------------------------------------------------------------
# handlers; each validates its flags first, then computes, then returns files

def _load(args, features=None):
    return load_dataset(args.input, args.target, args.threshold, features)


def _learner_params(args, algorithm: str) -> dict:
    if algorithm in ("adaboost", "gentleboost"):
        return {
            "max_rounds": args.max_rounds,
            "max_depth": args.weak_depth,
            "early_stop": not args.no_early_stop,
        }
    if algorithm == "bagging":
        return {"n_trees": args.n_trees, "max_depth": args.max_depth, "n_jobs": args.jobs}
    if algorithm == "svm":
        return {"c": args.c, "tol": args.svm_tol, "max_passes": args.max_passes}
    return {}


def cmd_profile(args, out: Outputs):
    targets = parse_names(args.target)
    if not targets:
        raise UsageError("--target needs at least one column name")
    table = load_survey_csv(args.input)
    header = ["target", "scale_1", "scale_2", "scale_3", "scale_4", "scale_5",
              "dislike", "favor", "ratio", "minority"]
    rows = []
    for t in targets:
        p = imbalance_profile(table, t, args.threshold)
        rows.append(
            [t, *(p.per_scale_counts[s] for s in range(1, 6)), p.dislike_count, p.favor_count,
             float(p.ratio), "favor" if p.minority_class == FAVOR else "dislike"]
        )
    out.add("profile.csv", to_csv(header, rows))
    return format_table(header, rows, "{:.2f}")


def cmd_importance(args, out: Outputs):
    cost = parse_cost(args.cost) if args.cost else None
    data = _load(args)
    params = TreeParams(max_depth=args.max_depth, min_leaf_weight=1.0)
    ens = fit_bagged(data, args.n_trees, params, args.seed, cost, args.jobs)
    curve = oob_error_curve(ens, data)
    report = permutation_importance(ens, data, args.seed, args.jobs)
    out.add("oob_curve.csv", to_csv(["index", "value"], [(t + 1, float(e)) for t, e in enumerate(curve.errors)]))
    out.add("importance.csv", to_csv(["feature", "score"], zip(report.feature_names, map(float, report.scores))))
    if args.save_model:
        out.add("bagged_model.json", dumps_model(ens))
    rows = sorted(zip(report.feature_names, map(float, report.scores)), key=lambda r: -r[1])
    return f"final OOB error {curve.final:.4f} with {ens.n_trees} trees\n" + format_table(["feature", "score"], rows)


def read_importance(path) -> ImportanceReport:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["feature", "score"]:
            raise CostboostError(f"{path}: expected header 'feature,score', got {header}")
        rows = [r for r in reader if r]
    return ImportanceReport(tuple(r[0] for r in rows), np.array([float(r[1]) for r in rows]))


def cmd_select(args, out: Outputs):
    if args.input and not args.target:
        raise UsageError("refitting on the selected features needs --target")
    report = read_importance(args.importance)
    chosen = select_features(report, args.importance_threshold)
    scores = dict(zip(report.feature_names, report.scores))
    out.add("selected.csv", to_csv(["feature", "score"], [(f, float(scores[f])) for f in chosen]))
    msg = f"{len(chosen)} of {len(report.feature_names)} features score above {args.importance_threshold}\n"
    if args.input and chosen:
        data = _load(args, chosen)
        params = TreeParams(max_depth=args.max_depth, min_leaf_weight=1.0)
        ens = fit_bagged(data, args.n_trees, params, args.seed, None, args.jobs)
        curve = oob_error_curve(ens, data)
        out.add("oob_curve_reduced.csv", to_csv(["index", "value"], [(t + 1, float(e)) for t, e in enumerate(curve.errors)]))
        msg += f"reduced-set OOB error {curve.final:.4f}\n"
    return msg + "\n".join(chosen) + ("\n" if chosen else "")


def cmd_train(args, out: Outputs):
    cost = parse_cost(args.cost)
    features = parse_names(args.features) or None
    data = _load(args, features)
    spec = LearnerSpec(args.algorithm, cost, _learner_params(args, args.algorithm))
    model = spec.fit(data, args.seed)
    out.add(args.model_name, dumps_model(model))
    train_err = float(np.mean(model.predict(data.features) != data.labels))
    return f"trained {args.algorithm} on {data.n} rows ({data.n_dropped} dropped); training error {train_err:.4f}\n"


def cmd_cost_sweep(args, out: Outputs):
    costs = parse_costs(args.costs)
    if not costs:
        raise UsageError("--costs needs at least one matrix")
    algos = parse_algorithms(args.algorithms, TRAINABLE)
    data = _load(args)
    params = {a: _learner_params(args, a) for a in algos}
    grid = cost_sweep(data, algos, costs, args.seed, args.k, params)
    name = Path(args.input).stem
    long_rows, text = [], []
    for (algo, tag), cm in grid.items():
        rows = list(confusion_rows(name, algo, tag, cm)) + list(metric_rows(name, algo, tag, cm))
        long_rows += rows
        out.add(f"confusion_{algo}_{tag.replace(',', '-')}.csv",
                to_csv(["true_class", "pred_dislike", "pred_favor"],
                       [("dislike", *cm.counts[0]), ("favor", *cm.counts[1])]))
        text.append(f"{algo}  cost [{tag}]\n" + format_confusion(cm))
    out.add("cost_sweep.csv", to_csv(LONG_COLUMNS, long_rows))
    out.add("cost_sweep.txt", "\n".join(text))
    return "\n".join(text)


def cmd_compare(args, out: Outputs):
    cost = parse_cost(args.cost)
    algos = parse_algorithms(args.algorithms, TRAINABLE)
    data = _load(args)
    params = {a: _learner_params(args, a) for a in algos}
    reports = compare_algorithms(data, cost, args.seed, args.k, algos, params)
    name = Path(args.input).stem
    long_rows = [row for a, r in reports.items() for row in cv_rows(name, a, cost.tag, r)]
    table = format_table(
        ["error", *algos],
        [
            ["error-out-sample", *(reports[a].mean_out_sample for a in algos)],
            ["error-in-sample", *(reports[a].mean_in_sample for a in algos)],
        ],
    )
    out.add("compare.csv", to_csv(LONG_COLUMNS, long_rows))
    out.add("compare.txt", table)
    return table


def cmd_metrics(args, out: Outputs):
    positives = {"favor": [FAVOR], "dislike": [DISLIKE], "both": [FAVOR, DISLIKE]}[args.positive]
    if args.confusion:
        try:
            a, b, c, d = (int(v) for v in args.confusion.split(","))
            cm = ConfusionMatrix(((a, b), (c, d)))
        except ValueError:
            raise UsageError(f"--confusion needs four nonnegative integers, got {args.confusion!r}") from None
        dataset, algo, tag = "given", "given", ""
    else:
        if not (args.input and args.target and args.algorithm):
            raise UsageError("metrics needs --confusion or all of --input, --target, --algorithm")
        cost = parse_cost(args.cost)
        data = _load(args)
        spec = LearnerSpec(args.algorithm, cost, _learner_params(args, args.algorithm))
        cm = crossval(data, spec, args.k, args.seed).pooled
        dataset, algo, tag = Path(args.input).stem, args.algorithm, cost.tag
    rows = [r for p in positives for r in metric_rows(dataset, algo, tag, cm, p)]
    out.add("metrics.csv", to_csv(LONG_COLUMNS, list(confusion_rows(dataset, algo, tag, cm)) + rows))
    return format_confusion(cm) + format_table(["metric", "value"], [(r[3], r[4]) for r in rows])


def cmd_synth(args, out: Outputs):
    informative = parse_names(args.informative)
    try:
        informative = [int(i) for i in informative]
    except ValueError:
        raise UsageError(f"--informative needs comma-separated integers, got {args.informative!r}") from None
    if not 0 < args.favor_fraction < 1:
        raise UsageError("--favor-fraction must be in (0, 1)")
    data = synth_survey(args.n, args.favor_fraction, args.d, informative, args.noise_level, args.seed, args.shift)
    out.add(args.name, dumps_dataset(data))
    dislike, favor = data.class_counts()
    return f"wrote {data.n} rows x {data.d} features ({dislike} dislike / {favor} favor)\n"


def _predict_input(path):
    with Path(path).open(newline="", encoding="utf-8-sig") as fh:
        first = fh.readline()
        if not first.startswith(DATASET_MAGIC):
            fh.seek(0)
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        rows = [r for r in reader if r]
    if first.startswith(DATASET_MAGIC) and rows:
        rows = rows[1:]  # type row
    return header, rows


def cmd_predict(args, out: Outputs):
    model = load_model(args.model)
    header, rows = _predict_input(args.input)
    names = list(model.feature_names)
    missing = [f for f in names if f not in header]
    if missing:
        raise SchemaMismatch(missing, [h for h in header if h not in names])
    idx = [header.index(f) for f in names]

    def num(text):
        try:
            v = float(text)
        except ValueError:
            return math.nan
        return v

    X = np.array([[num(r[i]) if i < len(r) else math.nan for i in idx] for r in rows], dtype=float)
    X = X.reshape(len(rows), len(names))
    ok = ~np.isnan(X).any(axis=1)
    labels = np.zeros(len(rows), dtype=np.int64)
    scores = np.zeros(len(rows))
    if ok.any():
        labels[ok] = model.predict(X[ok])
        scores[ok] = model.decision_function(X[ok])
    out_rows = [
        r + ([str(int(labels[i])), fmt_float(scores[i])] if ok[i] else ["", ""])
        for i, r in enumerate(rows)
    ]
    out.add(args.output, to_csv(header + ["predicted_label", "score"], out_rows), absolute=True)
    return f"predicted {int(ok.sum())} of {len(rows)} rows\n"


HANDLERS = {
    "profile": cmd_profile,
    "importance": cmd_importance,
    "select": cmd_select,
    "train": cmd_train,
    "cost-sweep": cmd_cost_sweep,
    "compare": cmd_compare,
    "metrics": cmd_metrics,
    "synth": cmd_synth,
    "predict": cmd_predict,
}


# --------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="costboost", description="Cost-sensitive ensembles for imbalanced survey data."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default=os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT),
                        help=f"where outputs go (default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--jobs", type=int, default=1, help="worker threads; results do not depend on it")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", required=True, help="survey CSV (1-5 cells) or costboost dataset file")
    data.add_argument("--target", required=True, help="target column")
    data.add_argument("--threshold", type=int, default=4, choices=range(2, 6),
                      help="answers >= threshold count as favor (default 4)")

    def learner_flags(p, algorithm_default=None):
        p.add_argument("--max-rounds", type=int, default=200)
        p.add_argument("--weak-depth", type=int, default=3, help="boosting tree depth")
        p.add_argument("--no-early-stop", action="store_true")
        p.add_argument("--n-trees", type=int, default=400)
        p.add_argument("--max-depth", type=int, default=30, help="bagged tree depth")
        p.add_argument("--c", type=float, default=1.0, help="SVM box constraint")
        p.add_argument("--svm-tol", type=float, default=1e-3)
        p.add_argument("--max-passes", type=int, default=200)

    p = sub.add_parser("profile", parents=[common], help="class balance per target column")
    p.add_argument("--input", required=True)
    p.add_argument("--target", required=True, help="one or more comma-separated columns")
    p.add_argument("--threshold", type=int, default=4, choices=range(2, 6))

    p = sub.add_parser("importance", parents=[common, data], help="bagged OOB error curve and permutation importance")
    p.add_argument("--n-trees", type=int, default=400)
    p.add_argument("--max-depth", type=int, default=30)
    p.add_argument("--cost", default=None, help="optional cost matrix for cost-weighted bootstrap")
    p.add_argument("--save-model", action="store_true")

    p = sub.add_parser("select", parents=[common], help="keep features scoring above a threshold")
    p.add_argument("--importance", required=True, help="importance.csv from the importance command")
    p.add_argument("--importance-threshold", type=float, default=0.1)
    p.add_argument("--input", default=None, help="refit a bag on the selected features")
    p.add_argument("--target", default=None)
    p.add_argument("--threshold", type=int, default=4, choices=range(2, 6))
    p.add_argument("--n-trees", type=int, default=400)
    p.add_argument("--max-depth", type=int, default=30)

    p = sub.add_parser("train", parents=[common, data], help="train one model and save it")
    p.add_argument("--algorithm", choices=TRAINABLE, required=True)
    p.add_argument("--cost", default="0,1,1,0", help="c(d,d),c(d,f),c(f,d),c(f,f)")
    p.add_argument("--features", default=None, help="comma-separated subset of predictors")
    p.add_argument("--model-name", default="model.json")
    learner_flags(p)

    p = sub.add_parser("cost-sweep", parents=[common, data], help="confusion matrices across cost matrices")
    p.add_argument("--costs", default="0,1,1,0;0,5,1,0;0,2,1,0", help="';'-separated cost matrices")
    p.add_argument("--algorithms", default="gentleboost,adaboost")
    p.add_argument("--k", type=int, default=5)
    learner_flags(p)

    p = sub.add_parser("compare", parents=[common, data], help="cross-validated error per algorithm")
    p.add_argument("--cost", default="0,5,1,0")
    p.add_argument("--algorithms", default="adaboost,bagging,svm")
    p.add_argument("--k", type=int, default=5)
    learner_flags(p)

    p = sub.add_parser("metrics", parents=[common], help="precision, recall, accuracy")
    p.add_argument("--confusion", default=None, help="four counts, row-major, true-dislike row first")
    p.add_argument("--input", default=None)
    p.add_argument("--target", default=None)
    p.add_argument("--threshold", type=int, default=4, choices=range(2, 6))
    p.add_argument("--algorithm", choices=TRAINABLE, default=None)
    p.add_argument("--cost", default="0,5,1,0")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--positive", choices=("favor", "dislike", "both"), default="favor")
    learner_flags(p)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic survey dataset")
    p.add_argument("--n", type=int, default=890)
    p.add_argument("--favor-fraction", type=float, default=791 / 890)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--informative", default="0,1,2")
    p.add_argument("--noise-level", type=float, default=1.0)
    p.add_argument("--shift", type=float, default=1.0)
    p.add_argument("--name", default="synth.csv")

    p = sub.add_parser("predict", parents=[common], help="label rows with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("replay", help="rerun a command from its run_config.json")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir", default=None, help="override the recorded output directory")
    return parser


def resolved_config(args) -> dict:
    opts = {k: v for k, v in vars(args).items() if k != "command"}
    return {"tool": "costboost", "version": __version__, "command": args.command, "options": opts}


def _replay_args(path, output_dir):
    with Path(path).open(encoding="utf-8") as fh:
        cfg = json.load(fh)
    if cfg.get("tool") != "costboost" or cfg.get("command") not in HANDLERS:
        raise UsageError(f"{path} is not a costboost run config")
    args = argparse.Namespace(command=cfg["command"], **cfg["options"])
    if output_dir is not None:
        args.output_dir = output_dir
    return args


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "replay":
            args = _replay_args(args.config, args.output_dir)
        out = Outputs(Path(args.output_dir))
        message = HANDLERS[args.command](args, out)
        out.add(CONFIG_NAME, json.dumps(resolved_config(args), sort_keys=True, indent=2) + "\n")
        out.commit()
    except UsageError as exc:
        print(f"costboost {args.command}: error: {exc}", file=stderr)
        return 2
    except (CostboostError, OSError, KeyError, ValueError) as exc:
        print(f"costboost {args.command}: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    if message:
        stdout.write(message)
    return 0


def main():
    sys.exit(run())
