"""Operator command line: cohort statistics, model training and
comparison, single-record prediction, discharge-flow what-ifs, the
expense trend table, and the HTTP server.

Every subcommand is deterministic given its flags and --seed, so a
rerun writes byte-identical report files. Exit codes: 0 success, 2
usage error, 1 data or model error.
"""

import argparse
import json
import os
import sys

from .artifacts import ensure_fingerprint, read_artifact, save_model
from .baselines import SvmParams, TreeParams, fit_cart, fit_lda, fit_linear_svm, fit_random_tree
from .chaid import ChaidParams, fit_chaid
from .dataset import CohortSpec, descriptive_stats, crosstab, encode, filter_cohort, load_dataset, load_schema, split
from .errors import PacplanError
from .evaluation import compare_models, evaluate_model
from .flowsim import cost_savings, expense_trend, load_expenses, los_reduction, round2
from .service import prediction_response, serve
from . import reporting

DEFAULT_SEED = 2018
DEFAULT_TRAIN_FRACTION = 0.7
DEFAULT_POSITIVE = "Rehab Facility"
DEFAULT_COHORT = "Rehab Facility,Skilled Nursing Facility"
ALGORITHMS = ("chaid", "lda", "cart", "rtree", "lsvm")


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_json(path, document):
    _write(path, json.dumps(document, indent=2, sort_keys=True) + "\n")


def _load_data(args, apply_cohort=True):
    schema = load_schema(args.schema)
    data = load_dataset(args.data, schema)
    cohort = getattr(args, "cohort", None)
    if apply_cohort and cohort and cohort != "all":
        labels = frozenset(part.strip() for part in cohort.split(",") if part.strip())
        data = filter_cohort(data, CohortSpec(labels))
    return data


def _chaid_params(args, seed):
    kwargs = {"seed": seed}
    for flag, field in (
        ("alpha_merge", "alpha_merge"),
        ("alpha_split", "alpha_split"),
        ("max_depth", "max_depth"),
        ("min_parent", "min_parent"),
        ("min_child", "min_child"),
        ("bins", "continuous_bins"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            kwargs[field] = value
    return ChaidParams(**kwargs)


def _tree_params(args, seed, subset=None):
    kwargs = {"seed": seed, "feature_subset_size": subset}
    if getattr(args, "max_depth", None) is not None:
        kwargs["max_depth"] = args.max_depth
    if getattr(args, "min_leaf", None) is not None:
        kwargs["min_leaf"] = args.min_leaf
    return TreeParams(**kwargs)


def _svm_params(args, seed):
    kwargs = {"seed": seed}
    if getattr(args, "svm_lambda", None) is not None:
        kwargs["lambda_svm"] = args.svm_lambda
    if getattr(args, "epochs", None) is not None:
        kwargs["epochs"] = args.epochs
    return SvmParams(**kwargs)


def _fit_one(algo, train_set, positive, args, seed):
    if algo == "chaid":
        return fit_chaid(train_set, _chaid_params(args, seed))
    if algo == "cart":
        return fit_cart(train_set, positive, _tree_params(args, seed))
    if algo == "rtree":
        subset = getattr(args, "feature_subset", None)
        return fit_random_tree(train_set, positive, _tree_params(args, seed, subset))
    encoded = encode(train_set, positive)
    if algo == "lda":
        shrinkage = getattr(args, "shrinkage", None)
        return fit_lda(encoded) if shrinkage is None else fit_lda(encoded, shrinkage=shrinkage)
    return fit_linear_svm(encoded, _svm_params(args, seed))


# --- subcommands -----------------------------------------------------------

def cmd_stats(args):
    data = _load_data(args)
    continuous = [c.name for c in data.schema if c.kind == "continuous"]
    if args.columns:
        continuous = [name.strip() for name in args.columns.split(",")]
    summaries = [(name, descriptive_stats(data, name)) for name in continuous]
    response = data.response_column.name
    categorical = [c.name for c in data.schema if c.kind in ("nominal", "ordinal")]
    sections = [reporting.stats_table(summaries)]
    crosstabs = {}
    for name in categorical:
        table = crosstab(data, response, name)
        crosstabs[name] = reporting.crosstab_document(table)
        sections.append(f"\ncrosstab: {response} x {name}\n" + reporting.crosstab_table(table))
    text = "".join(sections)
    print(text, end="")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        _write(os.path.join(args.out_dir, "stats.txt"), text)
        _write_json(
            os.path.join(args.out_dir, "stats.json"),
            {"stats": reporting.stats_document(summaries), "crosstabs": crosstabs},
        )
        if not args.no_figures and continuous:
            from .figures import histogram_figure

            histogram_figure(data, continuous, os.path.join(args.out_dir, "histograms.png"))
    return 0


def _training_metadata(args, algo, report):
    return {
        "algorithm": algo,
        "seed": args.seed,
        "train_fraction": args.train_fraction,
        "source": str(args.data),
        "cohort": args.cohort,
        "positive": args.positive,
        "metrics": {
            "accuracy": report.overall_accuracy,
            "auc": report.auc,
            "lift_at_depth": report.lift_at_depth,
            "n_test": report.n_test,
        },
    }


def cmd_train(args):
    data = _load_data(args)
    train_set, test_set = split(data, args.train_fraction, args.seed)
    model = _fit_one(args.algo, train_set, args.positive, args, args.seed)
    report = evaluate_model(model, test_set, args.positive)
    save_model(model, args.model_out, schema=data.schema,
               training=_training_metadata(args, args.algo, report))
    print(reporting.evaluation_text(report), end="")
    print(f"artifact written: {args.model_out}")
    return 0


def cmd_evaluate(args):
    artifact = read_artifact(args.model)
    data = _load_data(args)
    ensure_fingerprint(artifact.model, data.schema)
    _, test_set = split(data, args.train_fraction, args.seed)
    positive = artifact.training.get("positive") or args.positive
    report = evaluate_model(artifact.model, test_set, positive)
    text = reporting.evaluation_text(report)
    print(text, end="")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        _write(os.path.join(args.out_dir, "evaluation.txt"), text)
        _write_json(os.path.join(args.out_dir, "evaluation.json"),
                    reporting.evaluation_document(report))
        _write(os.path.join(args.out_dir, f"roc_{report.model_name}.csv"),
               reporting.roc_csv(report.roc_points))
        if not args.no_figures:
            from .figures import roc_figure

            roc_figure([report], os.path.join(args.out_dir, "roc.png"))
    return 0


def cmd_compare(args):
    data = _load_data(args)
    train_set, test_set = split(data, args.train_fraction, args.seed)
    reports = []
    for algo in ALGORITHMS:
        model = _fit_one(algo, train_set, args.positive, args, args.seed)
        reports.append(evaluate_model(model, test_set, args.positive))
    comparison = compare_models(reports)
    text = reporting.comparison_text(comparison)
    print(text, end="")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        _write(os.path.join(args.out_dir, "comparison.txt"), text)
        _write_json(os.path.join(args.out_dir, "comparison.json"),
                    reporting.comparison_document(comparison))
        for report in comparison.reports:
            _write(os.path.join(args.out_dir, f"roc_{report.model_name}.csv"),
                   reporting.roc_csv(report.roc_points))
        if not args.no_figures:
            from .figures import comparison_figure, roc_figure

            roc_figure(comparison.reports, os.path.join(args.out_dir, "roc_curves.png"))
            comparison_figure(comparison.reports,
                              os.path.join(args.out_dir, "model_comparison.png"))
    return 0


def _parse_features(pairs):
    features = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise FeatureSyntaxError(f"features must look like name=value, got {pair!r}")
        if value != "":
            features[name] = value
    return features


class FeatureSyntaxError(Exception):
    pass


def cmd_predict(args):
    artifact = read_artifact(args.model)
    features = _parse_features(args.features or [])
    response = prediction_response(artifact, features)
    print(json.dumps(response, indent=2, sort_keys=True))
    return 0


def _format_dollars(amount):
    if float(amount).is_integer():
        return f"{int(amount):,}"
    return f"{amount:,.2f}"


def cmd_simulate(args):
    days, percent = los_reduction(args.pac_days, args.auth_days)
    dollars = round2(cost_savings(days, args.ownership))
    print(f"{days:g} days ({round2(percent):.2f}%), ${_format_dollars(dollars)}")
    return 0


def cmd_trend(args):
    rows = expense_trend(load_expenses(args.expenses))
    text = reporting.trend_table(rows)
    print(text, end="")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        _write(os.path.join(args.out_dir, "trend.txt"), text)
        _write(os.path.join(args.out_dir, "trend.csv"), reporting.trend_csv(rows))
        _write_json(os.path.join(args.out_dir, "trend.json"), reporting.trend_document(rows))
        if not args.no_figures:
            from .figures import trend_figure

            trend_figure(rows, os.path.join(args.out_dir, "expense_trend.png"))
    return 0


def cmd_serve(args):
    serve(args.model, args.port, args.host)
    return 0


# --- parser ------------------------------------------------------------------

def _add_data_flags(sub, default_cohort):
    sub.add_argument("--data", required=True, help="cohort CSV file")
    sub.add_argument("--schema", required=True, help="schema sidecar JSON")
    sub.add_argument("--cohort", default=default_cohort,
                     help="comma-separated response values to keep, or 'all'")


def _add_split_flags(sub):
    sub.add_argument("--train-fraction", type=float, default=DEFAULT_TRAIN_FRACTION)
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sub.add_argument("--positive", default=DEFAULT_POSITIVE,
                     help="response value treated as the positive class")


def _add_hyper_flags(sub):
    sub.add_argument("--max-depth", type=int)
    sub.add_argument("--min-parent", type=int)
    sub.add_argument("--min-child", type=int)
    sub.add_argument("--alpha-merge", type=float)
    sub.add_argument("--alpha-split", type=float)
    sub.add_argument("--bins", type=int)
    sub.add_argument("--min-leaf", type=int)
    sub.add_argument("--feature-subset", type=int)
    sub.add_argument("--shrinkage", type=float)
    sub.add_argument("--epochs", type=int)
    sub.add_argument("--svm-lambda", type=float)


def _add_report_flags(sub):
    sub.add_argument("--out-dir", help="write report files here")
    sub.add_argument("--no-figures", action="store_true",
                     help="skip PNG rendering in --out-dir")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pacplan",
        description="Discharge-planning analytics: cohort statistics, "
                    "disposition models, and patient-flow what-ifs.",
    )
    subs = parser.add_subparsers(dest="subcommand", required=True)

    stats = subs.add_parser("stats", help="descriptive statistics and crosstabs")
    _add_data_flags(stats, default_cohort="all")
    stats.add_argument("--columns", help="comma-separated continuous columns")
    _add_report_flags(stats)
    stats.set_defaults(func=cmd_stats)

    train = subs.add_parser("train", help="fit one model and save its artifact")
    train.add_argument("--algo", required=True, choices=ALGORITHMS)
    _add_data_flags(train, default_cohort=DEFAULT_COHORT)
    _add_split_flags(train)
    _add_hyper_flags(train)
    train.add_argument("--model-out", required=True, help="artifact path to write")
    train.set_defaults(func=cmd_train)

    evaluate = subs.add_parser("evaluate", help="score a saved model on the test split")
    evaluate.add_argument("--model", required=True, help="artifact path")
    _add_data_flags(evaluate, default_cohort=DEFAULT_COHORT)
    _add_split_flags(evaluate)
    _add_report_flags(evaluate)
    evaluate.set_defaults(func=cmd_evaluate)

    compare = subs.add_parser("compare", help="fit and rank all five models")
    _add_data_flags(compare, default_cohort=DEFAULT_COHORT)
    _add_split_flags(compare)
    _add_hyper_flags(compare)
    _add_report_flags(compare)
    compare.set_defaults(func=cmd_compare)

    predict = subs.add_parser("predict", help="predict one record from a saved model")
    predict.add_argument("--model", required=True, help="artifact path")
    predict.add_argument("--features", nargs="*", default=[],
                         help="name=value pairs; omit a column to mark it missing")
    predict.set_defaults(func=cmd_predict)

    simulate = subs.add_parser("simulate", help="length-of-stay and dollar impact")
    simulate.add_argument("--pac-days", type=float, required=True,
                          help="days of post-acute care needed")
    simulate.add_argument("--auth-days", type=float, required=True,
                          help="insurance authorization turnaround days")
    simulate.add_argument("--ownership", required=True,
                          help="state_government | non_profit | for_profit")
    simulate.set_defaults(func=cmd_simulate)

    trend = subs.add_parser("trend", help="expense trend table")
    trend.add_argument("--expenses", required=True, help="year,expense_per_day CSV")
    _add_report_flags(trend)
    trend.set_defaults(func=cmd_trend)

    server = subs.add_parser("serve", help="serve a saved model over HTTP")
    server.add_argument("--model", required=True, help="artifact path")
    server.add_argument("--port", type=int, default=8000)
    server.add_argument("--host", default="127.0.0.1")
    server.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FeatureSyntaxError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (PacplanError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
