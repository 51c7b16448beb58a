"""Plain-text tables and machine-readable documents for every report
the command line emits. All renderings are pure functions of their
inputs so repeated runs produce identical bytes.
"""

import io
import csv

# accuracy (%) and AUC reported for the same five algorithms on the
# original clinical cohort; printed alongside fresh results so operators
# can orient new numbers against the deployment that set these defaults
REFERENCE_METRICS = (
    ("lda", 83.33, 0.79),
    ("chaid", 84.16, 0.81),
    ("rtree", 72.50, 0.68),
    ("lsvm", 76.66, 0.70),
    ("cart", 80.00, 0.51),
)


def _num(value, places=4):
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return f"{value:.{places}f}"


def render_table(headers, rows):
    """Fixed-width table: first column left-aligned, the rest right."""
    cells = [list(map(str, headers))] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = []
    for r, row in enumerate(cells):
        parts = [row[0].ljust(widths[0])]
        parts += [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(parts).rstrip())
        if r == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


# --- descriptive statistics ----------------------------------------------

_STAT_ROWS = (
    ("n", "n"),
    ("min", "min"),
    ("max", "max"),
    ("range", "range"),
    ("mean", "mean"),
    ("mean std. error", "mean_std_error"),
    ("std. deviation", "std_dev"),
    ("variance", "variance"),
    ("skewness", "skewness"),
    ("skewness std. error", "skewness_std_error"),
    ("kurtosis", "kurtosis"),
    ("kurtosis std. error", "kurtosis_std_error"),
)


def stats_table(summaries):
    """summaries: list of (column name, StatsSummary)."""
    headers = ["statistic"] + [name for name, _ in summaries]
    rows = []
    for label, attr in _STAT_ROWS:
        rows.append([label] + [_num(getattr(s, attr)) for _, s in summaries])
    return render_table(headers, rows)


def stats_document(summaries):
    return {
        name: {attr: getattr(s, attr) for _, attr in _STAT_ROWS}
        for name, s in summaries
    }


def crosstab_table(table):
    """Counts with percent of grand total, plus marginals."""
    pct = table.percentages()
    headers = [""] + list(table.col_labels) + ["total"]
    rows = []
    for i, label in enumerate(table.row_labels):
        cells = [
            f"{table.counts[i][j]} ({pct[i][j]:.2f}%)"
            for j in range(len(table.col_labels))
        ]
        rows.append([label] + cells + [str(sum(table.counts[i]))])
    totals = table.col_totals()
    rows.append(["total"] + [str(t) for t in totals] + [str(table.grand_total())])
    return render_table(headers, rows)


def crosstab_document(table):
    return {
        "row_labels": list(table.row_labels),
        "col_labels": list(table.col_labels),
        "counts": [list(r) for r in table.counts],
    }


# --- expense trend ---------------------------------------------------------

def trend_table(rows):
    headers = ["year", "expense/day", "change %", "3yr avg %"]
    body = [
        [str(r.year), _num(r.expense, 2), _num(r.pct_change, 2), _num(r.moving_avg, 2)]
        for r in rows
    ]
    return render_table(headers, body)


def trend_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["year", "expense_per_day", "pct_change", "moving_avg"])
    for r in rows:
        writer.writerow([
            r.year,
            _num(r.expense, 2),
            _num(r.pct_change, 2),
            _num(r.moving_avg, 2),
        ])
    return buf.getvalue()


def trend_document(rows):
    return [
        {
            "year": r.year,
            "expense_per_day": r.expense,
            "pct_change": r.pct_change,
            "moving_avg": r.moving_avg,
        }
        for r in rows
    ]


# --- model evaluation -------------------------------------------------------

def evaluation_text(report):
    c = report.confusion
    lines = [
        f"model: {report.model_name}",
        f"positive class: {report.positive}",
        f"test rows: {report.n_test}",
        f"accuracy: {_num(report.overall_accuracy)}",
        f"auc: {_num(report.auc)}",
        f"lift@{int(report.depth * 100)}%: {_num(report.lift_at_depth)}",
        "confusion (rows actual, columns predicted):",
    ]
    table = render_table(
        ["", "pred +", "pred -"],
        [["actual +", c.tp, c.fn], ["actual -", c.fp, c.tn]],
    )
    return "\n".join(lines) + "\n" + table


def evaluation_document(report):
    c = report.confusion
    return {
        "model": report.model_name,
        "positive": report.positive,
        "n_test": report.n_test,
        "accuracy": report.overall_accuracy,
        "auc": report.auc,
        "lift_at_depth": report.lift_at_depth,
        "depth": report.depth,
        "confusion": {"tp": c.tp, "fn": c.fn, "fp": c.fp, "tn": c.tn},
        "roc_points": [list(p) for p in report.roc_points],
    }


def roc_csv(points):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["fpr", "tpr"])
    for fpr, tpr in points:
        writer.writerow([repr(float(fpr)), repr(float(tpr))])
    return buf.getvalue()


# --- model comparison --------------------------------------------------------

def comparison_text(comparison):
    headers = ["model", "accuracy", "auc", f"lift@{int(comparison.reports[0].depth * 100)}%"]
    rows = [
        [r.model_name, _num(r.overall_accuracy), _num(r.auc), _num(r.lift_at_depth)]
        for r in comparison.reports
    ]
    out = [render_table(headers, rows)]
    out.append(f"winner: {comparison.winner}\n")
    out.append("selection trace:\n")
    for line in comparison.selection_trace:
        out.append(f"  {line}\n")
    out.append("\nreference run (original clinical cohort):\n")
    ref_rows = [[name, f"{acc:.2f}", f"{auc:.2f}"] for name, acc, auc in REFERENCE_METRICS]
    out.append(render_table(["model", "accuracy %", "auc"], ref_rows))
    return "".join(out)


def comparison_document(comparison):
    return {
        "winner": comparison.winner,
        "selection_trace": list(comparison.selection_trace),
        "models": [evaluation_document(r) for r in comparison.reports],
        "reference_run": [
            {"model": name, "accuracy_pct": acc, "auc": auc}
            for name, acc, auc in REFERENCE_METRICS
        ],
    }
