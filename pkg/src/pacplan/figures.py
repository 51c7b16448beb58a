"""Figure rendering for the report-producing subcommands.

Everything draws through the Agg backend into PNG files next to the
delimited outputs. The Software metadata field is stripped so the same
inputs yield the same bytes across runs.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_SAVE_KWARGS = {"dpi": 120, "metadata": {"Software": None}}


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
    return path


def roc_figure(reports, path):
    """Overlay one ROC curve per model report."""
    fig, ax = plt.subplots(figsize=(6, 5))
    for report in reports:
        xs = [p[0] for p in report.roc_points]
        ys = [p[1] for p in report.roc_points]
        ax.plot(xs, ys, label=f"{report.model_name} (auc {report.auc:.3f})")
    ax.plot([0, 1], [0, 1], linestyle=":", color="grey", linewidth=1)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title("ROC")
    ax.legend(loc="lower right", fontsize=8)
    return _finish(fig, path)


def comparison_figure(reports, path):
    """Grouped bars: accuracy and AUC per model."""
    names = [r.model_name for r in reports]
    acc = [r.overall_accuracy for r in reports]
    auc = [r.auc for r in reports]
    xs = range(len(names))
    fig, ax = plt.subplots(figsize=(6, 4))
    width = 0.38
    ax.bar([x - width / 2 for x in xs], acc, width, label="accuracy")
    ax.bar([x + width / 2 for x in xs], auc, width, label="auc")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names)
    ax.set_ylim(0, 1)
    ax.set_title("model comparison")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def trend_figure(rows, path):
    """Expense level plus the change/moving-average percents."""
    years = [r.year for r in rows]
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    top.plot(years, [r.expense for r in rows], marker="o", markersize=3)
    top.set_ylabel("expense per day ($)")
    top.set_title("adjusted expenses per inpatient day")
    pct_years = [r.year for r in rows if r.pct_change is not None]
    bottom.plot(
        pct_years,
        [r.pct_change for r in rows if r.pct_change is not None],
        marker="o", markersize=3, label="change %",
    )
    ma_years = [r.year for r in rows if r.moving_avg is not None]
    bottom.plot(
        ma_years,
        [r.moving_avg for r in rows if r.moving_avg is not None],
        marker="s", markersize=3, label="3yr avg %",
    )
    bottom.set_ylabel("percent")
    bottom.set_xlabel("year")
    bottom.legend(fontsize=8)
    return _finish(fig, path)


def histogram_figure(dataset, columns, path):
    """One histogram panel per continuous column."""
    fig, axes = plt.subplots(1, len(columns), figsize=(3.2 * len(columns), 3))
    if len(columns) == 1:
        axes = [axes]
    for ax, name in zip(axes, columns):
        values = [v for v in dataset.column(name) if v is not None]
        ax.hist(values, bins=20, color="#4878a8")
        ax.set_title(name, fontsize=9)
    return _finish(fig, path)
