"""Selection measures (accuracy, ROC/AUC, lift at depth) and the
model-comparison harness built on them.
"""

import math
from dataclasses import dataclass
from typing import Optional

from . import chaid as chaid_mod
from .baselines import LdaModel, SvmModel
from .chaid import ChaidTree
from .errors import EmptyTestSet, OneClassOnly

DEFAULT_LIFT_DEPTH = 0.30


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn: int
    fp: int
    tn: int

    @property
    def total(self):
        return self.tp + self.fn + self.fp + self.tn

    @property
    def accuracy(self):
        return (self.tp + self.tn) / self.total


@dataclass(frozen=True)
class ModelReport:
    model_name: str
    positive: str
    confusion: ConfusionMatrix
    overall_accuracy: float
    roc_points: tuple
    auc: float
    lift_at_depth: float
    depth: float
    n_test: int


@dataclass(frozen=True)
class ComparisonReport:
    reports: tuple
    winner: str
    selection_trace: tuple


def roc_auc(scores, labels):
    """ROC sweep over descending score thresholds plus trapezoid AUC.

    Tied scores advance as one group, drawing diagonal segments, which
    makes the trapezoid area equal the tie-adjusted pairwise-comparison
    statistic.
    """
    if len(scores) != len(labels):
        raise ValueError("scores and labels must have equal length")
    n_pos = sum(1 for y in labels if y > 0)
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise OneClassOnly("need both a positive and a negative example")
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    points = [(0.0, 0.0)]
    tp = fp = 0
    prev = None
    for i in order:
        if prev is not None and scores[i] != prev:
            points.append((fp / n_neg, tp / n_pos))
        prev = scores[i]
        if labels[i] > 0:
            tp += 1
        else:
            fp += 1
    points.append((1.0, 1.0))
    auc = 0.0
    for (x1, y1), (x2, y2) in zip(points, points[1:]):
        auc += (x2 - x1) * (y1 + y2) / 2.0
    return tuple(points), auc


def lift_at_depth(scores, labels, depth=DEFAULT_LIFT_DEPTH):
    """Precision in the top depth-fraction over the base positive rate.

    Ties at the depth boundary resolve by stable input order.
    """
    if not 0.0 < depth <= 1.0:
        raise ValueError("depth must lie in (0, 1]")
    if len(scores) != len(labels):
        raise ValueError("scores and labels must have equal length")
    n = len(scores)
    n_pos = sum(1 for y in labels if y > 0)
    if n_pos == 0 or n_pos == n:
        raise OneClassOnly("need both a positive and a negative example")
    k = math.ceil(depth * n)
    order = sorted(range(n), key=lambda i: -scores[i])
    top_pos = sum(1 for i in order[:k] if labels[i] > 0)
    precision = top_pos / k
    base = n_pos / n
    return precision / base


def model_name(model):
    if isinstance(model, ChaidTree):
        return "chaid"
    if isinstance(model, LdaModel):
        return "lda"
    if isinstance(model, SvmModel):
        return "lsvm"
    algorithm = getattr(model, "algorithm", None)
    if algorithm is not None:
        return algorithm
    raise TypeError(f"unknown model type {type(model).__name__}")


def model_score(model, record, positive):
    if isinstance(model, ChaidTree):
        return chaid_mod.score(model, record, positive)
    return model.score(record)


def model_predict(model, record):
    if isinstance(model, ChaidTree):
        return chaid_mod.predict(model, record)
    return model.predict(record)


def evaluate_model(model, test, positive, depth=DEFAULT_LIFT_DEPTH, name=None):
    """Score a fitted model on held-out rows and assemble its report."""
    if len(test.rows) == 0:
        raise EmptyTestSet("test set has no rows")
    declared = getattr(model, "positive_label", None)
    if declared is not None and declared != positive:
        raise ValueError(
            f"model was fitted with positive label {declared!r}, asked for {positive!r}"
        )
    response = test.response_column.name
    if any(row[response] is None for row in test.rows):
        raise ValueError("test rows must have a non-missing response")
    scores = [model_score(model, row, positive) for row in test.rows]
    labels = [1 if row[response] == positive else -1 for row in test.rows]
    preds = [model_predict(model, row) for row in test.rows]
    tp = fn = fp = tn = 0
    for pred, row in zip(preds, test.rows):
        actual_pos = row[response] == positive
        predicted_pos = pred == positive
        if actual_pos and predicted_pos:
            tp += 1
        elif actual_pos:
            fn += 1
        elif predicted_pos:
            fp += 1
        else:
            tn += 1
    confusion = ConfusionMatrix(tp, fn, fp, tn)
    roc_points, auc = roc_auc(scores, labels)
    lift = lift_at_depth(scores, labels, depth)
    return ModelReport(
        model_name=name or model_name(model),
        positive=positive,
        confusion=confusion,
        overall_accuracy=confusion.accuracy,
        roc_points=roc_points,
        auc=auc,
        lift_at_depth=lift,
        depth=depth,
        n_test=len(test.rows),
    )


def compare_models(reports):
    """Pick the winner: highest accuracy, then AUC, then lift, then name."""
    if not reports:
        raise ValueError("need at least one report")
    trace = []
    contenders = list(reports)
    for label, key, reverse in (
        ("accuracy", lambda r: r.overall_accuracy, True),
        ("auc", lambda r: r.auc, True),
        ("lift", lambda r: r.lift_at_depth, True),
    ):
        best = max(key(r) for r in contenders)
        survivors = [r for r in contenders if key(r) == best]
        trace.append(
            f"{label}: best {best:.4f} by "
            + ", ".join(sorted(r.model_name for r in survivors))
        )
        contenders = survivors
        if len(contenders) == 1:
            break
    winner = sorted(contenders, key=lambda r: r.model_name)[0]
    if len(contenders) > 1:
        trace.append(f"all criteria tied; lexicographic pick {winner.model_name}")
    return ComparisonReport(
        reports=tuple(reports),
        winner=winner.model_name,
        selection_trace=tuple(trace),
    )
