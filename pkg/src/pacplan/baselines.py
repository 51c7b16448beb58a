"""The four comparison models: LDA, CART, a randomized tree, and a
linear SVM trained by stochastic subgradient descent.

Trees consume raw mixed-type records; LDA and the SVM consume encoded
feature vectors. Every fit is deterministic given (data, params, seed).
"""

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .dataset import schema_fingerprint
from .errors import SingularCovariance, TooFewRows

# --- linear discriminant analysis ---------------------------------------


@dataclass
class LdaModel:
    weights: np.ndarray
    bias: float
    mean_pos: np.ndarray
    mean_neg: np.ndarray
    log_prior_pos: float
    log_prior_neg: float
    shrinkage: float
    encoder: object

    @property
    def positive_label(self):
        return self.encoder.positive_label

    def score_vector(self, x):
        return float(np.dot(self.weights, x) + self.bias)

    def score(self, record):
        return self.score_vector(self.encoder.vector(record))

    def predict(self, record):
        # ties go to the negative class
        if self.score(record) > 0.0:
            return self.encoder.positive_label
        return self.encoder.negative_label


def fit_lda(train, shrinkage=1e-3):
    """Pooled-covariance linear discriminant with ridge shrinkage.

    The within-class covariance uses the maximum-likelihood (1/n)
    denominator so duplicating every row leaves the boundary unchanged.
    """
    X, y = train.X, train.y
    pos = X[y == 1]
    neg = X[y == -1]
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("both classes must be present")
    n, p = X.shape
    mu_pos = pos.mean(axis=0)
    mu_neg = neg.mean(axis=0)
    centered = np.vstack((pos - mu_pos, neg - mu_neg))
    cov = centered.T @ centered / n
    if shrinkage:
        cov = cov + shrinkage * np.trace(cov) / p * np.eye(p)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise SingularCovariance(
            "pooled covariance is not positive definite; raise shrinkage"
        ) from None

    def solve(v):
        return np.linalg.solve(chol.T, np.linalg.solve(chol, v))

    w = solve(mu_pos - mu_neg)
    log_prior_pos = math.log(len(pos) / n)
    log_prior_neg = math.log(len(neg) / n)
    bias = -0.5 * float((mu_pos + mu_neg) @ w) + log_prior_pos - log_prior_neg
    return LdaModel(
        weights=w,
        bias=float(bias),
        mean_pos=mu_pos,
        mean_neg=mu_neg,
        log_prior_pos=log_prior_pos,
        log_prior_neg=log_prior_neg,
        shrinkage=shrinkage,
        encoder=train.encoder,
    )


# --- CART / random tree --------------------------------------------------


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 5
    min_leaf: int = 5
    feature_subset_size: Optional[int] = None  # None means all features
    seed: int = 0

    def __post_init__(self):
        if self.max_depth < 0 or self.min_leaf < 1:
            raise ValueError("max_depth >= 0 and min_leaf >= 1 required")


@dataclass
class TreeNode:
    class_counts: tuple
    feature: Optional[str] = None
    kind: Optional[str] = None  # continuous | categorical
    threshold: Optional[float] = None
    left_categories: Optional[tuple] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self):
        return self.feature is None


@dataclass
class TreeModel:
    root: TreeNode
    class_labels: tuple
    positive_label: str
    params: TreeParams
    schema: list
    fingerprint: str
    response_name: str
    algorithm: str  # cart | rtree

    def _leaf(self, record):
        node = self.root
        while not node.is_leaf:
            node = node.left if _goes_left(node, record.get(node.feature)) else node.right
        return node

    def score(self, record):
        """Positive-class relative frequency at the routed leaf."""
        leaf = self._leaf(record)
        pos_idx = self.class_labels.index(self.positive_label)
        return leaf.class_counts[pos_idx] / sum(leaf.class_counts)

    def predict(self, record):
        if self.score(record) > 0.5:
            return self.positive_label
        return next(l for l in self.class_labels if l != self.positive_label)


def _goes_left(node, value):
    if node.kind == "continuous":
        # missing falls through to the right branch
        return value is not None and value <= node.threshold
    return value in node.left_categories


def tree_path(model, record):
    """Traversal trace: (feature, branch condition, class counts) per
    internal node, then a terminal (None, None, counts) leaf entry."""
    steps = []
    node = model.root
    while not node.is_leaf:
        value = record.get(node.feature)
        left = _goes_left(node, value)
        if value is None and node.kind == "continuous":
            cond = f"{node.feature} missing"
        elif node.kind == "continuous":
            op = "<=" if left else ">"
            cond = f"{node.feature} {op} {node.threshold:g}"
        else:
            members = ", ".join(str(c) for c in node.left_categories)
            cond = f"{node.feature} {'in' if left else 'not in'} {{{members}}}"
        steps.append((node.feature, cond, dict(zip(model.class_labels, node.class_counts))))
        node = node.left if left else node.right
    steps.append((None, None, dict(zip(model.class_labels, node.class_counts))))
    return steps


def _gini_score(counts_left, counts_right):
    """Split quality: sum of squared counts over size, per side.

    Maximizing this is equivalent to minimizing weighted gini; exact
    rational arithmetic keeps tie comparisons deterministic.
    """
    n_l = sum(counts_left)
    n_r = sum(counts_right)
    return (
        Fraction(sum(c * c for c in counts_left), n_l)
        + Fraction(sum(c * c for c in counts_right), n_r)
    )


def _split_candidates(rows, col):
    """Yield (sort_key, descriptor, go_left) for every admissible cut."""
    name = col.name
    if col.kind == "continuous":
        values = sorted({row[name] for row in rows if row[name] is not None})
        for a, b in zip(values, values[1:]):
            t = (a + b) / 2.0
            yield (
                (0, t),
                {"kind": "continuous", "threshold": t},
                lambda row, t=t: row[name] is not None and row[name] <= t,
            )
    else:
        present = sorted(
            {row[name] for row in rows},
            key=lambda v: (v is not None, str(v)),
        )
        if len(present) < 2:
            return
        for v in present:
            yield (
                (1, (v is not None, str(v))),
                {"kind": "categorical", "left_categories": (v,)},
                lambda row, v=v: row[name] == v,
            )


def _grow_tree(rows, predictors, response, class_labels, params, rng, depth):
    counts = [0] * len(class_labels)
    for row in rows:
        counts[class_labels.index(row[response])] += 1
    node = TreeNode(class_counts=tuple(counts))
    if depth >= params.max_depth or sum(1 for c in counts if c > 0) < 2:
        return node
    if len(rows) < 2 * params.min_leaf:
        return node

    pool = list(range(len(predictors)))
    if params.feature_subset_size is not None and params.feature_subset_size < len(pool):
        pool = sorted(rng.sample(pool, params.feature_subset_size))

    class_index = {lab: i for i, lab in enumerate(class_labels)}
    best = None  # (score, fi, sort_key, descriptor, left_rows, right_rows)
    for fi in pool:
        col = predictors[fi]
        for sort_key, descriptor, go_left in _split_candidates(rows, col):
            left_rows = []
            right_rows = []
            for row in rows:
                (left_rows if go_left(row) else right_rows).append(row)
            if len(left_rows) < params.min_leaf or len(right_rows) < params.min_leaf:
                continue
            cl = [0] * len(class_labels)
            for row in left_rows:
                cl[class_index[row[response]]] += 1
            cr = [c - l for c, l in zip(counts, cl)]
            quality = _gini_score(cl, cr)
            rank = (fi, sort_key)
            if best is None or quality > best[0] or (quality == best[0] and rank < best[1]):
                best = (quality, rank, col.name, descriptor, left_rows, right_rows)
    if best is None:
        return node
    _, _, feature, descriptor, left_rows, right_rows = best
    node.feature = feature
    node.kind = descriptor["kind"]
    node.threshold = descriptor.get("threshold")
    node.left_categories = descriptor.get("left_categories")
    node.left = _grow_tree(left_rows, predictors, response, class_labels, params, rng, depth + 1)
    node.right = _grow_tree(right_rows, predictors, response, class_labels, params, rng, depth + 1)
    return node


def _fit_tree(train, positive, params, algorithm):
    if len(train.rows) < 2 * params.min_leaf:
        raise TooFewRows(
            f"need at least 2*min_leaf={2 * params.min_leaf} rows, got {len(train.rows)}"
        )
    response = train.response_column.name
    predictors = [c for c in train.schema if c.kind != "response"]
    class_labels = tuple(sorted({row[response] for row in train.rows}))
    rng = random.Random(params.seed)
    root = _grow_tree(
        train.rows, predictors, response, class_labels, params, rng, 0
    )
    return TreeModel(
        root=root,
        class_labels=class_labels,
        positive_label=positive,
        params=params,
        schema=list(train.schema),
        fingerprint=schema_fingerprint(train.schema),
        response_name=response,
        algorithm=algorithm,
    )


def fit_cart(train, positive, params=TreeParams()):
    """Greedy binary gini tree over raw records.

    Continuous cuts at midpoints of distinct sorted values, categorical
    cuts one-vs-rest. Zero-gain splits are admitted on impure nodes;
    ties break on lowest feature index, then smallest cut.
    """
    if params.feature_subset_size is not None:
        params = TreeParams(params.max_depth, params.min_leaf, None, params.seed)
    return _fit_tree(train, positive, params, "cart")


def fit_random_tree(train, positive, params=None):
    """CART growth where each node draws a seeded feature subset."""
    n_features = sum(1 for c in train.schema if c.kind != "response")
    if params is None:
        params = TreeParams(feature_subset_size=max(1, math.isqrt(n_features)))
    if params.feature_subset_size is None:
        params = TreeParams(
            params.max_depth,
            params.min_leaf,
            max(1, math.isqrt(n_features)),
            params.seed,
        )
    return _fit_tree(train, positive, params, "rtree")


# --- linear SVM ----------------------------------------------------------


@dataclass(frozen=True)
class SvmParams:
    lambda_svm: float = 1e-2
    epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.lambda_svm <= 0:
            raise ValueError("lambda_svm must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


@dataclass
class SvmModel:
    weights: np.ndarray
    bias: float
    params: SvmParams
    encoder: object

    @property
    def positive_label(self):
        return self.encoder.positive_label

    def score_vector(self, x):
        return float(np.dot(self.weights, x) + self.bias)

    def score(self, record):
        return self.score_vector(self.encoder.vector(record))

    def predict(self, record):
        if self.score(record) > 0.0:
            return self.encoder.positive_label
        return self.encoder.negative_label


def svm_objective(model, X, y):
    """Regularized empirical hinge loss at the model's parameters."""
    margins = X @ model.weights + model.bias
    hinge = np.maximum(0.0, 1.0 - y * margins)
    return 0.5 * model.params.lambda_svm * float(model.weights @ model.weights) + float(
        hinge.mean()
    )


def fit_linear_svm(train, params=SvmParams()):
    """Stochastic subgradient descent on the hinge objective.

    Step size 1/(lambda*t); the visit order is a fresh seeded shuffle
    per epoch, independent of the labels. The bias is unregularized.
    """
    X, y = train.X, train.y
    if not ((y == 1).any() and (y == -1).any()):
        raise ValueError("both classes must be present")
    n, p = X.shape
    rng = random.Random(params.seed)
    w = np.zeros(p)
    b = 0.0
    t = 0
    lam = params.lambda_svm
    order = list(range(n))
    for _ in range(params.epochs):
        rng.shuffle(order)
        for i in order:
            t += 1
            eta = 1.0 / (lam * t)
            margin = y[i] * (float(w @ X[i]) + b)
            w *= 1.0 - eta * lam
            if margin < 1.0:
                w += eta * y[i] * X[i]
                b += eta * y[i]
    return SvmModel(weights=w, bias=b, params=params, encoder=train.encoder)
