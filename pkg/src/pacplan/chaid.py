"""Multiway decision tree with chi-square driven category merging and
multiplicity-adjusted split selection.

Continuous predictors are quantile-binned per node and treated as
ordinal. Missing values form a floating category free to merge with any
group; at scoring time unseen or out-of-range values follow the missing
route. Fitting is fully deterministic given (data, params).
"""

from bisect import bisect_left
from dataclasses import dataclass
from typing import Optional

from .dataset import schema_fingerprint
from .errors import DegenerateTable, SchemaMismatch, TooFewRows
from .numerics import ContingencyTable, bonferroni_multiplier, chi_square_independence


@dataclass(frozen=True)
class ChaidParams:
    alpha_merge: float = 0.05
    alpha_split: float = 0.05
    max_depth: int = 3
    min_parent: int = 20
    min_child: int = 7
    continuous_bins: int = 10
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.alpha_merge < 1.0 and 0.0 < self.alpha_split < 1.0):
            raise ValueError("alpha_merge and alpha_split must lie in (0, 1)")
        if self.min_child > self.min_parent:
            raise ValueError("min_child must not exceed min_parent")
        if self.continuous_bins < 2:
            raise ValueError("continuous_bins must be >= 2")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")


@dataclass(frozen=True)
class Split:
    predictor: str
    groups: tuple  # tuple of category tuples; None marks the floating member
    adjusted_p: float
    raw_p: float
    statistic: float
    kind: str  # continuous | ordinal | nominal
    bin_edges: Optional[tuple] = None  # continuous only
    value_range: Optional[tuple] = None  # (lo, hi) seen at fit, continuous only


@dataclass
class ChaidNode:
    class_counts: tuple
    depth: int
    prediction: str
    split: Optional[Split] = None
    children: tuple = ()

    @property
    def is_leaf(self):
        return self.split is None

    @property
    def total(self):
        return sum(self.class_counts)


@dataclass
class ChaidTree:
    root: ChaidNode
    class_labels: tuple
    params: ChaidParams
    schema: list
    fingerprint: str
    response_name: str


def _cat_key(cat):
    if cat is None:
        return (0,)
    if isinstance(cat, bool):
        return (2, str(cat))
    if isinstance(cat, (int, float)):
        return (1, cat)
    return (2, str(cat))


def _group_key(group):
    return tuple(_cat_key(c) for c in group)


def _sorted_group(cats):
    return tuple(sorted(cats, key=_cat_key))


class _MergeState:
    """Groups under construction plus the adjacency rule for pairing.

    Ordinal groups live in a positional list where only neighbors may
    merge; the pure-missing group floats outside that order and may
    join any group. Nominal groups are unordered and pair freely, so
    missing needs no special slot there.
    """

    def __init__(self, categories, kind):
        self.kind = kind
        if kind == "ordinal":
            non_missing = sorted((c for c in categories if c is not None), key=_cat_key)
            self.ordered = [[c] for c in non_missing]
            self.floating = [None] if None in categories else None
        else:
            self.ordered = [[c] for c in sorted(categories, key=_cat_key)]
            self.floating = None

    def groups(self):
        out = [list(g) for g in self.ordered]
        if self.floating is not None:
            out.append(list(self.floating))
        return out

    def pairs(self):
        """Mergeable group pairs as (kind_tag, i, j) handles."""
        out = []
        if self.kind == "ordinal":
            for i in range(len(self.ordered) - 1):
                out.append(("oo", i, i + 1))
            if self.floating is not None:
                for i in range(len(self.ordered)):
                    out.append(("fo", i, i))
        else:
            for i in range(len(self.ordered)):
                for j in range(i + 1, len(self.ordered)):
                    out.append(("nn", i, j))
        return out

    def members(self, handle):
        tag, i, j = handle
        if tag == "fo":
            return self.floating, self.ordered[i]
        return self.ordered[i], self.ordered[j]

    def merge(self, handle):
        tag, i, j = handle
        if tag == "fo":
            self.ordered[i] = self.ordered[i] + self.floating
            self.floating = None
        else:
            self.ordered[i] = self.ordered[i] + self.ordered[j]
            del self.ordered[j]

    def count(self):
        return len(self.ordered) + (1 if self.floating is not None else 0)


def _pair_p_value(counts_a, counts_b):
    """Chi-square p for a 2-row table of class counts; degenerate
    tables (single shared class) count as indistinguishable."""
    labels = tuple(range(len(counts_a)))
    table = ContingencyTable(("a", "b"), labels, (tuple(counts_a), tuple(counts_b)))
    try:
        return chi_square_independence(table).p_value
    except DegenerateTable:
        return 1.0


def merge_categories(pairs, kind, alpha_merge, min_child):
    """Kass-style bottom-up merge of response-similar categories.

    pairs: (category, class_label) observations; None is the floating
    missing category. Returns a tuple of category groups. Merging
    continues while the most-similar allowed pair has p > alpha_merge,
    then while any group is smaller than min_child (undersized groups
    join their most-similar allowed neighbor regardless of alpha).
    """
    if kind not in ("nominal", "ordinal"):
        raise ValueError(f"unknown kind {kind!r}")
    classes = sorted({lab for _, lab in pairs})
    counts = {}
    for cat, lab in pairs:
        if cat not in counts:
            counts[cat] = [0] * len(classes)
        counts[cat][classes.index(lab)] += 1

    state = _MergeState(list(counts), kind)

    def group_counts(group):
        total = [0] * len(classes)
        for cat in group:
            for k, v in enumerate(counts[cat]):
                total[k] += v
        return total

    def scored_pairs():
        out = []
        for handle in state.pairs():
            ga, gb = state.members(handle)
            p = _pair_p_value(group_counts(ga), group_counts(gb))
            key = tuple(sorted((_group_key(_sorted_group(ga)), _group_key(_sorted_group(gb)))))
            out.append((p, key, handle))
        return out

    while state.count() > 1:
        candidates = scored_pairs()
        # most similar pair first; lexicographic group labels break ties
        candidates.sort(key=lambda t: (-t[0], t[1]))
        best_p, _, best_handle = candidates[0]
        if best_p > alpha_merge:
            state.merge(best_handle)
            continue
        undersized = [g for g in state.groups() if sum(group_counts(g)) < min_child]
        if not undersized:
            break
        undersized.sort(key=lambda g: (sum(group_counts(g)), _group_key(_sorted_group(g))))
        victim = undersized[0]
        victim_key = _group_key(_sorted_group(victim))
        own = [
            (p, key, handle)
            for p, key, handle in candidates
            if victim_key in (
                _group_key(_sorted_group(state.members(handle)[0])),
                _group_key(_sorted_group(state.members(handle)[1])),
            )
        ]
        own.sort(key=lambda t: (-t[0], t[1]))
        state.merge(own[0][2])

    groups = [_sorted_group(g) for g in state.groups()]
    if kind == "nominal":
        groups.sort(key=_group_key)
    return tuple(groups)


def quantile_edges(values, bins):
    """Order-statistic (type 1) quantile cut points, deduplicated.

    Using data points themselves as edges keeps binning invariant under
    strictly increasing transforms.
    """
    xs = sorted(values)
    n = len(xs)
    edges = []
    for k in range(1, bins):
        idx = -(-k * n // bins) - 1  # ceil(k*n/bins) - 1
        edge = xs[idx]
        if not edges or edge > edges[-1]:
            edges.append(edge)
    return tuple(edges)


def bin_index(edges, value):
    return bisect_left(edges, value)


@dataclass
class _Candidate:
    split: Split
    assign: dict  # category -> child index


def _categorize(rows, col, params):
    """Per-row category for one predictor plus routing metadata.

    Returns (categories, kind_for_merge, to_value, bin_edges, value_range)
    where to_value maps merge-space categories back to stored ones.
    """
    name = col.name
    if col.kind == "continuous":
        present = [row[name] for row in rows if row[name] is not None]
        if not present:
            return None
        edges = quantile_edges(present, params.continuous_bins)
        cats = [
            None if row[name] is None else bin_index(edges, row[name])
            for row in rows
        ]
        return cats, "ordinal", None, edges, (min(present), max(present))
    if col.kind == "ordinal":
        rank = {lev: i for i, lev in enumerate(col.ordered_levels)}
        cats = []
        for row in rows:
            v = row[name]
            if v is None or v not in rank:
                cats.append(None)
            else:
                cats.append(rank[v])
        back = {i: lev for lev, i in rank.items()}
        return cats, "ordinal", back, None, None
    cats = [row[name] for row in rows]
    return cats, "nominal", None, None, None


def _evaluate_predictor(rows, col, labels, params):
    got = _categorize(rows, col, params)
    if got is None:
        return None
    cats, merge_kind, back, edges, vrange = got
    present = set(cats)
    if len(present) < 2:
        return None
    grouping = merge_categories(
        list(zip(cats, labels)), merge_kind, params.alpha_merge, params.min_child
    )
    r = len(grouping)
    if r < 2:
        return None
    group_of = {}
    for gi, group in enumerate(grouping):
        for cat in group:
            group_of[cat] = gi
    class_order = sorted(set(labels))
    cells = [[0] * len(class_order) for _ in range(r)]
    sizes = [0] * r
    for cat, lab in zip(cats, labels):
        gi = group_of[cat]
        cells[gi][class_order.index(lab)] += 1
        sizes[gi] += 1
    if any(s < params.min_child for s in sizes):
        return None
    table = ContingencyTable(
        tuple(range(r)), tuple(class_order), tuple(tuple(c) for c in cells)
    )
    try:
        res = chi_square_independence(table)
    except DegenerateTable:
        return None
    mult_kind = "ordinal" if merge_kind == "ordinal" else "nominal"
    multiplier = bonferroni_multiplier(len(present), r, mult_kind)
    adjusted = min(1.0, res.p_value * multiplier)
    if back is not None:
        grouping = tuple(
            _sorted_group(back[c] if c is not None else None for c in g)
            for g in grouping
        )
    split = Split(
        predictor=col.name,
        groups=grouping,
        adjusted_p=adjusted,
        raw_p=res.p_value,
        statistic=res.statistic,
        kind=col.kind,
        bin_edges=edges,
        value_range=vrange,
    )
    return split


def _best_split(rows, schema, response_name, params):
    labels = [row[response_name] for row in rows]
    best = None
    best_rank = None
    for col in sorted(schema, key=lambda c: c.name):
        if col.kind == "response":
            continue
        split = _evaluate_predictor(rows, col, labels, params)
        if split is None or split.adjusted_p > params.alpha_split:
            continue
        rank = (split.adjusted_p, split.raw_p, split.predictor)
        if best_rank is None or rank < best_rank:
            best, best_rank = split, rank
    return best


def best_split(d, params):
    """Strongest multiplicity-adjusted split of a dataset view, or None."""
    return _best_split(d.rows, d.schema, d.response_column.name, params)


def _route_category(split, value):
    """Merge-space category of a record value under a fitted split;
    None means take the missing route."""
    if split.kind == "continuous":
        if value is None:
            return None
        lo, hi = split.value_range
        if value < lo or value > hi:
            return None
        return bin_index(split.bin_edges, value)
    return value


def _child_index(node, value):
    split = node.split
    cat = _route_category(split, value)
    if cat is not None:
        for gi, group in enumerate(split.groups):
            if cat in group:
                return gi
        cat = None  # unseen category: fall through to the missing route
    for gi, group in enumerate(split.groups):
        if any(c is None for c in group):
            return gi
    sizes = [child.total for child in node.children]
    return sizes.index(max(sizes))


def _resolve_prediction(counts, class_labels, parent_label):
    top = max(counts)
    tied = [lab for lab, c in zip(class_labels, counts) if c == top]
    if len(tied) == 1:
        return tied[0]
    if parent_label in tied:
        return parent_label
    return tied[0]


def fit_chaid(train, params=ChaidParams()):
    """Grow the tree by recursive best-split search.

    Stops at max_depth, below min_parent rows, or when no predictor
    clears the adjusted significance bar.
    """
    if len(train.rows) < params.min_parent:
        raise TooFewRows(
            f"need at least min_parent={params.min_parent} rows, got {len(train.rows)}"
        )
    response = train.response_column.name
    if any(row[response] is None for row in train.rows):
        raise ValueError("training rows must have a non-missing response")
    class_labels = tuple(sorted({row[response] for row in train.rows}))

    def counts_of(rows):
        counts = [0] * len(class_labels)
        for row in rows:
            counts[class_labels.index(row[response])] += 1
        return tuple(counts)

    def grow(rows, depth, parent_label):
        counts = counts_of(rows)
        label = _resolve_prediction(counts, class_labels, parent_label)
        node = ChaidNode(class_counts=counts, depth=depth, prediction=label)
        if depth >= params.max_depth or len(rows) < params.min_parent:
            return node
        split = _best_split(rows, train.schema, response, params)
        if split is None:
            return node
        buckets = [[] for _ in split.groups]
        lookup = {}
        for gi, group in enumerate(split.groups):
            for cat in group:
                lookup[cat] = gi
        for row in rows:
            cat = _route_category(split, row[split.predictor])
            buckets[lookup[cat]].append(row)
        node.split = split
        node.children = tuple(
            grow(bucket, depth + 1, label) for bucket in buckets
        )
        return node

    root = grow(train.rows, 0, None)
    return ChaidTree(
        root=root,
        class_labels=class_labels,
        params=params,
        schema=list(train.schema),
        fingerprint=schema_fingerprint(train.schema),
        response_name=response,
    )


def _validate_record(tree, record):
    known = {c.name for c in tree.schema}
    unknown = set(record) - known
    if unknown:
        raise SchemaMismatch(f"unknown columns in record: {sorted(unknown)}")


def _leaf_for(tree, record):
    node = tree.root
    path = [node]
    while not node.is_leaf:
        node = node.children[_child_index(node, record.get(node.split.predictor))]
        path.append(node)
    return node, path


def predict_proba(tree, record):
    """Class distribution at the routed leaf (relative frequencies)."""
    _validate_record(tree, record)
    leaf, _ = _leaf_for(tree, record)
    total = leaf.total
    return {lab: c / total for lab, c in zip(tree.class_labels, leaf.class_counts)}


def predict(tree, record):
    _validate_record(tree, record)
    leaf, _ = _leaf_for(tree, record)
    return leaf.prediction


def score(tree, record, positive):
    """Probability of the positive class; the ROC ranking score."""
    return predict_proba(tree, record).get(positive, 0.0)


def describe_group(split, group):
    """Human-readable member list for one child group of a split."""
    names = []
    if split.kind == "continuous":
        edges = split.bin_edges
        bins = sorted((c for c in group if c is not None))
        runs = []
        for b in bins:
            if runs and b == runs[-1][1] + 1:
                runs[-1] = (runs[-1][0], b)
            else:
                runs.append((b, b))
        for lo_bin, hi_bin in runs:
            lo = f"> {edges[lo_bin - 1]:g}" if lo_bin > 0 else None
            hi = f"<= {edges[hi_bin]:g}" if hi_bin < len(edges) else None
            if lo and hi:
                names.append(f"{lo} and {hi}")
            elif lo:
                names.append(lo)
            elif hi:
                names.append(hi)
            else:
                names.append("any value")
    else:
        names.extend(str(c) for c in group if c is not None)
    if any(c is None for c in group):
        names.append("missing")
    return names


@dataclass(frozen=True)
class PathStep:
    predictor: Optional[str]
    group: Optional[tuple]
    class_counts: dict


def explain(tree, record):
    """Traversal trace: one step per internal node plus the leaf."""
    _validate_record(tree, record)
    leaf, path = _leaf_for(tree, record)
    steps = []
    for node, nxt in zip(path, path[1:]):
        gi = node.children.index(nxt)
        steps.append(
            PathStep(
                predictor=node.split.predictor,
                group=tuple(describe_group(node.split, node.split.groups[gi])),
                class_counts=dict(zip(tree.class_labels, node.class_counts)),
            )
        )
    steps.append(
        PathStep(
            predictor=None,
            group=None,
            class_counts=dict(zip(tree.class_labels, leaf.class_counts)),
        )
    )
    return steps
