import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pacplan.chaid import (
    ChaidNode,
    ChaidParams,
    ChaidTree,
    Split,
    best_split,
    bin_index,
    explain,
    fit_chaid,
    merge_categories,
    predict,
    predict_proba,
    quantile_edges,
    score,
)
from pacplan.dataset import ColumnSchema, Dataset, Provenance, schema_fingerprint
from pacplan.errors import SchemaMismatch, TooFewRows

XY_SCHEMA = [
    ColumnSchema("x", "continuous"),
    ColumnSchema("disp", "response"),
]


def make(rows, schema):
    return Dataset(schema, rows, Provenance("<test>"))


def separable(n=60, seed=1, schema=None, lo=-10.0, hi=10.0):
    rng = random.Random(seed)
    rows = [{"x": rng.uniform(lo, -0.5), "disp": "A"} for _ in range(n // 2)]
    rows += [{"x": rng.uniform(0.5, hi), "disp": "B"} for _ in range(n - n // 2)]
    rng.shuffle(rows)
    return make(rows, schema or XY_SCHEMA)


class TestParams:
    def test_defaults_valid(self):
        p = ChaidParams()
        assert p.alpha_merge == 0.05 and p.min_child <= p.min_parent

    def test_rejects_bad(self):
        with pytest.raises(ValueError):
            ChaidParams(alpha_merge=0.0)
        with pytest.raises(ValueError):
            ChaidParams(min_parent=5, min_child=6)
        with pytest.raises(ValueError):
            ChaidParams(continuous_bins=1)


class TestQuantileEdges:
    def test_even_split(self):
        edges = quantile_edges([1, 2, 3, 4], 4)
        assert edges == (1, 2, 3)

    def test_dedupes(self):
        edges = quantile_edges([1, 1, 1, 4], 4)
        assert edges == (1,)

    def test_constant_column(self):
        assert quantile_edges([5, 5, 5], 10) == (5,)

    def test_bin_index_boundaries(self):
        edges = (1.0, 2.0, 3.0)
        assert bin_index(edges, 0.5) == 0
        assert bin_index(edges, 1.0) == 0
        assert bin_index(edges, 1.5) == 1
        assert bin_index(edges, 3.0) == 2
        assert bin_index(edges, 9.0) == 3


def counted(spec):
    """Expand {category: (n_pos, n_neg)} into (category, label) pairs."""
    pairs = []
    for cat, (pos, neg) in spec.items():
        pairs += [(cat, "pos")] * pos + [(cat, "neg")] * neg
    return pairs


class TestMergeCategories:
    def test_identical_distributions_merge(self):
        pairs = counted({"A": (10, 10), "B": (10, 10)})
        assert merge_categories(pairs, "nominal", 0.05, 7) == (("A", "B"),)

    def test_similar_pair_merges_outlier_stays(self):
        pairs = counted({"A": (20, 20), "B": (20, 20), "C": (0, 40)})
        assert merge_categories(pairs, "nominal", 0.05, 7) == (("A", "B"), ("C",))

    def test_single_category(self):
        assert merge_categories([("A", "pos")], "nominal", 0.05, 1) == (("A",),)

    def test_ordinal_adjacency_respected(self):
        # 1 and 3 look alike but 2 sits between them and differs from both
        pairs = counted({1: (30, 0), 2: (0, 30), 3: (30, 0)})
        groups = merge_categories(pairs, "ordinal", 0.05, 7)
        assert groups == ((1,), (2,), (3,))

    def test_nominal_allows_distant_merge(self):
        pairs = counted({1: (30, 0), 2: (0, 30), 3: (30, 0)})
        groups = merge_categories(pairs, "nominal", 0.05, 7)
        assert (1, 3) in groups

    def test_missing_floats_past_ordinal_order(self):
        # missing matches the high end, not its lexical neighbor
        pairs = counted({1: (30, 0), 2: (0, 30), None: (0, 28)})
        groups = merge_categories(pairs, "ordinal", 0.05, 7)
        assert (None, 2) in groups

    def test_undersized_group_repaired(self):
        pairs = counted({"A": (50, 0), "B": (0, 50), "C": (3, 3)})
        groups = merge_categories(pairs, "nominal", 0.05, 7)
        assert len(groups) == 2
        sizes = {g: sum(1 for c in g) for g in groups}
        assert all("C" in g or len(g) == 1 for g in groups)

    def test_never_increases_groups(self):
        pairs = counted({"A": (5, 5), "B": (4, 6), "C": (6, 4), "D": (5, 5)})
        groups = merge_categories(pairs, "nominal", 0.05, 1)
        assert len(groups) <= 4

    @given(
        st.dictionaries(
            st.sampled_from(["A", "B", "C", "D", None]),
            st.tuples(st.integers(0, 12), st.integers(0, 12)).filter(lambda t: sum(t) > 0),
            min_size=1,
            max_size=5,
        ),
        st.sampled_from(["nominal", "ordinal"]),
    )
    @settings(max_examples=60, deadline=None)
    def test_partition_property(self, spec, kind):
        if kind == "ordinal":
            spec = {
                (k if k is None else "ABCD".index(k)): v for k, v in spec.items()
            }
        pairs = counted(spec)
        groups = merge_categories(pairs, kind, 0.05, 1)
        members = [c for g in groups for c in g]
        assert sorted(members, key=lambda c: (c is None, str(c))) == sorted(
            spec, key=lambda c: (c is None, str(c))
        )
        assert len(members) == len(set(members))

    def test_deterministic(self):
        pairs = counted({"A": (5, 5), "B": (5, 5), "C": (5, 5)})
        assert merge_categories(pairs, "nominal", 0.05, 1) == merge_categories(
            pairs, "nominal", 0.05, 1
        )


class TestBestSplit:
    def test_perfect_binary_predictor(self):
        schema = [ColumnSchema("flag", "nominal"), ColumnSchema("disp", "response")]
        rows = [{"flag": "on", "disp": "A"} for _ in range(50)]
        rows += [{"flag": "off", "disp": "B"} for _ in range(50)]
        s = best_split(make(rows, schema), ChaidParams())
        assert s is not None and s.predictor == "flag"
        assert len(s.groups) == 2
        assert s.adjusted_p < 1e-15

    def test_independent_predictor_rejected(self):
        # the weak 26/24 vs 24/26 contingency: raw p ~ 0.69
        schema = [ColumnSchema("flag", "nominal"), ColumnSchema("disp", "response")]
        rows = [{"flag": "on", "disp": "A"} for _ in range(26)]
        rows += [{"flag": "on", "disp": "B"} for _ in range(24)]
        rows += [{"flag": "off", "disp": "A"} for _ in range(24)]
        rows += [{"flag": "off", "disp": "B"} for _ in range(26)]
        assert best_split(make(rows, schema), ChaidParams()) is None

    def test_prefers_stronger_predictor(self):
        schema = [
            ColumnSchema("strong", "nominal"),
            ColumnSchema("weak", "nominal"),
            ColumnSchema("disp", "response"),
        ]
        rng = random.Random(3)
        rows = []
        for i in range(120):
            disp = "A" if i % 2 == 0 else "B"
            strong = "s1" if disp == "A" else "s2"
            weak = ("w1" if disp == "A" else "w2") if rng.random() < 0.7 else rng.choice(["w1", "w2"])
            rows.append({"strong": strong, "weak": weak, "disp": disp})
        s = best_split(make(rows, schema), ChaidParams())
        assert s.predictor == "strong"

    def test_min_child_blocks_tiny_groups(self):
        schema = [ColumnSchema("flag", "nominal"), ColumnSchema("disp", "response")]
        # the only significant grouping would isolate 3 rows
        rows = [{"flag": "rare", "disp": "A"} for _ in range(3)]
        rows += [{"flag": "common", "disp": "A"} for _ in range(10)]
        rows += [{"flag": "common", "disp": "B"} for _ in range(10)]
        s = best_split(make(rows, schema), ChaidParams(min_parent=20, min_child=7))
        assert s is None


class TestFitChaid:
    def test_separable_depth_one(self):
        d = separable(60)
        tree = fit_chaid(d, ChaidParams())
        assert tree.root.split is not None
        assert all(child.is_leaf for child in tree.root.children)
        acc = sum(predict(tree, r) == r["disp"] for r in d.rows) / len(d.rows)
        assert acc == 1.0

    def test_no_signal_root_only(self):
        schema = [ColumnSchema("flag", "nominal"), ColumnSchema("disp", "response")]
        rows = [{"flag": "on", "disp": "A"} for _ in range(26)]
        rows += [{"flag": "on", "disp": "B"} for _ in range(24)]
        rows += [{"flag": "off", "disp": "A"} for _ in range(24)]
        rows += [{"flag": "off", "disp": "B"} for _ in range(26)]
        tree = fit_chaid(make(rows, schema), ChaidParams())
        assert tree.root.is_leaf
        assert predict(tree, {"flag": "on"}) == "A"  # 50/50 tie -> label order

    def test_too_few_rows(self):
        with pytest.raises(TooFewRows):
            fit_chaid(separable(10), ChaidParams(min_parent=20))

    def test_refit_identical(self):
        d = separable(120, seed=7)
        a = fit_chaid(d, ChaidParams())
        b = fit_chaid(d, ChaidParams())
        assert a.root == b.root
        assert a.class_labels == b.class_labels

    def test_child_counts_sum_to_parent(self):
        d = separable(200, seed=9)
        tree = fit_chaid(d, ChaidParams(max_depth=4, min_parent=10, min_child=3))

        def walk(node):
            if node.is_leaf:
                return
            assert sum(c.total for c in node.children) == node.total
            for c in node.children:
                walk(c)

        walk(tree.root)

    def test_max_depth_zero(self):
        d = separable(60)
        tree = fit_chaid(d, ChaidParams(max_depth=0))
        assert tree.root.is_leaf

    def test_labeled_rows_required(self):
        d = make(
            [{"x": 1.0, "disp": None}] + separable(40).rows,
            XY_SCHEMA,
        )
        with pytest.raises(ValueError):
            fit_chaid(d, ChaidParams())

    def test_monotone_transform_invariance(self):
        d = separable(150, seed=21)

        def skeleton(node):
            if node.is_leaf:
                return ("leaf", node.class_counts)
            return (
                node.split.predictor,
                node.split.groups,
                node.class_counts,
                tuple(skeleton(c) for c in node.children),
            )

        base = fit_chaid(d, ChaidParams(max_depth=3, min_parent=10, min_child=3))
        for transform in (lambda v: v ** 3, lambda v: math.exp(v / 5.0), lambda v: 3.0 * v + 40.0):
            morph = make(
                [{"x": transform(r["x"]), "disp": r["disp"]} for r in d.rows],
                XY_SCHEMA,
            )
            other = fit_chaid(morph, ChaidParams(max_depth=3, min_parent=10, min_child=3))
            assert skeleton(other.root) == skeleton(base.root)
            for r_base, r_morph in zip(d.rows, morph.rows):
                assert predict(base, r_base) == predict(other, r_morph)

    def test_label_permutation_mostly_no_split(self):
        # smoke-sized version; the full 100-seed run lives in acceptance
        schema = [
            ColumnSchema("a", "continuous"),
            ColumnSchema("b", "continuous"),
            ColumnSchema("disp", "response"),
        ]
        splits = 0
        for seed in range(25):
            rng = random.Random(seed)
            labels = ["A"] * 60 + ["B"] * 140
            rng.shuffle(labels)
            rows = [
                {"a": rng.gauss(0, 1), "b": rng.gauss(5, 2), "disp": lab}
                for lab in labels
            ]
            tree = fit_chaid(make(rows, schema), ChaidParams())
            splits += 0 if tree.root.is_leaf else 1
        assert splits <= 6


def hand_tree():
    """Two-level tree built directly: split on x at 0, left child splits
    on flag."""
    schema = [
        ColumnSchema("x", "continuous"),
        ColumnSchema("flag", "nominal"),
        ColumnSchema("disp", "response"),
    ]
    leaf_ll = ChaidNode(class_counts=(8, 2), depth=2, prediction="A")
    leaf_lr = ChaidNode(class_counts=(1, 9), depth=2, prediction="B")
    left = ChaidNode(
        class_counts=(9, 11),
        depth=1,
        prediction="B",
        split=Split(
            predictor="flag",
            groups=(("on",), (None, "off")),
            adjusted_p=0.01,
            raw_p=0.01,
            statistic=5.0,
            kind="nominal",
        ),
        children=(leaf_ll, leaf_lr),
    )
    right = ChaidNode(class_counts=(3, 7), depth=1, prediction="B")
    root = ChaidNode(
        class_counts=(12, 18),
        depth=0,
        prediction="B",
        split=Split(
            predictor="x",
            groups=((0,), (1,)),
            adjusted_p=0.001,
            raw_p=0.001,
            statistic=9.0,
            kind="continuous",
            bin_edges=(0.0,),
            value_range=(-5.0, 5.0),
        ),
        children=(left, right),
    )
    return ChaidTree(
        root=root,
        class_labels=("A", "B"),
        params=ChaidParams(),
        schema=schema,
        fingerprint=schema_fingerprint(schema),
        response_name="disp",
    )


class TestPredict:
    def test_leaf_relative_frequencies(self):
        tree = hand_tree()
        proba = predict_proba(tree, {"x": 3.0})
        assert proba == {"A": 0.3, "B": 0.7}

    def test_distribution_sums_to_one(self):
        tree = hand_tree()
        for record in ({"x": -1.0, "flag": "on"}, {"x": 2.0}, {}):
            proba = predict_proba(tree, record)
            assert sum(proba.values()) == pytest.approx(1.0, abs=1e-12)
            assert all(v >= 0 for v in proba.values())

    def test_root_only_prior(self):
        d = separable(40)
        tree = fit_chaid(d, ChaidParams(max_depth=0))
        proba = predict_proba(tree, {"x": 123.0})
        assert proba == {"A": 0.5, "B": 0.5}

    def test_missing_routes_to_floating_group(self):
        tree = hand_tree()
        # left node's second group carries the missing marker
        proba = predict_proba(tree, {"x": -1.0, "flag": None})
        assert proba == {"A": 0.1, "B": 0.9}

    def test_missing_without_floating_group_goes_to_largest(self):
        tree = hand_tree()
        # root split has no missing group; left child is larger (20 v 10),
        # and once there the missing flag takes the floating group
        assert predict_proba(tree, {}) == {"A": 0.1, "B": 0.9}

    def test_unseen_category_follows_missing_route(self):
        tree = hand_tree()
        proba = predict_proba(tree, {"x": -1.0, "flag": "sideways"})
        assert proba == {"A": 0.1, "B": 0.9}

    def test_out_of_range_continuous(self):
        tree = hand_tree()
        # beyond fit range: no floating group at root, largest child wins
        assert predict_proba(tree, {"x": 50.0}) == predict_proba(tree, {})

    def test_tie_breaks_to_parent_majority(self):
        leaf = ChaidNode(class_counts=(5, 5), depth=1, prediction="B")
        # prediction was resolved during fit toward the 0.3/0.7 parent
        assert leaf.prediction == "B"

    def test_schema_mismatch(self):
        tree = hand_tree()
        with pytest.raises(SchemaMismatch):
            predict_proba(tree, {"x": 1.0, "bogus": 2.0})

    def test_score_is_positive_probability(self):
        tree = hand_tree()
        assert score(tree, {"x": 3.0}, "A") == pytest.approx(0.3)
        assert score(tree, {"x": 3.0}, "B") == pytest.approx(0.7)


class TestExplain:
    def test_depth_two_path(self):
        tree = hand_tree()
        steps = explain(tree, {"x": -1.0, "flag": "on"})
        assert len(steps) == 3
        assert steps[0].predictor == "x"
        assert steps[1].predictor == "flag"
        assert steps[2].predictor is None
        assert steps[2].class_counts == {"A": 8, "B": 2}

    def test_group_descriptions(self):
        tree = hand_tree()
        steps = explain(tree, {"x": -1.0, "flag": None})
        assert steps[0].group == ("<= 0",)
        assert steps[1].group == ("off", "missing")

    def test_root_only(self):
        d = separable(40)
        tree = fit_chaid(d, ChaidParams(max_depth=0))
        steps = explain(tree, {"x": 1.0})
        assert len(steps) == 1 and steps[0].predictor is None
