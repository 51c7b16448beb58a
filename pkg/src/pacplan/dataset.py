"""Schema-driven tabular data: loading, cohort filtering, descriptive
statistics, crosstabs, stratified splitting, and numeric encoding.

A dataset is a list of row dicts (column name -> value) under an explicit
schema. Values are floats for continuous columns, strings otherwise, and
None marks missing. Datasets are treated as immutable once built; every
operation returns a new one and appends to the provenance history.
"""

import csv
import hashlib
import json
import math
import random
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    ClassTooSmall,
    EmptyCohort,
    HeaderMismatch,
    InsufficientData,
    NonBinaryResponse,
    RowArityError,
    SchemaError,
    SchemaMismatch,
    UnknownColumn,
    WrongKind,
)
from .numerics import ContingencyTable

KINDS = ("nominal", "ordinal", "continuous", "response")
MISSING_LABEL = "(missing)"
SCHEMA_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str
    ordered_levels: Optional[tuple] = None
    missing_tokens: tuple = ("",)
    plausible_range: Optional[tuple] = None  # (lo, hi) hint for input UIs

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "ordinal":
            levels = self.ordered_levels or ()
            if len(levels) < 2 or len(set(levels)) != len(levels):
                raise SchemaError(
                    f"ordinal column {self.name!r} needs >=2 unique ordered_levels"
                )

    def is_categorical(self):
        return self.kind in ("nominal", "ordinal", "response")


@dataclass(frozen=True)
class Provenance:
    source: str
    history: tuple = ()

    def appended(self, note):
        return Provenance(self.source, self.history + (note,))


@dataclass
class Dataset:
    schema: list
    rows: list
    provenance: Provenance

    def __post_init__(self):
        self._by_name = {c.name: c for c in self.schema}

    def column_schema(self, name):
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownColumn(name) from None

    @property
    def response_column(self):
        return next(c for c in self.schema if c.kind == "response")

    def column(self, name):
        self.column_schema(name)
        return [row[name] for row in self.rows]

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class CohortSpec:
    keep_response_values: frozenset
    drop_missing_response: bool = True
    drop_values: frozenset = frozenset()

    def __post_init__(self):
        if not self.keep_response_values:
            raise ValueError("keep_response_values must be non-empty")


@dataclass(frozen=True)
class StatsSummary:
    n: int
    min: float
    max: float
    range: float
    mean: float
    mean_std_error: Optional[float]
    std_dev: Optional[float]
    variance: Optional[float]
    skewness: Optional[float]
    skewness_std_error: Optional[float]
    kurtosis: Optional[float]
    kurtosis_std_error: Optional[float]


def validate_schema(schema):
    responses = [c for c in schema if c.kind == "response"]
    if len(responses) != 1:
        raise SchemaError(f"schema must have exactly 1 response column, found {len(responses)}")
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        raise SchemaError("duplicate column names in schema")
    return schema


def schema_from_document(doc):
    """Rebuild a schema from its versioned document form."""
    version = doc.get("format_version")
    if version != SCHEMA_FORMAT_VERSION:
        raise SchemaError(f"unsupported schema format_version {version!r}")
    cols = []
    for spec in doc["columns"]:
        cols.append(
            ColumnSchema(
                name=spec["name"],
                kind=spec["kind"],
                ordered_levels=tuple(spec["ordered_levels"]) if spec.get("ordered_levels") else None,
                missing_tokens=tuple(spec.get("missing_tokens", [""])),
                plausible_range=tuple(spec["plausible_range"]) if spec.get("plausible_range") else None,
            )
        )
    return validate_schema(cols)


def load_schema(path):
    """Read the sidecar schema document (versioned JSON)."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return schema_from_document(doc)


def schema_to_document(schema):
    cols = []
    for c in schema:
        entry = {"name": c.name, "kind": c.kind, "missing_tokens": list(c.missing_tokens)}
        if c.ordered_levels:
            entry["ordered_levels"] = list(c.ordered_levels)
        if c.plausible_range:
            entry["plausible_range"] = list(c.plausible_range)
        cols.append(entry)
    return {"format_version": SCHEMA_FORMAT_VERSION, "columns": cols}


def schema_fingerprint(schema):
    """Stable digest over (name, kind, ordered_levels) triples.

    Models record this at fit time so artifacts can refuse records from
    a different schema.
    """
    payload = [[c.name, c.kind, list(c.ordered_levels) if c.ordered_levels else None]
               for c in schema]
    blob = json.dumps(payload, sort_keys=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _parse_cell(text, col):
    if text in col.missing_tokens:
        return None
    if col.kind == "continuous":
        try:
            value = float(text)
        except ValueError:
            return None
        if not math.isfinite(value):
            return None
        return value
    return text


def load_dataset(path, schema):
    """Parse a UTF-8 CSV with header into a Dataset under the schema.

    Header must contain exactly the schema's column names (any order).
    Missing tokens and unparseable continuous cells become None.
    """
    validate_schema(schema)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise HeaderMismatch([c.name for c in schema], []) from None
        names = {c.name for c in schema}
        got = set(header)
        if got != names:
            raise HeaderMismatch(names - got, got - names)
        cols = [next(c for c in schema if c.name == h) for h in header]
        rows = []
        for idx, raw in enumerate(reader, start=2):
            if len(raw) != len(header):
                raise RowArityError(idx, len(header), len(raw))
            rows.append({col.name: _parse_cell(cell, col) for col, cell in zip(cols, raw)})
    return Dataset(list(schema), rows, Provenance(str(path)))


def filter_cohort(d, spec):
    """Keep rows whose response is in the spec's keep set.

    Rows with a missing response can never satisfy the keep set, so
    they are always dropped; drop_missing_response records that intent
    in provenance. drop_values wins over keep on overlap.
    """
    response = d.response_column.name
    seen = {row[response] for row in d.rows if row[response] is not None}
    unknown = spec.keep_response_values - seen
    if unknown and not spec.keep_response_values & seen:
        raise ValueError(f"keep_response_values not present in data: {sorted(unknown)}")
    keep = spec.keep_response_values - spec.drop_values
    rows = [row for row in d.rows if row[response] is not None and row[response] in keep]
    if not rows:
        raise EmptyCohort(f"no rows with response in {sorted(keep)}")
    note = (f"filter_cohort(keep={sorted(spec.keep_response_values)}, "
            f"drop={sorted(spec.drop_values)}, "
            f"drop_missing_response={spec.drop_missing_response})")
    return Dataset(d.schema, rows, d.provenance.appended(note))


def descriptive_stats(d, column):
    """SPSS-flavored univariate summary of a continuous column.

    Sample (n-1) standard deviation, adjusted Fisher-Pearson skewness
    G1 and excess kurtosis G2, with their small-sample standard errors.
    Fields whose formula needs more rows than available are None.
    """
    col = d.column_schema(column)
    if col.kind != "continuous":
        raise WrongKind(f"{column!r} is {col.kind}, need continuous")
    values = [v for v in d.column(column) if v is not None]
    n = len(values)
    if n == 0:
        raise InsufficientData(f"column {column!r} has no non-missing values")
    mean = sum(values) / n
    vmin, vmax = min(values), max(values)

    # moments over scaled deviations; skewness and kurtosis are scale
    # free, and raw deviations near 1e-160 would underflow the m2
    # powers in their denominators
    dev = [v - mean for v in values]
    scale = max(abs(x) for x in dev)
    if scale > 0:
        dev = [x / scale for x in dev]
    m2 = sum(x ** 2 for x in dev) / n
    m3 = sum(x ** 3 for x in dev) / n
    m4 = sum(x ** 4 for x in dev) / n

    std = var = mean_se = None
    skew = skew_se = kurt = kurt_se = None
    if n >= 2:
        var = n * m2 / (n - 1) * scale * scale
        std = math.sqrt(var)
        mean_se = std / math.sqrt(n)
    if n >= 3:
        skew_se = math.sqrt(6.0 * n * (n - 1) / ((n - 2) * (n + 1) * (n + 3)))
        if m2 > 0:
            g1 = m3 / m2 ** 1.5
            skew = g1 * math.sqrt(n * (n - 1)) / (n - 2)
    if n >= 4:
        kurt_se = 2.0 * skew_se * math.sqrt((n * n - 1) / ((n - 3) * (n + 5)))
        if m2 > 0:
            g2 = m4 / (m2 * m2) - 3.0
            kurt = ((n + 1) * g2 + 6.0) * (n - 1) / ((n - 2) * (n - 3))

    return StatsSummary(
        n=n, min=vmin, max=vmax, range=vmax - vmin, mean=mean,
        mean_std_error=mean_se, std_dev=std, variance=var,
        skewness=skew, skewness_std_error=skew_se,
        kurtosis=kurt, kurtosis_std_error=kurt_se,
    )


def _label_order(col, values):
    present = {v for v in values}
    has_missing = None in present
    present.discard(None)
    if col.kind == "ordinal":
        ordered = [lev for lev in col.ordered_levels if lev in present]
        extras = sorted(present - set(col.ordered_levels))
        labels = ordered + extras
    else:
        labels = sorted(present)
    if has_missing:
        labels.append(MISSING_LABEL)
    return labels


def crosstab(d, row_col, col_col):
    """Contingency table of two categorical columns.

    Missing values form their own row/column labeled "(missing)" when
    present. Percentages of the grand total come with the table.
    """
    rc = d.column_schema(row_col)
    cc = d.column_schema(col_col)
    for c in (rc, cc):
        if not c.is_categorical():
            raise WrongKind(f"{c.name!r} is {c.kind}, need a categorical column")
    rows = d.column(row_col)
    cols = d.column(col_col)
    pairs = [
        (MISSING_LABEL if r is None else r, MISSING_LABEL if c is None else c)
        for r, c in zip(rows, cols)
    ]
    return ContingencyTable.from_pairs(
        pairs,
        row_labels=_label_order(rc, rows),
        col_labels=_label_order(cc, cols),
    )


def _class_sort_key(value):
    return (value is None, str(value))


def split(d, train_fraction, seed):
    """Stratified train/test split, deterministic per seed.

    Per response class, floor(train_fraction * n_c) rows go to train,
    clamped to [1, n_c - 1]. Selected rows keep their original order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    response = d.response_column.name
    by_class = {}
    for i, row in enumerate(d.rows):
        by_class.setdefault(row[response], []).append(i)
    for label, idxs in by_class.items():
        if len(idxs) < 2:
            raise ClassTooSmall(label, len(idxs))
    rng = random.Random(seed)
    train_idx = set()
    for label in sorted(by_class, key=_class_sort_key):
        idxs = list(by_class[label])
        n_c = len(idxs)
        k = max(1, min(n_c - 1, math.floor(train_fraction * n_c)))
        rng.shuffle(idxs)
        train_idx.update(idxs[:k])
    train_rows = [row for i, row in enumerate(d.rows) if i in train_idx]
    test_rows = [row for i, row in enumerate(d.rows) if i not in train_idx]
    note = f"split(train_fraction={train_fraction}, seed={seed})"
    return (
        Dataset(d.schema, train_rows, d.provenance.appended(note + " [train]")),
        Dataset(d.schema, test_rows, d.provenance.appended(note + " [test]")),
    )


# --- numeric encoding ---------------------------------------------------

@dataclass(frozen=True)
class Encoder:
    """Fitted mapping from schema-typed records to numeric vectors.

    Continuous columns are z-standardized with training statistics and
    paired with a missing-indicator column; categorical columns one-hot
    over the training vocabulary plus a missing indicator. The response
    maps to +1 for the positive label, -1 otherwise.
    """

    feature_names: tuple
    plans: tuple  # per-column ("continuous", name, mean, std) | ("categorical", name, levels)
    positive_label: str
    negative_label: str
    response_name: str
    fingerprint: str

    def vector(self, record):
        """Encode one record dict (response not required)."""
        out = []
        for plan in self.plans:
            if plan[0] == "continuous":
                _, name, mean, std = plan
                value = record.get(name)
                if value is None:
                    out.extend((0.0, 1.0))
                else:
                    out.extend(((float(value) - mean) / std, 0.0))
            else:
                _, name, levels = plan
                value = record.get(name)
                onehot = [0.0] * (len(levels) + 1)
                if value is None:
                    onehot[-1] = 1.0
                else:
                    try:
                        onehot[levels.index(value)] = 1.0
                    except ValueError:
                        raise SchemaMismatch(
                            f"column {name!r}: value {value!r} not in training vocabulary"
                        ) from None
                out.extend(onehot)
        return np.array(out, dtype=float)

    def label(self, record):
        return 1 if record[self.response_name] == self.positive_label else -1

    def matrix(self, d):
        X = np.array([self.vector(row) for row in d.rows], dtype=float)
        y = np.array([self.label(row) for row in d.rows], dtype=int)
        return FeatureMatrix(X, y, self.feature_names, self)


@dataclass
class FeatureMatrix:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple
    encoder: Encoder


def fit_encoder(d, target_positive):
    """Learn encoding statistics and vocabularies from training data."""
    response = d.response_column.name
    classes = sorted({row[response] for row in d.rows}, key=_class_sort_key)
    if len(classes) != 2 or None in classes:
        raise NonBinaryResponse(
            f"need exactly 2 response values with none missing, got {classes}"
        )
    if target_positive not in classes:
        raise NonBinaryResponse(f"positive label {target_positive!r} not among {classes}")
    plans = []
    names = []
    for col in d.schema:
        if col.kind == "response":
            continue
        values = d.column(col.name)
        if col.kind == "continuous":
            present = [v for v in values if v is not None]
            mean = sum(present) / len(present) if present else 0.0
            if len(present) >= 2:
                var = sum((v - mean) ** 2 for v in present) / (len(present) - 1)
                std = math.sqrt(var)
            else:
                std = 0.0
            if std == 0.0:
                std = 1.0
            plans.append(("continuous", col.name, mean, std))
            names.extend((col.name, f"{col.name}={MISSING_LABEL}"))
        else:
            if col.kind == "ordinal":
                levels = tuple(lev for lev in col.ordered_levels
                               if lev in {v for v in values if v is not None})
            else:
                levels = tuple(sorted({v for v in values if v is not None}))
            plans.append(("categorical", col.name, levels))
            names.extend(f"{col.name}={lev}" for lev in levels)
            names.append(f"{col.name}={MISSING_LABEL}")
    return Encoder(
        feature_names=tuple(names),
        plans=tuple(plans),
        positive_label=target_positive,
        negative_label=next(c for c in classes if c != target_positive),
        response_name=response,
        fingerprint=schema_fingerprint(d.schema),
    )


def encode(d, target_positive):
    """Fit an encoder on d and return the encoded matrix."""
    return fit_encoder(d, target_positive).matrix(d)
