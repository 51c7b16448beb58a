"""Versioned on-disk model persistence.

Artifacts are single JSON documents: format version, model kind tag, a
checksum over the canonical payload encoding, and the payload itself
(schema document, hyperparameters, fitted parameters, training
metadata). JSON keeps them human-inspectable and diffable, which a
clinical deployment needs more than compactness. Floats survive the
repr round-trip exactly, so a loaded model predicts identically and
save -> load -> save is byte-identical.
"""

import dataclasses
import hashlib
import json

import numpy as np

from .baselines import LdaModel, SvmModel, SvmParams, TreeModel, TreeNode, TreeParams
from .chaid import ChaidNode, ChaidParams, ChaidTree, Split
from .dataset import Encoder, schema_fingerprint, schema_from_document, schema_to_document
from .errors import CorruptArtifact, SchemaFingerprintMismatch, UnsupportedVersion
from .evaluation import model_name

ARTIFACT_FORMAT_VERSION = 1


@dataclasses.dataclass(frozen=True)
class Artifact:
    """A parsed artifact file: the model plus its surrounding metadata."""

    format_version: int
    kind: str
    fingerprint: str
    schema: list
    params: dict
    training: dict
    model: object


def _canonical(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _checksum(payload):
    return hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()


# --- kind-specific codecs -------------------------------------------------

def _split_payload(split):
    if split is None:
        return None
    return {
        "predictor": split.predictor,
        "groups": [list(g) for g in split.groups],
        "adjusted_p": split.adjusted_p,
        "raw_p": split.raw_p,
        "statistic": split.statistic,
        "kind": split.kind,
        "bin_edges": list(split.bin_edges) if split.bin_edges is not None else None,
        "value_range": list(split.value_range) if split.value_range is not None else None,
    }


def _split_restore(doc):
    if doc is None:
        return None
    return Split(
        predictor=doc["predictor"],
        groups=tuple(tuple(g) for g in doc["groups"]),
        adjusted_p=doc["adjusted_p"],
        raw_p=doc["raw_p"],
        statistic=doc["statistic"],
        kind=doc["kind"],
        bin_edges=tuple(doc["bin_edges"]) if doc["bin_edges"] is not None else None,
        value_range=tuple(doc["value_range"]) if doc["value_range"] is not None else None,
    )


def _chaid_node_payload(node):
    return {
        "class_counts": list(node.class_counts),
        "depth": node.depth,
        "prediction": node.prediction,
        "split": _split_payload(node.split),
        "children": [_chaid_node_payload(c) for c in node.children],
    }


def _chaid_node_restore(doc):
    return ChaidNode(
        class_counts=tuple(doc["class_counts"]),
        depth=doc["depth"],
        prediction=doc["prediction"],
        split=_split_restore(doc["split"]),
        children=tuple(_chaid_node_restore(c) for c in doc["children"]),
    )


def _chaid_payload(tree):
    return {
        "root": _chaid_node_payload(tree.root),
        "class_labels": list(tree.class_labels),
        "response_name": tree.response_name,
    }


def _chaid_restore(doc, schema, fingerprint, params):
    return ChaidTree(
        root=_chaid_node_restore(doc["root"]),
        class_labels=tuple(doc["class_labels"]),
        params=ChaidParams(**params),
        schema=schema,
        fingerprint=fingerprint,
        response_name=doc["response_name"],
    )


def _tree_node_payload(node):
    if node is None:
        return None
    return {
        "class_counts": list(node.class_counts),
        "feature": node.feature,
        "kind": node.kind,
        "threshold": node.threshold,
        "left_categories": list(node.left_categories) if node.left_categories is not None else None,
        "left": _tree_node_payload(node.left),
        "right": _tree_node_payload(node.right),
    }


def _tree_node_restore(doc):
    if doc is None:
        return None
    return TreeNode(
        class_counts=tuple(doc["class_counts"]),
        feature=doc["feature"],
        kind=doc["kind"],
        threshold=doc["threshold"],
        left_categories=tuple(doc["left_categories"]) if doc["left_categories"] is not None else None,
        left=_tree_node_restore(doc["left"]),
        right=_tree_node_restore(doc["right"]),
    )


def _tree_payload(model):
    return {
        "root": _tree_node_payload(model.root),
        "class_labels": list(model.class_labels),
        "positive_label": model.positive_label,
        "response_name": model.response_name,
        "algorithm": model.algorithm,
    }


def _tree_restore(doc, schema, fingerprint, params):
    return TreeModel(
        root=_tree_node_restore(doc["root"]),
        class_labels=tuple(doc["class_labels"]),
        positive_label=doc["positive_label"],
        params=TreeParams(**params),
        schema=schema,
        fingerprint=fingerprint,
        response_name=doc["response_name"],
        algorithm=doc["algorithm"],
    )


def _encoder_payload(encoder):
    plans = []
    for plan in encoder.plans:
        if plan[0] == "continuous":
            plans.append(["continuous", plan[1], plan[2], plan[3]])
        else:
            plans.append(["categorical", plan[1], list(plan[2])])
    return {
        "feature_names": list(encoder.feature_names),
        "plans": plans,
        "positive_label": encoder.positive_label,
        "negative_label": encoder.negative_label,
        "response_name": encoder.response_name,
    }


def _encoder_restore(doc, fingerprint):
    plans = []
    for plan in doc["plans"]:
        if plan[0] == "continuous":
            plans.append(("continuous", plan[1], plan[2], plan[3]))
        else:
            plans.append(("categorical", plan[1], tuple(plan[2])))
    return Encoder(
        feature_names=tuple(doc["feature_names"]),
        plans=tuple(plans),
        positive_label=doc["positive_label"],
        negative_label=doc["negative_label"],
        response_name=doc["response_name"],
        fingerprint=fingerprint,
    )


def _lda_payload(model):
    return {
        "weights": [float(w) for w in model.weights],
        "bias": model.bias,
        "mean_pos": [float(v) for v in model.mean_pos],
        "mean_neg": [float(v) for v in model.mean_neg],
        "log_prior_pos": model.log_prior_pos,
        "log_prior_neg": model.log_prior_neg,
        "shrinkage": model.shrinkage,
        "encoder": _encoder_payload(model.encoder),
    }


def _lda_restore(doc, schema, fingerprint, params):
    return LdaModel(
        weights=np.array(doc["weights"], dtype=float),
        bias=doc["bias"],
        mean_pos=np.array(doc["mean_pos"], dtype=float),
        mean_neg=np.array(doc["mean_neg"], dtype=float),
        log_prior_pos=doc["log_prior_pos"],
        log_prior_neg=doc["log_prior_neg"],
        shrinkage=doc["shrinkage"],
        encoder=_encoder_restore(doc["encoder"], fingerprint),
    )


def _svm_payload(model):
    return {
        "weights": [float(w) for w in model.weights],
        "bias": model.bias,
        "encoder": _encoder_payload(model.encoder),
    }


def _svm_restore(doc, schema, fingerprint, params):
    return SvmModel(
        weights=np.array(doc["weights"], dtype=float),
        bias=doc["bias"],
        params=SvmParams(**params),
        encoder=_encoder_restore(doc["encoder"], fingerprint),
    )


_PAYLOAD_BUILDERS = {
    "chaid": _chaid_payload,
    "lda": _lda_payload,
    "cart": _tree_payload,
    "rtree": _tree_payload,
    "lsvm": _svm_payload,
}

_RESTORERS = {
    "chaid": _chaid_restore,
    "lda": _lda_restore,
    "cart": _tree_restore,
    "rtree": _tree_restore,
    "lsvm": _svm_restore,
}


def _model_schema(model, schema):
    if schema is not None:
        return schema
    found = getattr(model, "schema", None)
    if found is None:
        raise ValueError("this model kind does not carry a schema; pass schema=")
    return found


def _model_fingerprint(model):
    direct = getattr(model, "fingerprint", None)
    if direct is not None:
        return direct
    return model.encoder.fingerprint


def _model_params(model):
    params = getattr(model, "params", None)
    if params is not None:
        return dataclasses.asdict(params)
    return {"shrinkage": model.shrinkage}


def save_model(model, path, schema=None, training=None):
    """Write the model as a versioned JSON artifact; returns the document."""
    kind = model_name(model)
    schema = _model_schema(model, schema)
    fingerprint = _model_fingerprint(model)
    if schema_fingerprint(schema) != fingerprint:
        raise SchemaFingerprintMismatch(
            "schema does not match the schema this model was fitted on"
        )
    payload = {
        "schema": schema_to_document(schema),
        "fingerprint": fingerprint,
        "params": _model_params(model),
        "training": dict(training or {}),
        "model": _PAYLOAD_BUILDERS[kind](model),
    }
    document = {
        "format_version": ARTIFACT_FORMAT_VERSION,
        "kind": kind,
        "checksum": _checksum(payload),
        "payload": payload,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return document


def read_artifact(path):
    """Parse and verify an artifact file without dropping its metadata."""
    try:
        with open(path, encoding="utf-8") as fh:
            document = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptArtifact(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(document, dict):
        raise CorruptArtifact(f"{path}: artifact must be a JSON object")
    version = document.get("format_version")
    if version != ARTIFACT_FORMAT_VERSION:
        raise UnsupportedVersion(
            f"artifact format_version {version!r}, this build reads {ARTIFACT_FORMAT_VERSION}"
        )
    try:
        kind = document["kind"]
        checksum = document["checksum"]
        payload = document["payload"]
    except KeyError as exc:
        raise CorruptArtifact(f"{path}: missing field {exc}") from None
    if kind not in _RESTORERS:
        raise CorruptArtifact(f"{path}: unknown model kind {kind!r}")
    if _checksum(payload) != checksum:
        raise CorruptArtifact(f"{path}: checksum mismatch")
    try:
        schema = schema_from_document(payload["schema"])
        fingerprint = payload["fingerprint"]
        if schema_fingerprint(schema) != fingerprint:
            raise CorruptArtifact(f"{path}: fingerprint does not match stored schema")
        model = _RESTORERS[kind](payload["model"], schema, fingerprint, payload["params"])
    except CorruptArtifact:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptArtifact(f"{path}: malformed payload ({exc})") from None
    return Artifact(
        format_version=version,
        kind=kind,
        fingerprint=fingerprint,
        schema=schema,
        params=dict(payload["params"]),
        training=dict(payload["training"]),
        model=model,
    )


def load_model(path):
    """Reconstruct just the model from an artifact file."""
    return read_artifact(path).model


def ensure_fingerprint(model, schema):
    """Refuse to score a model against data from a different schema."""
    expected = _model_fingerprint(model)
    actual = schema_fingerprint(schema)
    if expected != actual:
        raise SchemaFingerprintMismatch(
            f"model was fitted on schema {expected[:12]}..., data uses {actual[:12]}..."
        )
