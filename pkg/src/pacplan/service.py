"""HTTP façade over a single loaded model artifact.

One process serves one immutable artifact: model metadata for form
building, per-record prediction with an explanation path and a
prior-authorization recommendation, and the discharge-flow what-if
calculator. All error responses are JSON {error, detail}.
"""

import math
from typing import Any, Dict

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import chaid
from .artifacts import read_artifact
from .baselines import tree_path
from .errors import PacplanError, SchemaMismatch, UnknownColumn
from .flowsim import cost_savings, los_reduction, round2

# dispositions whose prediction should trigger starting insurance
# authorization on day one
AUTHORIZATION_PLACEMENTS = frozenset({"Rehab Facility", "Skilled Nursing Facility"})

RECOMMEND_START = "initiate_prior_authorization"
RECOMMEND_NONE = "none"


class PredictBody(BaseModel):
    features: Dict[str, Any]


class SimulateBody(BaseModel):
    pac_service_days: float
    authorization_days: float
    ownership: str


def coerce_features(schema, features):
    """Validate a client feature map against the schema, to a record dict.

    Continuous values must be finite numbers (numeric strings accepted),
    categorical values must be strings; null means missing. Unknown
    names, the response column, and untypeable values are rejected.
    """
    by_name = {c.name: c for c in schema}
    record = {}
    for name, value in features.items():
        col = by_name.get(name)
        if col is None:
            raise UnknownColumn(f"unknown feature {name!r}")
        if col.kind == "response":
            raise UnknownColumn(f"{name!r} is the response, not a feature")
        if value is None:
            record[name] = None
        elif col.kind == "continuous":
            if isinstance(value, bool):
                raise SchemaMismatch(f"column {name!r}: expected a number, got a boolean")
            try:
                number = float(value)
            except (TypeError, ValueError):
                raise SchemaMismatch(f"column {name!r}: {value!r} is not a number") from None
            if not math.isfinite(number):
                raise SchemaMismatch(f"column {name!r}: value must be finite")
            record[name] = number
        else:
            if not isinstance(value, str):
                raise SchemaMismatch(f"column {name!r}: expected a level name, got {value!r}")
            record[name] = value
    return record


def _explanation(artifact, record):
    if artifact.kind == "chaid":
        return [
            {
                "predictor": step.predictor,
                "group": list(step.group) if step.group is not None else None,
                "class_counts": step.class_counts,
            }
            for step in chaid.explain(artifact.model, record)
        ]
    if artifact.kind in ("cart", "rtree"):
        return [
            {
                "predictor": feature,
                "group": [condition] if condition is not None else None,
                "class_counts": counts,
            }
            for feature, condition, counts in tree_path(artifact.model, record)
        ]
    return None


def _sigmoid(g):
    # numerically safe logistic; equals 1/(1+exp(-g))
    return 0.5 * (1.0 + math.tanh(0.5 * g))


def prediction_response(artifact, features):
    """Build the full prediction document for one feature map.

    Shared by the HTTP route and the command line so both emit
    field-identical results.
    """
    record = coerce_features(artifact.schema, features)
    model = artifact.model
    kind = artifact.kind
    probabilities = None
    scores = None
    if kind == "chaid":
        probabilities = chaid.predict_proba(model, record)
        disposition = chaid.predict(model, record)
    elif kind in ("cart", "rtree"):
        positive = model.positive_label
        negative = next(l for l in model.class_labels if l != positive)
        s = model.score(record)
        probabilities = {positive: s, negative: 1.0 - s}
        disposition = model.predict(record)
    elif kind == "lda":
        positive = model.positive_label
        negative = model.encoder.negative_label
        p = _sigmoid(model.score(record))
        probabilities = {positive: p, negative: 1.0 - p}
        disposition = model.predict(record)
    else:
        positive = model.positive_label
        negative = model.encoder.negative_label
        margin = model.score(record)
        scores = {positive: margin, negative: -margin}
        disposition = model.predict(record)
    recommendation = (
        RECOMMEND_START if disposition in AUTHORIZATION_PLACEMENTS else RECOMMEND_NONE
    )
    return {
        "disposition": disposition,
        "probabilities": probabilities,
        "scores": scores,
        "explanation": _explanation(artifact, record),
        "recommendation": recommendation,
    }


def model_document(artifact):
    """Metadata for GET /api/v1/model; enough to build an input form."""
    model = artifact.model
    class_labels = getattr(model, "class_labels", None)
    if class_labels is None:
        enc = model.encoder
        class_labels = tuple(sorted((enc.positive_label, enc.negative_label)))
    positive = getattr(model, "positive_label", None) or artifact.training.get("positive")
    response_name = getattr(model, "response_name", None) or model.encoder.response_name
    columns = [
        {
            "name": c.name,
            "kind": c.kind,
            "ordered_levels": list(c.ordered_levels) if c.ordered_levels else None,
            "plausible_range": list(c.plausible_range) if c.plausible_range else None,
        }
        for c in artifact.schema
        if c.kind != "response"
    ]
    return {
        "kind": artifact.kind,
        "format_version": artifact.format_version,
        "fingerprint": artifact.fingerprint,
        "response_name": response_name,
        "class_labels": list(class_labels),
        "positive_label": positive,
        "params": artifact.params,
        "training": artifact.training,
        "columns": columns,
    }


def simulate_response(pac_service_days, authorization_days, ownership):
    days, percent = los_reduction(pac_service_days, authorization_days)
    dollars = cost_savings(days, ownership)
    return {
        "days_saved": round2(days),
        "percent": round2(percent),
        "dollars": round2(dollars),
    }


_STATUS_LABELS = {
    400: "malformed_body",
    404: "not_found",
    405: "method_not_allowed",
    422: "unprocessable",
}


def _error_json(status, detail):
    label = _STATUS_LABELS.get(status, "http_error")
    return JSONResponse(status_code=status, content={"error": label, "detail": detail})


def create_app(artifact):
    """Build the application for one parsed artifact."""
    app = FastAPI(openapi_url=None, docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request, exc):
        return _error_json(400, "malformed request body")

    @app.exception_handler(StarletteHTTPException)
    async def on_http_error(request, exc):
        return _error_json(exc.status_code, str(exc.detail))

    @app.get("/healthz")
    async def healthz():
        return PlainTextResponse("ok")

    @app.get("/api/v1/model")
    async def model_meta():
        return model_document(artifact)

    @app.post("/api/v1/predict")
    async def predict(body: PredictBody):
        try:
            return prediction_response(artifact, body.features)
        except (UnknownColumn, SchemaMismatch) as exc:
            return _error_json(422, str(exc))

    @app.post("/api/v1/simulate")
    async def simulate(body: SimulateBody):
        try:
            return simulate_response(
                body.pac_service_days, body.authorization_days, body.ownership
            )
        except (PacplanError, ValueError) as exc:
            return _error_json(422, str(exc))

    return app


def serve(model_path, port, host="127.0.0.1"):
    """Load an artifact and block serving it."""
    import uvicorn

    app = create_app(read_artifact(model_path))
    uvicorn.run(app, host=host, port=port, log_level="warning")
