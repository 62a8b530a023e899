"""Model persistence: versioned JSON text with an exact float round-trip.

Layout: one JSON object {"format_version": 1, "kind": <model kind>,
"payload": {...}} ending in a newline. Floats are serialized via repr and
reload bit-exactly, so a saved model reproduces every prediction.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import LinesiftError

FORMAT_VERSION = 1


def _registry():
    from .linear import LinearSvmModel, LogisticRegressionModel
    from .tree import RandomForestModel

    return {
        "random_forest": RandomForestModel,
        "linear_svm": LinearSvmModel,
        "logistic_regression": LogisticRegressionModel,
    }


def dumps_model(model) -> str:
    doc = {"format_version": FORMAT_VERSION, "kind": model.kind,
           "payload": model.to_payload()}
    return json.dumps(doc, sort_keys=True) + "\n"


def loads_model(text: str):
    doc = json.loads(text)
    if doc.get("format_version") != FORMAT_VERSION:
        raise LinesiftError(f"unsupported model format {doc.get('format_version')!r}")
    registry = _registry()
    kind = doc.get("kind")
    if kind not in registry:
        raise LinesiftError(f"unknown model kind {kind!r}")
    return registry[kind].from_payload(doc["payload"])


def save_model(model, path):
    Path(path).write_text(dumps_model(model))


def load_model(path):
    return loads_model(Path(path).read_text())
