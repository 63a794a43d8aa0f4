"""JSON form of fitted models.

Layout::

    {"format": "shapereg-model", "version": 1, "method": ..., "d": ...,
     "params": {...}, "data": {"x": [[...], ...], "y": [...]},
     "state": {...}}

``state`` by method: ``cuts`` and leaf ``values`` for FixedPartition;
nothing for KNN (the sample is the state); ``sites`` and ``labels`` for
ProtoNN / OptiNet; a nested ``tree`` for all tree methods, where an internal
node is ``{"p", "threshold", "u", "left", "right"}`` and a leaf is
``{"value", "count", "fallback"}``.  Floats are written with their shortest
round-trip representation, so a reloaded model predicts bit-identically.
"""
from __future__ import annotations

import json

import numpy as np

from ..core import Dataset
from ..errors import ConfigError
from .base import GridModel, KNNModel, LocalModel, TreeModel, VoronoiModel

FORMAT = "shapereg-model"
VERSION = 1


def _tree_to_nested(model: TreeModel, node: int = 0) -> dict:
    l, r = int(model.left[node]), int(model.right[node])
    if l < 0:
        return {
            "value": float(model.value[node]),
            "count": int(model.count[node]),
            "fallback": bool(model.fallback[node]),
        }
    p = int(model.feature[node])
    lo, up = model.lower[node, p], model.upper[node, p]
    t = float(model.threshold[node])
    return {
        "p": p,
        "threshold": t,
        "u": float((t - lo) / (up - lo)),
        "left": _tree_to_nested(model, l),
        "right": _tree_to_nested(model, r),
    }


def _nested_to_arrays(tree: dict, d: int):
    lower, upper, feature, threshold, left, right, fallback, value, count = ([] for _ in range(9))
    stack = [(tree, np.zeros(d), np.ones(d), None, None)]
    while stack:
        node, lo, up, parent, side = stack.pop()
        i = len(feature)
        if parent is not None:
            (left if side == 0 else right)[parent] = i
        lower.append(lo)
        upper.append(up)
        left.append(-1)
        right.append(-1)
        if "left" in node:
            p = int(node["p"])
            t = float(node["threshold"])
            feature.append(p)
            threshold.append(t)
            fallback.append(False)
            value.append(0.0)
            count.append(0)
            lup = up.copy()
            lup[p] = t
            rlo = lo.copy()
            rlo[p] = t
            stack.append((node["right"], rlo, up, i, 1))
            stack.append((node["left"], lo, lup, i, 0))
        else:
            feature.append(-1)
            threshold.append(0.0)
            fallback.append(bool(node.get("fallback", False)))
            value.append(float(node["value"]))
            count.append(int(node["count"]))
    return feature, threshold, left, right, np.asarray(lower), np.asarray(upper), fallback, value, count


def model_to_dict(model: LocalModel) -> dict:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "method": model.method,
        "d": model.d,
        "params": model.params,
        "data": {"x": model.data.x.tolist(), "y": model.data.y.tolist()},
    }
    if isinstance(model, GridModel):
        doc["state"] = {"cuts": [c.tolist() for c in model.cuts], "values": model.value.tolist(),
                        "counts": model.count.tolist()}
    elif isinstance(model, KNNModel):
        doc["state"] = {}
    elif isinstance(model, VoronoiModel):
        doc["state"] = {"sites": model.sites.tolist(), "labels": model.labels.tolist()}
    elif isinstance(model, TreeModel):
        doc["state"] = {"tree": _tree_to_nested(model)}
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return doc


def model_from_dict(doc: dict) -> LocalModel:
    try:
        if doc.get("format") != FORMAT or doc.get("version") != VERSION:
            raise ConfigError("not a shapereg model document of a supported version")
        d = int(doc["d"])
        x = np.asarray(doc["data"]["x"], dtype=np.float64).reshape(-1, d)
        data = Dataset(x, np.asarray(doc["data"]["y"], dtype=np.float64))
        method = doc["method"]
        params = doc["params"]
        state = doc["state"]
        if method == "FixedPartition":
            model = GridModel.__new__(GridModel)
            GridModel.__init__(model, Dataset.empty(d), state["cuts"])
            model.data = data
            model.value = np.asarray(state["values"], dtype=np.float64)
            model.count = np.asarray(state["counts"], dtype=np.int64)
            return model
        if method == "KNN":
            return KNNModel(data, params["k"])
        if method in ("ProtoNN", "OptiNet"):
            return VoronoiModel(data, np.asarray(state["sites"]).reshape(-1, d), method, params, state["labels"])
        feature, threshold, left, right, lower, upper, fallback, value, count = _nested_to_arrays(state["tree"], d)
        model = TreeModel(Dataset.empty(d), params, method, feature, threshold, left, right, lower, upper, fallback)
        model.data = data
        model.value = np.asarray(value, dtype=np.float64)
        model.count = np.asarray(count, dtype=np.int64)
        return model
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed model document: {exc!r}") from None


def dumps(model: LocalModel) -> str:
    return json.dumps(model_to_dict(model))


def loads(text: str) -> LocalModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model file is not valid JSON: {exc}") from None
    return model_from_dict(doc)
