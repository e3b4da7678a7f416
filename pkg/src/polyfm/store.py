"""``.fmjson`` model files and evaluation metrics.

File layout (format_version 1)::

    {
      "format_version": 1,
      "kind": "direct" | "lifted",
      "kernel": {"name": "anova" | "homogeneous" | "anova2", "degree": m},
      "degree": m,
      "n_features": d,            # working dimension, dummy features included
      "rank": k | r,
      "augmented_count": a,
      "lambda": [k floats],                       # direct only
      "P": [d*k floats, row-major],               # direct only
      "factors": [[d*r floats, row-major], ...],  # lifted only, m blocks
      "feature_scale": null | [raw-d floats],
      "metadata": {"beta": ..., "loss": ..., "seed": ..., "epochs": ...}
    }

Floats are written with Python's shortest round-trip repr, so loading
reproduces every parameter bit for bit.
"""

import json
import math
from pathlib import Path

import numpy as np

from .direct import DirectModel
from .kernels import KernelKind
from .lifted import ANOVA2, LiftedModel

FORMAT_VERSION = 1


class ModelFileError(ValueError):
    pass


class ModelVersionError(ModelFileError):
    pass


class ModelShapeError(ModelFileError):
    pass


class UndefinedMetricError(ValueError):
    pass


def _floats(a):
    return [float(v) for v in np.asarray(a, dtype=np.float64).ravel()]


def model_to_dict(model, feature_scale=None):
    doc = {"format_version": FORMAT_VERSION}
    if isinstance(model, DirectModel):
        doc.update(
            kind="direct",
            kernel={"name": model.kernel.name, "degree": model.degree},
            degree=model.degree,
            n_features=int(model.P.shape[0]),
            rank=model.n_bases,
            augmented_count=model.augment,
            **{"lambda": _floats(model.lams), "P": _floats(model.P)},
        )
    elif isinstance(model, LiftedModel):
        doc.update(
            kind="lifted",
            kernel={"name": model.kernel, "degree": model.degree},
            degree=model.degree,
            n_features=int(model.factors.shape[1]),
            rank=model.rank,
            augmented_count=model.augment,
            factors=[_floats(U) for U in model.factors],
        )
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    doc["feature_scale"] = None if feature_scale is None else _floats(feature_scale)
    doc["metadata"] = model.meta
    return doc


def _require(doc, key):
    try:
        return doc[key]
    except KeyError:
        raise ModelFileError(f"missing field {key!r}") from None


def _array(values, shape, name):
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size != math.prod(shape):
        raise ModelShapeError(f"{name} has {arr.size} values, expected shape {shape}")
    return arr.reshape(shape)


def model_from_dict(doc):
    if not isinstance(doc, dict):
        raise ModelFileError("model file must contain a JSON object")
    version = _require(doc, "format_version")
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"unsupported format_version {version!r}")
    kind = _require(doc, "kind")
    kernel = _require(doc, "kernel")
    m = int(_require(doc, "degree"))
    d = int(_require(doc, "n_features"))
    rank = int(_require(doc, "rank"))
    aug = int(_require(doc, "augmented_count"))
    meta = doc.get("metadata") or {}
    if kernel.get("degree") != m:
        raise ModelShapeError("kernel degree disagrees with degree")
    try:
        if kind == "direct":
            lams = _array(_require(doc, "lambda"), (rank,), "lambda")
            P = _array(_require(doc, "P"), (d, rank), "P")
            return DirectModel(lams, P, KernelKind(kernel["name"], m), aug, meta)
        if kind == "lifted":
            blocks = _require(doc, "factors")
            if len(blocks) != m:
                raise ModelShapeError(f"{len(blocks)} factor blocks for degree {m}")
            factors = np.stack([_array(b, (d, rank), f"factors[{t}]")
                                for t, b in enumerate(blocks)]) if m else None
            return LiftedModel(factors, kernel["name"], aug, meta)
    except (TypeError, KeyError) as exc:
        raise ModelFileError(f"malformed model: {exc}") from exc
    raise ModelFileError(f"unknown model kind {kind!r}")


def save(model, path, feature_scale=None):
    Path(path).write_text(json.dumps(model_to_dict(model, feature_scale), indent=1) + "\n")


def load(path, with_scale=False):
    """Load a model; with ``with_scale`` also return the stored feature scale."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: not valid JSON ({exc})") from exc
    model = model_from_dict(doc)
    if with_scale:
        scale = doc.get("feature_scale")
        return model, None if scale is None else np.asarray(scale, dtype=np.float64)
    return model


def _pair(pred, y):
    pred = np.asarray(pred, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if pred.shape != y.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions, {y.size} targets")
    if y.size == 0:
        raise ValueError("metrics need at least one sample")
    return pred, y


def rmse(pred, y):
    pred, y = _pair(pred, y)
    return float(np.sqrt(np.mean((pred - y) ** 2)))


def r2(pred, y):
    """Coefficient of determination 1 - SSE/SST."""
    pred, y = _pair(pred, y)
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0.0:
        raise UndefinedMetricError("r2 is undefined for constant targets")
    return 1.0 - float(np.sum((pred - y) ** 2)) / sst


METRICS = {"rmse": rmse, "r2": r2}
