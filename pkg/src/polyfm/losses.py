"""Smooth convex losses used by the coordinate descent solvers.

Each loss carries a smoothness constant ``mu`` that bounds its second
derivative in the prediction; the solvers use it as the curvature bound.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit


class LabelDomainError(ValueError):
    pass


@dataclass(frozen=True)
class LossSpec:
    kind: str
    mu: float

    def value(self, y, yhat):
        return loss_value(self, y, yhat)

    def deriv(self, y, yhat):
        return loss_deriv(self, y, yhat)


SQUARED = LossSpec("squared", 1.0)
SQUARED_HINGE = LossSpec("squared-hinge", 2.0)
LOGISTIC = LossSpec("logistic", 0.25)

LOSSES = {spec.kind: spec for spec in (SQUARED, SQUARED_HINGE, LOGISTIC)}


def get_loss(name):
    if isinstance(name, LossSpec):
        return name
    try:
        return LOSSES[name]
    except KeyError:
        raise ValueError(f"unknown loss {name!r}; choose from {sorted(LOSSES)}") from None


def _check_labels(spec, y):
    if spec.kind != "squared" and not np.all(np.abs(y) == 1):
        raise LabelDomainError(f"{spec.kind} loss requires labels in {{-1, +1}}")


def loss_value(spec, y, yhat):
    """Elementwise loss; returns a scalar for scalar inputs."""
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    _check_labels(spec, y)
    if spec.kind == "squared":
        out = 0.5 * (yhat - y) ** 2
    elif spec.kind == "squared-hinge":
        out = np.maximum(1.0 - y * yhat, 0.0) ** 2
    else:
        # log(1 / tau) with tau = sigmoid(y yhat)
        out = np.logaddexp(0.0, -y * yhat)
    return out[()] if out.ndim == 0 else out


def loss_deriv(spec, y, yhat):
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    _check_labels(spec, y)
    if spec.kind == "squared":
        out = yhat - y
    elif spec.kind == "squared-hinge":
        out = -2.0 * y * np.maximum(1.0 - y * yhat, 0.0)
    else:
        out = y * (expit(y * yhat) - 1.0)
    return out[()] if out.ndim == 0 else out
