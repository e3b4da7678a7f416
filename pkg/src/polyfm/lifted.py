"""Lifted coordinate descent: learn a low-rank tensor through its factors.

A model of degree m and rank r stores m matrices U^1..U^m (each d x r). For
the homogeneous kernel it predicts

    yhat(x) = sum_s prod_t <u^t_s, x>

which equals the contraction of the symmetrized tensor sum_s u^1_s x ... x u^m_s
with x^{(x)m}. The prediction is linear in every single factor entry, so each
coordinate subproblem of the Frobenius-regularized objective

    sum_i loss(y_i, yhat_i) + beta/2 * sum_t ||U^t||_F^2

is convex. The ``anova2`` variant (m = 2) keeps only the off-diagonal
interactions of sym(U V^T).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TrainConfig
from .data import augment, augment_sample, as_sample
from .direct import DirectModel, working_data
from .kernels import ANOVA, HOMOGENEOUS, KernelKind
from .losses import SQUARED, get_loss

ANOVA2 = "anova2"


class ConversionError(RuntimeError):
    pass


@dataclass
class LiftedModel:
    factors: np.ndarray  # shape (m, d, r)
    kernel: str = HOMOGENEOUS
    augment: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.factors = np.asarray(self.factors, dtype=np.float64)
        if self.factors.ndim != 3:
            raise ValueError("factors must have shape (m, d, r)")
        if self.kernel not in (HOMOGENEOUS, ANOVA2):
            raise ValueError(f"unknown lifted kernel {self.kernel!r}")
        if self.kernel == ANOVA2 and self.degree != 2:
            raise ValueError("the lifted ANOVA kernel is only available for m = 2")
        if not np.all(np.isfinite(self.factors)):
            raise ValueError("model parameters must be finite")

    @property
    def degree(self):
        return self.factors.shape[0]

    @property
    def rank(self):
        return self.factors.shape[2]

    @property
    def n_features(self):
        return self.factors.shape[1] - self.augment

    def decision(self, X):
        Xr = X.csr
        if self.kernel == HOMOGENEOUS:
            out = np.ones((X.n_samples, self.rank))
            for U in self.factors:
                out *= np.asarray(Xr @ U)
            return out.sum(axis=1)
        U, V = self.factors
        XU = np.asarray(Xr @ U)
        XV = np.asarray(Xr @ V)
        diag = np.asarray(Xr.multiply(Xr) @ (U * V))
        return 0.5 * (np.sum(XU * XV, axis=1) - np.sum(diag, axis=1))

    def predict(self, ds):
        return self.decision(working_data(self.factors.shape[1], self.augment, ds))

    def predict_sample(self, x):
        x = augment_sample(as_sample(x), self.augment)
        if self.kernel == HOMOGENEOUS:
            return predict_lifted_h(self, x)
        return predict_lifted_a2(self, x)


def _sample_block(model, x):
    x = as_sample(x)
    d = model.factors.shape[1]
    if x.nnz and x.indices[-1] >= d:
        raise ValueError(f"dimension mismatch: sample uses feature {x.indices[-1]}, model has {d}")
    return x, model.factors[:, x.indices, :]


def predict_lifted_h(model, x):
    """sum_s prod_t <u^t_s, x> for a single sample."""
    if model.kernel != HOMOGENEOUS:
        raise ValueError("predict_lifted_h needs a homogeneous lifted model")
    x, F = _sample_block(model, x)
    dots = np.einsum("tjr,j->tr", F, x.values)
    return float(np.sum(np.prod(dots, axis=0)))


def predict_lifted_a2(model, x):
    """Strictly off-diagonal contraction of sym(U V^T) with x x^T."""
    if model.kernel != ANOVA2:
        raise ValueError("predict_lifted_a2 needs an anova2 lifted model")
    x, (U, V) = _sample_block(model, x)
    a = U.T @ x.values
    b = V.T @ x.values
    diag = np.sum(U * V, axis=1) @ (x.values ** 2)
    return 0.5 * float(a @ b - diag)


def objective_lifted(model, ds, spec=SQUARED, beta=0.0):
    spec = get_loss(spec)
    X = working_data(model.factors.shape[1], model.augment, ds)
    loss = float(np.sum(spec.value(X.y, model.decision(X))))
    return loss + 0.5 * beta * float(np.sum(model.factors ** 2))


@dataclass
class LiftedCaches:
    """Predictions plus xi_i = prod_{t' != t} <u^{t'}_s, x_i> for the active block.

    With ``full`` set, <u^t_s, x_i> is kept for every (t, s) and updated
    incrementally (O(m r n) memory); otherwise the m inner products of the
    active column s are recomputed whenever a block is selected (O(m n)).
    """

    yhat: np.ndarray
    xi: np.ndarray
    full: bool = False
    dots: np.ndarray | None = None
    block: tuple = (-1, -1)

    @classmethod
    def build(cls, model, X, full=False):
        caches = cls(model.decision(X), np.zeros(X.n_samples), full)
        if full:
            caches.dots = np.stack([np.asarray(X.csr @ U).T for U in model.factors])
        return caches

    def refresh(self, model, X):
        self.yhat = model.decision(X)
        if self.full:
            self.dots = np.stack([np.asarray(X.csr @ U).T for U in model.factors])
        if self.block[0] >= 0:
            self.select(model, X, *self.block)

    def select(self, model, X, t, s):
        if self.full:
            D = self.dots[:, s, :]
        else:
            D = np.asarray(X.csr @ model.factors[:, :, s].T).T
        self.xi = np.prod(np.delete(D, t, axis=0), axis=0)
        self.block = (t, s)

    def check(self, model, X, rtol=1e-8):
        fresh = model.decision(X)
        scale = max(1.0, float(np.max(np.abs(fresh), initial=0.0)))
        if not np.allclose(self.yhat, fresh, rtol=rtol, atol=rtol * scale):
            raise AssertionError("stale prediction cache")
        if self.full:
            D = np.stack([np.asarray(X.csr @ U).T for U in model.factors])
            if not np.allclose(self.dots, D, rtol=rtol, atol=rtol * scale):
                raise AssertionError("stale <u^t_s, x> cache")


def _update(model, X, spec, beta, caches, dy, rows, t, j, s):
    u = model.factors[t, j, s]
    grad = float(np.dot(spec.deriv(X.y[rows], caches.yhat[rows]), dy)) + beta * u
    eta = spec.mu * float(np.dot(dy, dy)) + beta
    if eta <= 0.0:
        return 0.0
    delta = grad / eta
    if delta != 0.0:
        model.factors[t, j, s] = u - delta
        caches.yhat[rows] -= delta * dy
    return delta


def update_coordinate_lifted(model, X, spec, beta, caches, t, s, j):
    """Majorized Newton step on u^t_js; block (t, s) must be selected."""
    rows, vals = X.column(j)
    dy = caches.xi[rows] * vals
    delta = _update(model, X, spec, beta, caches, dy, rows, t, j, s)
    if caches.full and delta != 0.0:
        caches.dots[t, s, rows] -= delta * vals
    return delta


def coordinate_gradient_lifted(model, X, spec, beta, caches, t, s, j):
    rows, vals = X.column(j)
    dy = caches.xi[rows] * vals
    return (float(np.dot(spec.deriv(X.y[rows], caches.yhat[rows]), dy))
            + beta * model.factors[t, j, s])


def epoch_update_lifted(model, X, spec=SQUARED, beta=0.0, caches=None, debug=False):
    """One cyclic sweep over t, then s, then j; returns sum of |delta|."""
    if model.kernel != HOMOGENEOUS:
        raise ValueError("epoch_update_lifted needs a homogeneous lifted model")
    spec = get_loss(spec)
    if caches is None:
        caches = LiftedCaches.build(model, X)
    total = 0.0
    for t in range(model.degree):
        for s in range(model.rank):
            caches.select(model, X, t, s)
            for j in range(X.n_features):
                total += abs(update_coordinate_lifted(model, X, spec, beta, caches, t, s, j))
    if debug:
        caches.check(model, X)
    return total


@dataclass
class AnovaCaches:
    """Predictions plus <w_s, x_i> for the fixed partner factor column."""

    yhat: np.ndarray
    partner: np.ndarray
    block: tuple = (-1, -1)

    @classmethod
    def build(cls, model, X):
        return cls(model.decision(X), np.zeros(X.n_samples))

    def refresh(self, model, X):
        self.yhat = model.decision(X)
        if self.block[0] >= 0:
            self.select(model, X, *self.block)

    def select(self, model, X, t, s):
        self.partner = np.asarray(X.csr @ model.factors[1 - t, :, s])
        self.block = (t, s)

    def check(self, model, X, rtol=1e-8):
        fresh = model.decision(X)
        scale = max(1.0, float(np.max(np.abs(fresh), initial=0.0)))
        if not np.allclose(self.yhat, fresh, rtol=rtol, atol=rtol * scale):
            raise AssertionError("stale prediction cache")


def anova2_coordinate_dy(model, X, caches, t, s, j):
    rows, vals = X.column(j)
    w = model.factors[1 - t, j, s]
    return 0.5 * (caches.partner[rows] * vals - w * vals * vals), rows


def update_coordinate_a2(model, X, spec, beta, caches, t, s, j):
    dy, rows = anova2_coordinate_dy(model, X, caches, t, s, j)
    return _update(model, X, spec, beta, caches, dy, rows, t, j, s)


def epoch_update_lifted_a2(model, X, spec=SQUARED, beta=0.0, caches=None, debug=False):
    """Sweep all of U (V fixed), then all of V (U fixed)."""
    if model.kernel != ANOVA2:
        raise ValueError("epoch_update_lifted_a2 needs an anova2 lifted model")
    spec = get_loss(spec)
    if caches is None:
        caches = AnovaCaches.build(model, X)
    total = 0.0
    for t in (0, 1):
        for s in range(model.rank):
            caches.select(model, X, t, s)
            for j in range(X.n_features):
                total += abs(update_coordinate_a2(model, X, spec, beta, caches, t, s, j))
    if debug:
        caches.check(model, X)
    return total


def init_lifted(n_features, config, rng=None):
    rng = np.random.default_rng(config.seed) if rng is None else rng
    kernel = ANOVA2 if config.kernel == ANOVA else HOMOGENEOUS
    factors = rng.normal(0.0, config.init_std,
                         size=(config.degree, n_features, config.rank))
    return LiftedModel(factors, kernel, config.augment)


def train_lifted(ds, config=TrainConfig(kernel=HOMOGENEOUS), spec=SQUARED,
                 callback=None, model=None, debug=False):
    """Lifted CD until an epoch moves parameters by at most ``config.tol``.

    ``kernel='homogeneous'`` supports any degree >= 2; ``kernel='anova'``
    maps to the lifted ANOVA variant and requires degree 2.
    """
    spec = get_loss(spec)
    if config.kernel == HOMOGENEOUS and config.degree < 2:
        raise ValueError("the lifted homogeneous solver needs degree >= 2")
    if config.kernel == ANOVA and config.degree != 2:
        raise ValueError("the lifted ANOVA solver only supports degree 2")
    X = augment(ds, config.augment)
    if model is None:
        model = init_lifted(X.n_features, config)
    elif model.factors.shape[1] != X.n_features:
        raise ValueError("warm-start model does not match the data dimension")
    model.meta.update(beta=config.beta, loss=spec.kind, seed=config.seed, solver="lifted")
    if model.kernel == HOMOGENEOUS:
        caches = LiftedCaches.build(model, X, full=config.full_cache)
        sweep = epoch_update_lifted
    else:
        caches = AnovaCaches.build(model, X)
        sweep = epoch_update_lifted_a2
    if callback is not None:
        callback(0, objective_lifted(model, X, spec, config.beta), float("nan"))
    epoch = 0
    for epoch in range(1, config.epochs + 1):
        delta = sweep(model, X, spec, config.beta, caches, debug=debug)
        if epoch % config.recompute_every == 0:
            caches.refresh(model, X)
        if callback is not None:
            callback(epoch, objective_lifted(model, X, spec, config.beta), delta)
        if delta <= config.tol:
            break
    model.meta["epochs"] = epoch
    return model


def symmetric_matrix(model):
    """sym(U V^T) = (U V^T + V U^T) / 2 for a degree-2 model."""
    if model.degree != 2:
        raise ValueError("only degree-2 lifted models have a matrix form")
    U, V = model.factors
    M = U @ V.T
    return 0.5 * (M + M.T)


def lifted_to_direct(model, cutoff=1e-10):
    """Reduced eigendecomposition of sym(U V^T) as a kernel expansion.

    Eigenvalues with magnitude at most ``cutoff`` times the largest one are
    dropped, so the result has at most 2r bases.
    """
    W = symmetric_matrix(model)
    try:
        evals, evecs = np.linalg.eigh(W)
    except np.linalg.LinAlgError as exc:
        raise ConversionError(f"eigendecomposition failed: {exc}") from exc
    top = np.max(np.abs(evals), initial=0.0)
    keep = np.abs(evals) > cutoff * top if top > 0 else np.zeros(evals.shape, bool)
    order = np.argsort(-np.abs(evals[keep]), kind="stable")
    kernel = (KernelKind.homogeneous(2) if model.kernel == HOMOGENEOUS
              else KernelKind.anova(2))
    return DirectModel(evals[keep][order], evecs[:, keep][:, order], kernel,
                       model.augment, dict(model.meta, converted_from="lifted"))
