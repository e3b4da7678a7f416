"""Direct coordinate descent on (lambda, P) for ANOVA kernels of degree 2 or 3.

The model predicts ``yhat(x) = sum_s lambda_s K(p_s, x)`` and is trained on

    sum_i loss(y_i, yhat_i) + beta * sum_s |lambda_s| ||p_s||^2.

Because A^m is multi-linear in the entries of each p_s, every coordinate
subproblem is convex and the step below (with the loss curvature majorized
by ``mu``) never increases the objective. For the squared loss it is the
exact coordinate-wise minimizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TrainConfig
from .data import SparseDataset, augment, augment_sample, as_sample
from .kernels import ANOVA, KernelKind
from .losses import SQUARED, get_loss


@dataclass
class DirectModel:
    lams: np.ndarray
    P: np.ndarray
    kernel: KernelKind
    augment: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lams = np.asarray(self.lams, dtype=np.float64).reshape(-1)
        self.P = np.asarray(self.P, dtype=np.float64)
        if self.P.ndim == 1:
            self.P = self.P.reshape(-1, 1)
        if self.P.ndim != 2 or self.P.shape[1] != self.lams.shape[0]:
            raise ValueError(f"P has shape {self.P.shape}, expected (d, {self.lams.shape[0]})")
        if not (np.all(np.isfinite(self.lams)) and np.all(np.isfinite(self.P))):
            raise ValueError("model parameters must be finite")

    @property
    def degree(self):
        return self.kernel.degree

    @property
    def n_bases(self):
        return self.lams.shape[0]

    @property
    def n_features(self):
        """Input dimension before augmentation."""
        return self.P.shape[0] - self.augment

    def kernel_values(self, X):
        """K(p_s, x_i) on a working (already augmented) dataset."""
        if self.n_bases == 0:
            return np.zeros((X.n_samples, 0))
        return self.kernel.batch(X, self.P)

    def decision(self, X):
        return self.kernel_values(X) @ self.lams

    def predict(self, ds):
        """Predictions for raw (non-augmented) data."""
        return self.decision(working_data(self.P.shape[0], self.augment, ds))

    def predict_sample(self, x):
        x = augment_sample(as_sample(x), self.augment)
        return float(sum(lam * self.kernel(self.P[:, s], x)
                         for s, lam in enumerate(self.lams)))


def working_data(d_model, n_augment, ds):
    """Map ``ds`` onto the model's (augmented) feature space.

    A dataset that already has ``d_model`` features is used as is; otherwise
    it is taken as raw data, padded with trailing empty features if needed,
    and augmented.
    """
    if ds.n_features == d_model:
        return ds
    d_raw = d_model - n_augment
    if ds.n_features > d_raw:
        raise ValueError(
            f"dimension mismatch: data has {ds.n_features} features, "
            f"model expects {d_raw} (+{n_augment} dummy)")
    return augment(ds.with_n_features(d_raw), n_augment)


def regularizer_direct(model):
    return float(np.sum(np.abs(model.lams) * np.sum(model.P ** 2, axis=0)))


def objective_direct(model, ds, spec=SQUARED, beta=0.0):
    """sum_i loss(y_i, yhat_i) + beta * sum_s |lambda_s| ||p_s||^2."""
    spec = get_loss(spec)
    X = working_data(model.P.shape[0], model.augment, ds)
    loss = float(np.sum(spec.value(X.y, model.decision(X))))
    return loss + beta * regularizer_direct(model)


@dataclass
class DirectCaches:
    """Per-sample statistics for the basis ``s`` currently being swept.

    ``dot`` holds <p_s, x_i>; ``a2`` holds A^2(p_s, x_i) and is only used
    when the degree is 3.
    """

    yhat: np.ndarray
    dot: np.ndarray
    a2: np.ndarray
    s: int = -1

    @classmethod
    def build(cls, model, X):
        n = X.n_samples
        return cls(model.decision(X), np.zeros(n), np.zeros(n))

    def refresh(self, model, X):
        self.yhat = model.decision(X)
        if self.s >= 0:
            self.select(model, X, self.s)

    def select(self, model, X, s):
        p = model.P[:, s]
        self.dot = np.asarray(X.csr @ p)
        if model.degree == 3:
            d2 = np.asarray(X.csr.multiply(X.csr) @ (p ** 2))
            self.a2 = 0.5 * (self.dot ** 2 - d2)
        self.s = s

    def check(self, model, X, rtol=1e-8):
        """Raise if any cached quantity drifted from its recomputation."""
        fresh = DirectCaches.build(model, X)
        scale = max(1.0, float(np.max(np.abs(fresh.yhat), initial=0.0)))
        if not np.allclose(self.yhat, fresh.yhat, rtol=rtol, atol=rtol * scale):
            raise AssertionError("stale prediction cache")
        if self.s >= 0:
            fresh.select(model, X, self.s)
            if not np.allclose(self.dot, fresh.dot, rtol=rtol, atol=rtol * scale):
                raise AssertionError("stale <p_s, x> cache")
            if model.degree == 3 and not np.allclose(self.a2, fresh.a2, rtol=rtol,
                                                     atol=rtol * scale):
                raise AssertionError("stale A^2 cache")


def _check_trainable(model):
    if model.kernel.name != ANOVA or model.degree not in (2, 3):
        raise ValueError(
            "direct coordinate descent requires the ANOVA kernel with degree 2 or 3; "
            "the homogeneous kernel is not coordinate-wise convex (use the lifted solver)")


def coordinate_gradient(model, X, spec, beta, caches, s, j):
    """Return (dyhat/dp_js on the column's rows, rows, df/dp_js)."""
    rows, vals = X.column(j)
    pj = model.P[j, s]
    lam = model.lams[s]
    if model.degree == 2:
        dk = (caches.dot[rows] - pj * vals) * vals
    else:
        dk = (caches.a2[rows] * vals - pj * vals * vals * caches.dot[rows]
              + pj * pj * vals ** 3)
    dy = lam * dk
    grad = float(np.dot(spec.deriv(X.y[rows], caches.yhat[rows]), dy)
                 + 2.0 * beta * abs(lam) * pj)
    return dy, rows, vals, grad


def update_coordinate(model, X, spec, beta, caches, s, j):
    """One majorized Newton step on p_js; returns the signed step delta.

    ``caches`` must have basis ``s`` selected. Coordinates whose curvature
    bound is zero are left untouched.
    """
    dy, rows, vals, grad = coordinate_gradient(model, X, spec, beta, caches, s, j)
    eta = spec.mu * float(np.dot(dy, dy)) + 2.0 * beta * abs(model.lams[s])
    if eta <= 0.0:
        return 0.0
    delta = grad / eta
    if delta == 0.0:
        return 0.0
    pj = model.P[j, s]
    model.P[j, s] = pj - delta
    # A^m is affine in p_js, so the caches move by -delta times their slope.
    caches.yhat[rows] -= delta * dy
    if model.degree == 3:
        caches.a2[rows] -= delta * (caches.dot[rows] - pj * vals) * vals
    caches.dot[rows] -= delta * vals
    return delta


def epoch_update_P(model, X, spec=SQUARED, beta=0.0, caches=None, debug=False):
    """Cyclic sweep over all p_js, basis by basis; returns sum of |delta|."""
    _check_trainable(model)
    spec = get_loss(spec)
    if caches is None:
        caches = DirectCaches.build(model, X)
    total = 0.0
    for s in range(model.n_bases):
        caches.select(model, X, s)
        for j in range(X.n_features):
            total += abs(update_coordinate(model, X, spec, beta, caches, s, j))
        if debug:
            caches.check(model, X)
    return total


def fit_lambda(model, X, spec=SQUARED, beta=0.0, tol=1e-8, max_iter=1000):
    """Minimize the objective in lambda with P fixed.

    With the weights beta ||p_s||^2 frozen this is a weighted l1 problem in
    lambda, solved by cyclic proximal coordinate steps (exact soft
    thresholding for the squared loss). Works for either kernel. Returns a
    new lambda vector; ``model`` is not modified.
    """
    spec = get_loss(spec)
    X = working_data(model.P.shape[0], model.augment, X)
    Z = model.kernel_values(X)
    lams = model.lams.copy()
    weights = beta * np.sum(model.P ** 2, axis=0)
    curv = spec.mu * np.sum(Z ** 2, axis=0)
    yhat = Z @ lams
    for _ in range(max_iter):
        change = 0.0
        for s in range(lams.shape[0]):
            if curv[s] == 0.0:
                new = 0.0 if weights[s] > 0 else lams[s]
            else:
                g = float(np.dot(spec.deriv(X.y, yhat), Z[:, s]))
                u = lams[s] - g / curv[s]
                new = np.sign(u) * max(abs(u) - weights[s] / curv[s], 0.0)
            step = new - lams[s]
            if step != 0.0:
                yhat += step * Z[:, s]
                lams[s] = new
                change += abs(step)
        if change <= tol:
            break
    return lams


def absorb_lambda(model):
    """Fold lambda into P for odd degrees, giving an equivalent lambda = 1 model.

    Uses lambda K(p, x) = K(sign(lambda) |lambda|^(1/m) p, x), which holds for
    both kernels because they are homogeneous of degree m.
    """
    m = model.degree
    if m % 2 == 0:
        raise ValueError("negative weights cannot be absorbed for even degrees")
    scale = np.sign(model.lams) * np.abs(model.lams) ** (1.0 / m)
    return DirectModel(np.ones(model.n_bases), model.P * scale, model.kernel,
                       model.augment, dict(model.meta))


def init_direct(n_features, config, rng=None):
    """Random P ~ N(0, init_std^2) and lambda set by the configured policy."""
    rng = np.random.default_rng(config.seed) if rng is None else rng
    P = rng.normal(0.0, config.init_std, size=(n_features, config.rank))
    if config.fit_lambda == "signs":
        lams = rng.choice([-1.0, 1.0], size=config.rank)
    else:
        lams = np.ones(config.rank)
    return DirectModel(lams, P, KernelKind(config.kernel, config.degree), config.augment)


def train_direct(ds, config=TrainConfig(), spec=SQUARED, callback=None, model=None,
                 debug=False):
    """Alternate lambda fitting (policy ``fit``) with P epochs.

    ``callback(epoch, objective, delta)`` is called after every epoch; epoch
    0 reports the initial objective with delta NaN. Stops when an epoch's
    summed absolute parameter change is at most ``config.tol``.
    """
    spec = get_loss(spec)
    if config.kernel != ANOVA or config.degree not in (2, 3):
        raise ValueError("train_direct requires kernel='anova' and degree 2 or 3")
    X = augment(ds, config.augment)
    if model is None:
        model = init_direct(X.n_features, config)
    elif model.P.shape[0] != X.n_features:
        raise ValueError("warm-start model does not match the data dimension")
    model.meta.update(beta=config.beta, loss=spec.kind, seed=config.seed, solver="direct")
    if callback is not None:
        callback(0, objective_direct(model, X, spec, config.beta), float("nan"))
    caches = DirectCaches.build(model, X)
    epoch = 0
    for epoch in range(1, config.epochs + 1):
        delta = 0.0
        if config.fit_lambda == "fit":
            new = fit_lambda(model, X, spec, config.beta, config.lambda_tol,
                             config.lambda_max_iter)
            delta += float(np.sum(np.abs(new - model.lams)))
            model.lams = new
            caches.refresh(model, X)
        delta += epoch_update_P(model, X, spec, config.beta, caches, debug=debug)
        if epoch % config.recompute_every == 0:
            caches.refresh(model, X)
        if callback is not None:
            callback(epoch, objective_direct(model, X, spec, config.beta), delta)
        if delta <= config.tol:
            break
    model.meta["epochs"] = epoch
    return model
