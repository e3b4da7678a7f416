"""Acceptance criteria 1-12, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines, or execute
this file directly. Criterion 12 is informational and never fails the run.
"""

import statistics
import sys
import time

import numpy as np
import pytest

from polyfm import oracle, properties
from polyfm.config import TrainConfig
from polyfm.data import SparseDataset, one_hot_dataset, train_test_split
from polyfm.direct import (DirectCaches, DirectModel, coordinate_gradient, epoch_update_P,
                           fit_lambda, objective_direct, train_direct, update_coordinate)
from polyfm.kernels import KernelKind, anova_recursive
from polyfm.lifted import (ANOVA2, AnovaCaches, LiftedCaches, LiftedModel,
                           anova2_coordinate_dy, coordinate_gradient_lifted, init_lifted,
                           lifted_to_direct, objective_lifted, train_lifted,
                           update_coordinate_a2, update_coordinate_lifted)
from polyfm.losses import SQUARED
from polyfm.store import rmse

pytestmark = pytest.mark.acceptance


def report(number, passed, detail, informational=False):
    status = "INFO" if informational else ("PASS" if passed else "FAIL")
    print(f"criterion {number:>2}: {status}  {detail}")
    sys.stdout.flush()


def _combine(results):
    worst = max(r.worst for r in results)
    return all(r.passed for r in results), worst


def sparse_regression(rng, n, d, density):
    X = rng.normal(size=(n, d)) * (rng.random((n, d)) < density)
    P = rng.normal(size=(d, 3))
    Z = X @ P
    y = Z[:, 0] * Z[:, 1] - 0.5 * Z[:, 2] ** 2 + 0.1 * rng.normal(size=n)
    return SparseDataset.from_dense(X, y)


def test_criterion_01_kernel_oracles():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    results = [properties.check_anova_oracle(rng, trials=1000, max_dim=10),
               properties.check_homogeneous_oracle(rng, trials=1000, max_dim=10)]
    elapsed = time.perf_counter() - start
    ok, worst = _combine(results)
    ok = ok and elapsed < 10.0
    report(1, ok, f"worst rel err {worst:.2e} (tol 1e-12), {elapsed:.2f}s (limit 10s)")
    assert ok


def test_criterion_02_multilinearity_homogeneity():
    rng = np.random.default_rng(2)
    ok, worst = _combine([properties.check_recursion(rng, trials=1000),
                          properties.check_homogeneity(rng, trials=1000)])
    report(2, ok, f"worst rel err {worst:.2e} (tol 1e-12)")
    assert ok


def test_criterion_03_symmetrization():
    rng = np.random.default_rng(3)
    ok, worst = _combine([properties.check_symmetrization(rng, trials=100),
                          properties.check_expansion(rng, trials=100)])
    report(3, ok, f"worst rel err {worst:.2e} (tol 1e-10)")
    assert ok


def _fd_rel(g, f, at):
    fd = oracle.finite_diff(f, at, 1e-5)
    return abs(g - fd) / max(1.0, abs(g), abs(fd))


def test_criterion_04_gradient_checks():
    rng = np.random.default_rng(4)
    worst = {}
    ds = sparse_regression(rng, 40, 8, 0.6)
    beta = 0.3
    for m in (2, 3):
        model = DirectModel(rng.normal(size=3), 0.5 * rng.normal(size=(8, 3)), KernelKind.anova(m))
        caches = DirectCaches.build(model, ds)
        w = 0.0
        for _ in range(100):
            s, j = int(rng.integers(3)), int(rng.integers(8))
            caches.select(model, ds, s)
            g = coordinate_gradient(model, ds, SQUARED, beta, caches, s, j)[3]
            f = oracle.coordinate_function(lambda: objective_direct(model, ds, SQUARED, beta),
                                           model.P, (j, s))
            w = max(w, _fd_rel(g, f, model.P[j, s]))
        worst[f"direct A^{m}"] = w
    for m in (2, 3, 4):
        model = LiftedModel(0.6 * rng.normal(size=(m, 8, 3)), "homogeneous")
        caches = LiftedCaches.build(model, ds)
        w = 0.0
        for _ in range(100):
            t, s, j = int(rng.integers(m)), int(rng.integers(3)), int(rng.integers(8))
            caches.select(model, ds, t, s)
            g = coordinate_gradient_lifted(model, ds, SQUARED, beta, caches, t, s, j)
            f = oracle.coordinate_function(lambda: objective_lifted(model, ds, SQUARED, beta),
                                           model.factors, (t, j, s))
            w = max(w, _fd_rel(g, f, model.factors[t, j, s]))
        worst[f"lifted H^{m}"] = w
    model = LiftedModel(rng.normal(size=(2, 8, 3)), ANOVA2)
    caches = AnovaCaches.build(model, ds)
    w = 0.0
    for _ in range(100):
        t, s, j = int(rng.integers(2)), int(rng.integers(3)), int(rng.integers(8))
        caches.select(model, ds, t, s)
        dy, rows = anova2_coordinate_dy(model, ds, caches, t, s, j)
        g = float(np.dot(caches.yhat[rows] - ds.y[rows], dy)) + beta * model.factors[t, j, s]
        f = oracle.coordinate_function(lambda: objective_lifted(model, ds, SQUARED, beta),
                                       model.factors, (t, j, s))
        w = max(w, _fd_rel(g, f, model.factors[t, j, s]))
    worst["lifted A^2"] = w
    ok = all(v <= 1e-5 for v in worst.values())
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    report(4, ok, f"worst rel err: {detail} (tol 1e-5)")
    assert ok


def test_criterion_05_monotone_descent():
    rng = np.random.default_rng(5)
    ds = sparse_regression(rng, 200, 50, 0.2)
    combos = [("direct", "anova", 2), ("direct", "anova", 3), ("lifted", "homogeneous", 2),
              ("lifted", "homogeneous", 3), ("lifted", "anova", 2)]
    start = time.perf_counter()
    worst_rise, epochs = 0.0, []
    for solver, kernel, m in combos:
        cfg = TrainConfig(beta=0.1, rank=4, degree=m, kernel=kernel, epochs=50, tol=0.0,
                          init_std=0.1, fit_lambda="fit" if solver == "direct" else "ones")
        log = []
        train = train_direct if solver == "direct" else train_lifted
        train(ds, cfg, callback=lambda e, o, d: log.append(o))
        worst_rise = max(worst_rise, float(np.max(np.diff(log))))
        epochs.append(len(log) - 1)
    elapsed = time.perf_counter() - start
    ok = worst_rise <= 1e-10 and min(epochs) >= 50 and elapsed < 60.0
    report(5, ok, f"largest epoch-to-epoch rise {worst_rise:.2e} (slack 1e-10), "
                  f"{len(combos)} combos x {min(epochs)} epochs, {elapsed:.1f}s (limit 60s)")
    assert ok


def _scan_gap(f, x_new, step):
    width = 10.0 * max(abs(step), 1e-8)
    _, f_min = oracle.golden_section_min(f, x_new - width, x_new + width)
    grid = min(f(v) for v in np.linspace(x_new - width, x_new + width, 201))
    return f(x_new) - min(f_min, grid)


def test_criterion_06_coordinate_minimizer():
    rng = np.random.default_rng(6)
    ds = sparse_regression(rng, 30, 6, 0.7)
    # Unit-scale targets keep objective round-off well below the 1e-9 threshold.
    ds = SparseDataset(ds.csc, (ds.y - ds.y.mean()) / ds.y.std())
    beta, gap = 0.2, -np.inf
    for m in (2, 3):
        model = DirectModel(rng.normal(size=2), 0.5 * rng.normal(size=(6, 2)), KernelKind.anova(m))
        caches = DirectCaches.build(model, ds)
        for _ in range(20):
            s, j = int(rng.integers(2)), int(rng.integers(6))
            caches.select(model, ds, s)
            step = update_coordinate(model, ds, SQUARED, beta, caches, s, j)
            f = oracle.coordinate_function(lambda: objective_direct(model, ds, SQUARED, beta),
                                           model.P, (j, s))
            gap = max(gap, _scan_gap(f, model.P[j, s], step))
    for kernel, m in (("homogeneous", 2), ("homogeneous", 3), (ANOVA2, 2)):
        model = LiftedModel(0.5 * rng.normal(size=(m, 6, 2)), kernel)
        caches = (LiftedCaches if kernel == "homogeneous" else AnovaCaches).build(model, ds)
        update = update_coordinate_lifted if kernel == "homogeneous" else update_coordinate_a2
        for _ in range(20):
            t, s, j = int(rng.integers(m)), int(rng.integers(2)), int(rng.integers(6))
            caches.select(model, ds, t, s)
            step = update(model, ds, SQUARED, beta, caches, t, s, j)
            f = oracle.coordinate_function(lambda: objective_lifted(model, ds, SQUARED, beta),
                                           model.factors, (t, j, s))
            gap = max(gap, _scan_gap(f, model.factors[t, j, s], step))
    ok = gap <= 1e-9
    report(6, ok, f"largest improvement found by scan {gap:.2e} (tol 1e-9), 100 coordinates")
    assert ok


def test_criterion_07_fitting_lambda():
    rng = np.random.default_rng(7)
    d, n, beta = 10, 300, 0.1
    X = rng.normal(size=(n, d))
    a, b = rng.normal(size=d), rng.normal(size=d)
    y = -(X @ a) ** 2 + 0.5 * (X @ b) ** 2
    ds = SparseDataset.from_dense(X, y)
    # Fitted weights: lifted H^2 solution, its eigen-expansion, then lambda refit.
    cfg = TrainConfig(beta=beta, rank=4, degree=2, kernel="homogeneous", epochs=500,
                      tol=1e-8, init_std=0.1)
    direct = lifted_to_direct(train_lifted(ds, cfg))
    direct.lams = fit_lambda(direct, ds, SQUARED, beta, tol=1e-12, max_iter=10000)
    f_fit = objective_direct(direct, ds, SQUARED, beta)
    # With lambda = 1, every H^2 prediction is >= 0, so no P does better than this.
    ones_floor = 0.5 * float(np.sum(y[y < 0] ** 2))
    strict = f_fit <= 0.99 * ones_floor
    worst = 0.0
    for _ in range(1000):
        dd = int(rng.integers(3, 10))
        lam, p, x = 3.0 * rng.normal(), rng.normal(size=dd), rng.normal(size=dd)
        lhs = lam * anova_recursive(p, x, 3)
        rhs = anova_recursive(np.sign(lam) * abs(lam) ** (1.0 / 3.0) * p, x, 3)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    ok = strict and worst <= 1e-10
    report(7, ok, f"H^2: fit objective {f_fit:.4g} vs fixed-ones lower bound {ones_floor:.4g} "
                  f"(needs <= 99%); A^3 absorption worst rel err {worst:.1e} (tol 1e-10)")
    assert ok


def test_criterion_08_lifted_to_direct():
    rng = np.random.default_rng(8)
    worst, rank_ok = 0.0, True
    for trial in range(200):
        d, r = int(rng.integers(1, 21)), int(rng.integers(1, 6))
        kernel = "homogeneous" if trial % 2 else ANOVA2
        model = LiftedModel(rng.normal(size=(2, d, r)), kernel)
        direct = lifted_to_direct(model)
        rank_ok &= direct.n_bases <= 2 * r
        X = rng.normal(size=(10, d)) * (rng.random((10, d)) < 0.7)
        ds = SparseDataset.from_dense(X, np.zeros(10))
        diff = np.abs(direct.decision(ds) - model.decision(ds))
        worst = max(worst, float(np.max(diff / np.maximum(1.0, np.abs(model.decision(ds))))))
    ok = rank_ok and worst <= 1e-8
    report(8, ok, f"worst prediction gap {worst:.1e} (tol 1e-8), k <= 2r: {rank_ok}, 200 models")
    assert ok


def test_criterion_09_augmentation():
    result = properties.check_augmentation(np.random.default_rng(9), trials=1000)
    report(9, result.passed, f"worst rel err {result.worst:.2e} (tol 1e-12), "
                             "including the m-1 dummy-feature case")
    assert result.passed


def recommender_data(seed=0, n_users=50, n_items=40, rank=3, noise=0.3):
    rng = np.random.default_rng(seed)
    U = rng.normal(size=(n_users, rank))
    V = rng.normal(size=(n_items, rank))
    bu, bi = 0.5 * rng.normal(size=n_users), 0.5 * rng.normal(size=n_items)
    users, items = np.meshgrid(np.arange(n_users), np.arange(n_items), indexing="ij")
    users, items = users.ravel(), items.ravel()
    ratings = (3.0 + bu[users] + bi[items] + np.sum(U[users] * V[items], axis=1)
               + noise * rng.normal(size=users.size))
    return one_hot_dataset(users, items, ratings, n_users, n_items)


def test_criterion_10_recommender():
    start = time.perf_counter()
    ds = recommender_data()
    train, test = train_test_split(ds, 0.25, seed=0)
    cfg = TrainConfig(beta=1.0, rank=6, degree=2, kernel="anova", epochs=200, tol=1e-5,
                      augment=1, init_std=0.1)
    model = train_direct(train, cfg)
    model_rmse = rmse(model.predict(test), test.y)
    base_rmse = rmse(np.full(test.n_samples, train.y.mean()), test.y)
    elapsed = time.perf_counter() - start
    gain = 1.0 - model_rmse / base_rmse
    ok = gain >= 0.2 and elapsed < 30.0
    report(10, ok, f"{ds.n_samples} ratings, test RMSE {model_rmse:.3f} vs global mean "
                   f"{base_rmse:.3f} ({gain:.0%} better, needs 20%), {elapsed:.1f}s (limit 30s)")
    assert ok


def consistency_data(seed=0, d=6, n=40):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    A = rng.normal(size=(d, d))
    W = 0.5 * (A + A.T)
    off = np.einsum("ij,jk,ik->i", X, W, X) - (X ** 2) @ np.diag(W)
    return SparseDataset.from_dense(X, 0.5 * off + 0.1 * rng.normal(size=n))


def test_criterion_11_regularizer_consistency():
    ds = consistency_data()
    rels = []
    for seed in range(3):
        cfg = TrainConfig(beta=1.0, rank=6, degree=2, kernel="anova", epochs=3000, tol=1e-9,
                          fit_lambda="fit", init_std=0.1, seed=seed)
        # Both solvers start from the same point: the direct model is the
        # eigen-expansion of the lifted initialization.
        start = init_lifted(ds.n_features, cfg)
        direct = train_direct(ds, cfg, model=lifted_to_direct(start))
        lifted = train_lifted(ds, cfg, model=LiftedModel(start.factors.copy(), start.kernel))
        f_direct = objective_direct(direct, ds, SQUARED, 1.0)
        f_lifted = objective_direct(lifted_to_direct(lifted), ds, SQUARED, 1.0)
        rels.append(abs(f_direct - f_lifted) / max(f_direct, f_lifted))
    ok = max(rels) <= 0.05
    report(11, ok, f"direct {f_direct:.6g} vs lifted (rescored) {f_lifted:.6g}, "
                   f"worst rel gap {max(rels):.1e} over 3 seeds (tol 5%)")
    assert ok


def _epoch_time(ds, k=4, m=2, repeats=5):
    rng = np.random.default_rng(0)
    times = []
    for _ in range(repeats):
        model = DirectModel(np.ones(k), 0.1 * rng.normal(size=(ds.n_features, k)),
                            KernelKind.anova(m))
        caches = DirectCaches.build(model, ds)
        t0 = time.perf_counter()
        epoch_update_P(model, ds, SQUARED, 0.1, caches)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def test_criterion_12_epoch_scaling():
    rng = np.random.default_rng(12)
    small = sparse_regression(rng, 2000, 200, 0.05)
    big = sparse_regression(rng, 4000, 200, 0.05)
    t_small, t_big = _epoch_time(small), _epoch_time(big)
    ratio = t_big / t_small
    report(12, ratio <= 2.5, f"nnz {small.nnz} -> {big.nnz}: epoch {t_small * 1e3:.1f}ms -> "
                             f"{t_big * 1e3:.1f}ms, ratio {ratio:.2f} (target <= 2.5, "
                             f"{'met' if ratio <= 2.5 else 'not met'}; non-gating)",
           informational=True)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-s", "-q", "-p", "no:cacheprovider"]))
