"""Randomized identity checks of the fast kernels against the oracles.

Each check returns a :class:`CheckResult`; ``run_all`` is what the
``verify`` command executes.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from . import oracle
from .data import SampleView, augment_sample
from .kernels import (anova_fast, anova_recursive, homogeneity_check, homogeneous)


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tol: float
    trials: int

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}\t{self.name}\tworst={self.worst:.3e}\ttol={self.tol:.0e}\ttrials={self.trials}"


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


def _sparse_vec(rng, d, density=0.7):
    x = rng.normal(size=d) * (rng.random(d) < density)
    return x


def check_anova_oracle(rng, trials=1000, max_dim=10, tol=1e-12):
    """Fast and recursive ANOVA evaluations against brute enumeration."""
    worst = 0.0
    for _ in range(trials):
        d = int(rng.integers(1, max_dim + 1))
        p = rng.normal(size=d)
        x = _sparse_vec(rng, d)
        sv = SampleView.from_dense(x)
        for m in range(0, 6):
            ref = oracle.brute_anova(p, x, m)
            worst = max(worst, _rel(anova_recursive(p, sv, m), ref))
            if m in (2, 3):
                worst = max(worst, _rel(anova_fast(p, sv, m), ref))
    return CheckResult("anova_fast_recursive_vs_brute", worst <= tol, worst, tol, trials)


def check_homogeneous_oracle(rng, trials=1000, max_dim=10, tol=1e-12):
    worst = 0.0
    for _ in range(trials):
        d = int(rng.integers(1, max_dim + 1))
        m = int(rng.integers(1, 5))
        while d ** m > 20000:
            m -= 1
        p = rng.normal(size=d)
        x = _sparse_vec(rng, d)
        worst = max(worst, _rel(homogeneous(p, x, m), oracle.brute_homogeneous(p, x, m)))
    return CheckResult("homogeneous_vs_brute", worst <= tol, worst, tol, trials)


def check_recursion(rng, trials=300, max_dim=10, tol=1e-12):
    """A^m(p, x) = A^m(p_-j, x_-j) + p_j x_j A^{m-1}(p_-j, x_-j)."""
    worst = 0.0
    for _ in range(trials):
        d = int(rng.integers(2, max_dim + 1))
        m = int(rng.integers(1, d + 1))
        p = rng.normal(size=d)
        x = rng.normal(size=d)
        j = int(rng.integers(d))
        pr, xr = np.delete(p, j), np.delete(x, j)
        rhs = anova_recursive(pr, xr, m) + p[j] * x[j] * anova_recursive(pr, xr, m - 1)
        worst = max(worst, _rel(anova_recursive(p, x, m), rhs))
    return CheckResult("multilinear_recursion", worst <= tol, worst, tol, trials)


def check_multilinearity(rng, trials=300, max_dim=8, tol=1e-8):
    """Second central difference of A^m in one coordinate vanishes."""
    worst = 0.0
    for _ in range(trials):
        d = int(rng.integers(2, max_dim + 1))
        m = int(rng.integers(1, d + 1))
        p = rng.normal(size=d)
        x = rng.normal(size=d)
        j = int(rng.integers(d))
        h = 0.5
        vals = []
        for c in (-h, 0.0, h):
            q = p.copy()
            q[j] += c
            vals.append(anova_recursive(q, x, m))
        worst = max(worst, abs(vals[0] - 2 * vals[1] + vals[2]))
    return CheckResult("multilinearity_second_difference", worst <= tol, worst, tol, trials)


def check_homogeneity(rng, trials=300, max_dim=10, tol=1e-12,
                      scales=(-2.0, -1.0, 0.5, 3.0)):
    """K(c p, x) = c^m K(p, x) for both kernels."""
    worst = 0.0
    for _ in range(trials):
        d = int(rng.integers(1, max_dim + 1))
        m = int(rng.integers(1, 6))
        p = rng.normal(size=d)
        x = rng.normal(size=d)
        for kernel in ("anova", "homogeneous"):
            for c in scales:
                lhs, rhs = homogeneity_check(p, x, m, c, kernel)
                worst = max(worst, _rel(lhs, rhs))
    return CheckResult("homogeneity", worst <= tol, worst, tol, trials)


def check_symmetrization(rng, trials=40, max_dim=4, max_order=4, tol=1e-10):
    """<sym(M), x^m> = <M, x^m> for arbitrary M."""
    worst = 0.0
    for _ in range(trials):
        d = int(rng.integers(1, max_dim + 1))
        m = int(rng.integers(2, max_order + 1))
        M = oracle.DenseTensor(rng.normal(size=(d,) * m))
        x = rng.normal(size=d)
        S = oracle.symmetrize(M)
        worst = max(worst, _rel(oracle.contract(S, x), oracle.contract(M, x)))
        if not oracle.is_symmetric(S):
            worst = np.inf
    return CheckResult("symmetrization_inner_product", worst <= tol, worst, tol, trials)


def check_expansion(rng, trials=40, max_dim=4, max_order=4, max_rank=3, tol=1e-10):
    """Contractions of sum_s lambda_s p_s^m reproduce kernel expansions."""
    worst = 0.0
    for _ in range(trials):
        d = int(rng.integers(1, max_dim + 1))
        m = int(rng.integers(2, max_order + 1))
        k = int(rng.integers(1, max_rank + 1))
        lams = rng.normal(size=k)
        P = rng.normal(size=(d, k))
        x = rng.normal(size=d)
        W = oracle.DenseTensor.expansion(lams, P, m)
        yh = sum(lams[s] * homogeneous(P[:, s], x, m) for s in range(k))
        ya = sum(lams[s] * anova_recursive(P[:, s], x, m) for s in range(k))
        worst = max(worst, _rel(oracle.contract(W, x, "full"), yh),
                    _rel(oracle.contract(W, x, "strict_upper"), ya))
    return CheckResult("tensor_kernel_expansion", worst <= tol, worst, tol, trials)


def check_augmentation(rng, trials=300, max_dim=10, tol=1e-12):
    """Dummy features turn homogeneous kernels inhomogeneous.

    H^m([g, p], [1, x]) = (g + <p, x>)^m; A^m([g, p], [1, x]) = A^m + g A^{m-1};
    with m - 1 unit dummies and unit weights, A^m sums A^m down to A^1.
    """
    worst = 0.0
    for _ in range(trials):
        d = int(rng.integers(1, max_dim + 1))
        m = int(rng.integers(1, d + 1))
        p = rng.normal(size=d)
        x = rng.normal(size=d)
        g = float(rng.normal())
        pt = np.concatenate([[g], p])
        xt = augment_sample(SampleView.from_dense(x), 1)
        worst = max(worst, _rel(homogeneous(pt, xt, m), (g + p @ x) ** m))
        worst = max(worst, _rel(anova_recursive(pt, xt, m),
                                anova_recursive(p, x, m) + g * anova_recursive(p, x, m - 1)))
        if m >= 2:
            pm = np.concatenate([np.ones(m - 1), p])
            xm = augment_sample(SampleView.from_dense(x), m - 1)
            # each A^t with t < m picks up C(m-1, m-t) choices of dummies
            ref = sum(comb(m - 1, m - t) * anova_recursive(p, x, t) for t in range(1, m + 1))
            worst = max(worst, _rel(anova_recursive(pm, xm, m), ref))
    return CheckResult("dummy_feature_augmentation", worst <= tol, worst, tol, trials)


CHECKS = {
    "anova": check_anova_oracle,
    "homogeneous": check_homogeneous_oracle,
    "recursion": check_recursion,
    "multilinearity": check_multilinearity,
    "homogeneity": check_homogeneity,
    "symmetrization": check_symmetrization,
    "expansion": check_expansion,
    "augmentation": check_augmentation,
}


def run_all(seed=0, trials=None, max_dim=None):
    """Run every check; ``trials``/``max_dim`` cap oracle sizes when given."""
    rng = np.random.default_rng(seed)
    results = []
    for name, check in CHECKS.items():
        kwargs = {}
        if trials is not None:
            kwargs["trials"] = trials
        if max_dim is not None:
            kwargs["max_dim"] = min(max_dim, 4) if name in ("symmetrization", "expansion") else max_dim
        results.append(check(rng, **kwargs))
    return results
