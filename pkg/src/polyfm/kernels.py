"""Homogeneous polynomial and ANOVA kernels.

All single-sample functions take a dense weight vector ``p`` and a sample
``x`` given either as a dense vector or a :class:`~polyfm.data.SampleView`.
Only the nonzero coordinates of ``x`` are ever visited.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import SampleView, as_sample

HOMOGENEOUS = "homogeneous"
ANOVA = "anova"


@dataclass(frozen=True)
class KernelKind:
    name: str
    degree: int

    def __post_init__(self):
        if self.name not in (HOMOGENEOUS, ANOVA):
            raise ValueError(f"unknown kernel {self.name!r}")
        if self.degree < 1:
            raise ValueError("degree must be >= 1")

    @classmethod
    def homogeneous(cls, m):
        return cls(HOMOGENEOUS, m)

    @classmethod
    def anova(cls, m):
        return cls(ANOVA, m)

    def __call__(self, p, x):
        if self.name == HOMOGENEOUS:
            return homogeneous(p, x, self.degree)
        return anova(p, x, self.degree)

    def batch(self, X, P):
        """Kernel values K(p_s, x_i) for all rows of X and columns of P."""
        if self.name == HOMOGENEOUS:
            return homogeneous_batch(X, P, self.degree)
        return anova_batch(X, P, self.degree)


@dataclass(frozen=True)
class PowerSums:
    """D(p, x, t) = sum_j (p_j x_j)^t for t = 1, 2, 3."""

    d1: float
    d2: float
    d3: float


@dataclass
class PerSampleCache:
    """<p, x> and A^2(p, x) for one sample, kept in sync by the caller."""

    dot: float
    a2: float = 0.0


def _prepare(p, x):
    p = np.asarray(p, dtype=np.float64)
    x = as_sample(x)
    if p.ndim != 1:
        raise ValueError("p must be a 1-d vector")
    if x.nnz and x.indices[-1] >= p.shape[0]:
        raise ValueError(
            f"dimension mismatch: sample uses feature {x.indices[-1]}, p has {p.shape[0]}")
    return p, x


def _dense_check(p, x):
    if not isinstance(x, SampleView):
        if np.shape(x) != np.shape(p):
            raise ValueError(f"dimension mismatch: {np.shape(p)} vs {np.shape(x)}")


def _terms(p, x):
    _dense_check(p, x)
    p, x = _prepare(p, x)
    return p[x.indices] * x.values


def power_sums(p, x):
    z = _terms(p, x)
    return PowerSums(float(z.sum()), float((z ** 2).sum()), float((z ** 3).sum()))


def homogeneous(p, x, m):
    """<p, x>^m."""
    if m < 1:
        raise ValueError("degree must be >= 1")
    return float(_terms(p, x).sum()) ** m


def anova_fast(p, x, m):
    """A^2 or A^3 from power sums in O(nnz(x))."""
    if m not in (2, 3):
        raise ValueError(f"anova_fast supports m in {{2, 3}}, got {m}")
    D = power_sums(p, x)
    if m == 2:
        return 0.5 * (D.d1 ** 2 - D.d2)
    return (D.d1 ** 3 - 3.0 * D.d2 * D.d1 + 2.0 * D.d3) / 6.0


def _anova_table(z, m):
    # a[t] = A^t over the features visited so far; updated high-to-low so each
    # feature enters a monomial at most once.
    a = np.zeros(m + 1)
    a[0] = 1.0
    for zj in z:
        for t in range(m, 0, -1):
            a[t] += zj * a[t - 1]
    return a


def anova_recursive(p, x, m):
    """A^m for any m >= 0 via the feature-by-feature recursion.

    Returns 0 when m exceeds the number of nonzeros of x.
    """
    if m < 0:
        raise ValueError("degree must be >= 0")
    z = _terms(p, x)
    if m > z.size:
        return 0.0
    return float(_anova_table(z, m)[m])


def anova(p, x, m):
    if m in (2, 3):
        return anova_fast(p, x, m)
    return anova_recursive(p, x, m)


def anova_grad_coord(p, x, j, m, cache, check=False):
    """dA^m(p, x)/dp_j for m in {2, 3} in O(1) from ``cache``."""
    if m not in (2, 3):
        raise ValueError(f"anova_grad_coord supports m in {{2, 3}}, got {m}")
    p, x = _prepare(p, x)
    if check:
        z = p[x.indices] * x.values
        fresh = PerSampleCache(float(z.sum()), 0.5 * (z.sum() ** 2 - (z ** 2).sum()))
        if not (np.isclose(fresh.dot, cache.dot, rtol=1e-8, atol=1e-12)
                and (m == 2 or np.isclose(fresh.a2, cache.a2, rtol=1e-8, atol=1e-12))):
            raise AssertionError("stale kernel cache")
    pos = np.searchsorted(x.indices, j)
    if pos == x.nnz or x.indices[pos] != j:
        return 0.0
    xj = x.values[pos]
    pj = p[j]
    if m == 2:
        return (cache.dot - pj * xj) * xj
    return cache.a2 * xj - pj * xj * xj * cache.dot + pj * pj * xj ** 3


def homogeneity_check(p, x, m, c, kernel=ANOVA):
    """Return (K(c p, x), c^m K(p, x)) for the chosen kernel."""
    K = KernelKind(kernel, m)
    p = np.asarray(p, dtype=np.float64)
    return K(c * p, x), c ** m * K(p, x)


# -- batch evaluation over a whole design matrix ---------------------------

def _rows(X):
    # accept SparseDataset or any scipy sparse / dense matrix
    return getattr(X, "csr", X)


def homogeneous_batch(X, P, m):
    P = np.asarray(P, dtype=np.float64).reshape(P.shape[0], -1)
    return np.asarray(_rows(X) @ P) ** m


def anova_batch(X, P, m):
    """Matrix of A^m(p_s, x_i), shape (n_samples, n_bases)."""
    X = _rows(X)
    P = np.asarray(P, dtype=np.float64).reshape(P.shape[0], -1)
    if m in (2, 3):
        XP = np.asarray(X @ P)
        X2 = X.multiply(X)
        D2 = np.asarray(X2 @ (P ** 2))
        if m == 2:
            return 0.5 * (XP ** 2 - D2)
        D3 = np.asarray(X2.multiply(X) @ (P ** 3))
        return (XP ** 3 - 3.0 * D2 * XP + 2.0 * D3) / 6.0
    return anova_dp_batch(X, P, m)


def anova_dp_batch(X, P, m):
    """General-m A^m over all samples, one pass per feature column."""
    Xc = X.tocsc() if hasattr(X, "tocsc") else np.asarray(X)
    n, d = Xc.shape
    k = P.shape[1]
    A = np.zeros((m + 1, n, k))
    A[0] = 1.0
    for j in range(d):
        if hasattr(Xc, "indptr"):
            start, stop = Xc.indptr[j], Xc.indptr[j + 1]
            rows, vals = Xc.indices[start:stop], Xc.data[start:stop]
        else:
            rows = np.flatnonzero(Xc[:, j])
            vals = Xc[rows, j]
        if rows.size == 0:
            continue
        z = vals[:, None] * P[j][None, :]
        for t in range(m, 0, -1):
            A[t, rows] += z * A[t - 1, rows]
    return A[m]
