"""Slow, obviously correct reference implementations.

Everything here enumerates index tuples or permutations explicitly and is
only meant for checking the fast paths on small inputs.
"""

import itertools
import math

import numpy as np

from .data import SampleView

BUDGET = 10 ** 6


class BudgetExceeded(ValueError):
    pass


def _dense(x, d=None):
    if isinstance(x, SampleView):
        if d is None:
            raise ValueError("dimension required for sparse samples")
        return x.to_dense(d)
    return np.asarray(x, dtype=np.float64)


class DenseTensor:
    """Cubical tensor of order m over d dimensions (at most 10^6 entries)."""

    def __init__(self, data):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim == 0 or len(set(data.shape)) != 1:
            raise ValueError(f"tensor must be cubical, got shape {data.shape}")
        if data.size > BUDGET:
            raise BudgetExceeded(f"{data.size} entries exceeds budget {BUDGET}")
        self.data = data

    @property
    def order(self):
        return self.data.ndim

    @property
    def dim(self):
        return self.data.shape[0]

    @classmethod
    def zeros(cls, d, m):
        return cls(np.zeros((d,) * m))

    @classmethod
    def outer_power(cls, p, m):
        """p (x) p (x) ... (x) p, m times."""
        p = np.asarray(p, dtype=np.float64)
        t = np.ones(())
        for _ in range(m):
            t = np.multiply.outer(t, p)
        return cls(t)

    @classmethod
    def from_factors(cls, factors):
        """sum_s u^1_s (x) ... (x) u^m_s for factors of shape (m, d, r)."""
        factors = np.asarray(factors, dtype=np.float64)
        m, d, r = factors.shape
        total = np.zeros((d,) * m)
        for s in range(r):
            t = np.ones(())
            for U in factors:
                t = np.multiply.outer(t, U[:, s])
            total += t
        return cls(total)

    @classmethod
    def expansion(cls, lams, P, m):
        """sum_s lambda_s p_s^{(x)m}."""
        P = np.asarray(P, dtype=np.float64)
        total = np.zeros((P.shape[0],) * m)
        for lam, p in zip(lams, P.T):
            total += lam * cls.outer_power(p, m).data
        return cls(total)

    def __add__(self, other):
        return DenseTensor(self.data + other.data)

    def __mul__(self, c):
        return DenseTensor(self.data * c)

    __rmul__ = __mul__


def brute_anova(p, x, m):
    """Sum over all strictly increasing index tuples j_1 < ... < j_m."""
    p = np.asarray(p, dtype=np.float64)
    x = _dense(x, p.shape[0])
    d = p.shape[0]
    if m == 0:
        return 1.0
    if m > d:
        return 0.0
    if math.comb(d, m) > BUDGET:
        raise BudgetExceeded(f"C({d}, {m}) exceeds budget {BUDGET}")
    z = p * x
    return float(sum(math.prod(z[list(idx)]) for idx in itertools.combinations(range(d), m)))


def brute_homogeneous(p, x, m):
    """Sum over all d^m index tuples (with replacement)."""
    p = np.asarray(p, dtype=np.float64)
    x = _dense(x, p.shape[0])
    d = p.shape[0]
    if d ** m > BUDGET:
        raise BudgetExceeded(f"{d}^{m} exceeds budget {BUDGET}")
    z = p * x
    return float(sum(math.prod(z[list(idx)]) for idx in itertools.product(range(d), repeat=m)))


def permute_axes(t, sigma):
    """(M_sigma)_{j_1..j_m} = M_{j_sigma(1)..j_sigma(m)}."""
    # np.transpose(M, axes)[i] = M[i[axes^-1]]; invert so the definition holds.
    inv = np.argsort(sigma)
    return DenseTensor(np.transpose(t.data, inv))


def symmetrize(t):
    """Average of the tensor over all m! axis permutations."""
    m = t.order
    if math.factorial(m) * t.data.size > 50 * BUDGET:
        raise BudgetExceeded("symmetrization too large")
    total = np.zeros_like(t.data)
    for sigma in itertools.permutations(range(m)):
        total += permute_axes(t, sigma).data
    return DenseTensor(total / math.factorial(m))


def is_symmetric(t, atol=1e-12):
    return all(np.allclose(permute_axes(t, sigma).data, t.data, atol=atol)
               for sigma in itertools.permutations(range(t.order)))


def contract(t, x, mode="full"):
    """<W, x^{(x)m}> over all index tuples, or strictly increasing ones."""
    x = _dense(x, t.dim)
    if x.shape[0] != t.dim:
        raise ValueError("dimension mismatch")
    X = DenseTensor.outer_power(x, t.order).data
    if mode == "full":
        return float(np.sum(t.data * X))
    if mode != "strict_upper":
        raise ValueError(f"unknown contraction mode {mode!r}")
    total = 0.0
    for idx in itertools.combinations(range(t.dim), t.order):
        total += t.data[idx] * X[idx]
    return float(total)


def finite_diff(f, at, h=1e-5):
    """Central difference (f(a + h) - f(a - h)) / 2h."""
    if h <= 0:
        raise ValueError("h must be positive")
    return (f(at + h) - f(at - h)) / (2.0 * h)


def coordinate_function(objective, params, index):
    """Return g(v) evaluating ``objective`` with ``params[index] = v``."""
    def g(v):
        old = params[index]
        params[index] = v
        try:
            return objective()
        finally:
            params[index] = old
    return g


def golden_section_min(f, lo, hi, tol=1e-12, max_iter=200):
    """Minimum of a unimodal function on [lo, hi]; returns (argmin, value)."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * (abs(a) + abs(b) + 1e-300):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)
