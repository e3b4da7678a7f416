"""Sparse labeled datasets stored feature-major for coordinate descent."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp


class SvmlightFormatError(ValueError):
    """Raised when an svmlight file cannot be parsed."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


@dataclass(frozen=True)
class SampleView:
    """A single sparse sample: sorted feature indices and their values."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        indices = np.asarray(self.indices, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if indices.shape != values.shape or indices.ndim != 1:
            raise ValueError("indices and values must be 1-d arrays of equal length")
        if indices.size > 1 and np.any(np.diff(indices) <= 0):
            raise ValueError("indices must be strictly increasing")
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "values", values)

    @property
    def nnz(self):
        return self.indices.size

    @classmethod
    def from_dense(cls, x):
        x = np.asarray(x, dtype=np.float64)
        idx = np.flatnonzero(x)
        return cls(idx, x[idx])

    def to_dense(self, n_features):
        out = np.zeros(n_features)
        out[self.indices] = self.values
        return out


def as_sample(x):
    """Accept a SampleView or a dense 1-d array and return a SampleView."""
    if isinstance(x, SampleView):
        return x
    return SampleView.from_dense(x)


@dataclass(frozen=True, eq=False)
class SparseDataset:
    """Design matrix X (n x d) with targets y.

    ``csc`` is the canonical column-major storage swept by the solvers;
    ``csr`` is a row view materialized once for prediction.
    """

    csc: sp.csc_matrix
    targets: np.ndarray
    csr: sp.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        X = sp.csc_matrix(self.csc, dtype=np.float64, copy=True)
        X.eliminate_zeros()
        X.sort_indices()
        y = np.asarray(self.targets, dtype=np.float64).copy()
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError(
                f"targets has length {y.shape}, expected ({X.shape[0]},)")
        X.data.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "csc", X)
        object.__setattr__(self, "targets", y)
        object.__setattr__(self, "csr", X.tocsr())

    @classmethod
    def from_dense(cls, X, y):
        return cls(sp.csc_matrix(np.atleast_2d(np.asarray(X, dtype=np.float64))), y)

    @classmethod
    def from_rows(cls, rows, y, n_features):
        """Build from a list of (indices, values) pairs."""
        indptr = [0]
        indices = []
        data = []
        for idx, val in rows:
            indices.extend(idx)
            data.extend(val)
            indptr.append(len(indices))
        X = sp.csr_matrix(
            (np.asarray(data, dtype=np.float64),
             np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
            shape=(len(rows), n_features))
        return cls(X.tocsc(), y)

    @property
    def n_samples(self):
        return self.csc.shape[0]

    @property
    def n_features(self):
        return self.csc.shape[1]

    @property
    def nnz(self):
        return self.csc.nnz

    @property
    def y(self):
        return self.targets

    def column(self, j):
        """Return (sample indices, values) of feature ``j``."""
        start, stop = self.csc.indptr[j], self.csc.indptr[j + 1]
        return self.csc.indices[start:stop], self.csc.data[start:stop]

    def row(self, i):
        start, stop = self.csr.indptr[i], self.csr.indptr[i + 1]
        return SampleView(self.csr.indices[start:stop], self.csr.data[start:stop])

    def subset(self, rows):
        rows = np.asarray(rows, dtype=np.int64)
        return SparseDataset(self.csr[rows].tocsc(), self.targets[rows])

    def with_n_features(self, n_features):
        """Pad with trailing empty features (never truncates)."""
        if n_features < self.n_features:
            raise ValueError(
                f"dataset has {self.n_features} features, cannot shrink to {n_features}")
        if n_features == self.n_features:
            return self
        X = sp.csc_matrix((self.csc.data, self.csc.indices,
                           np.concatenate([self.csc.indptr,
                                           np.full(n_features - self.n_features,
                                                   self.csc.indptr[-1])])),
                          shape=(self.n_samples, n_features))
        return SparseDataset(X, self.targets)

    def toarray(self):
        return self.csc.toarray()

    def __eq__(self, other):
        if not isinstance(other, SparseDataset):
            return NotImplemented
        return (self.csc.shape == other.csc.shape
                and np.array_equal(self.csc.indptr, other.csc.indptr)
                and np.array_equal(self.csc.indices, other.csc.indices)
                and np.array_equal(self.csc.data, other.csc.data)
                and np.array_equal(self.targets, other.targets))


def _parse_line(line, lineno):
    parts = line.split()
    try:
        target = float(parts[0])
    except ValueError:
        raise SvmlightFormatError(f"invalid target {parts[0]!r}", lineno) from None
    indices = []
    values = []
    prev = 0
    for tok in parts[1:]:
        idx, sep, val = tok.partition(":")
        if not sep:
            raise SvmlightFormatError(f"expected <index>:<value>, got {tok!r}", lineno)
        try:
            j = int(idx)
            v = float(val)
        except ValueError:
            raise SvmlightFormatError(f"malformed feature {tok!r}", lineno) from None
        if j < 1:
            raise SvmlightFormatError(f"feature index {j} is not 1-based", lineno)
        if j <= prev:
            raise SvmlightFormatError(
                f"feature indices must be strictly increasing ({prev} then {j})", lineno)
        prev = j
        if v != 0.0:
            indices.append(j - 1)
            values.append(v)
    return target, indices, values, prev


def load_svmlight(path, n_features=None):
    """Read an svmlight/libsvm file.

    Lines are ``<target> <idx>:<val> ...`` with 1-based, strictly increasing
    indices. Blank lines and ``#`` comments are ignored; explicit zeros are
    dropped. ``n_features`` overrides the inferred dimension (the largest
    index seen), which must not exceed it.
    """
    targets = []
    rows = []
    d = 0
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            y, idx, val, max_idx = _parse_line(line, lineno)
            targets.append(y)
            rows.append((idx, val))
            d = max(d, max_idx)
    if n_features is not None:
        if n_features < d:
            raise SvmlightFormatError(
                f"file uses feature index {d} but n_features={n_features}")
        d = n_features
    return SparseDataset.from_rows(rows, np.asarray(targets, dtype=np.float64), d)


def dump_svmlight(ds, path):
    """Write ``ds`` so that :func:`load_svmlight` reproduces it exactly."""
    lines = []
    for i in range(ds.n_samples):
        row = ds.row(i)
        feats = " ".join(f"{j + 1}:{v!r}" for j, v in zip(row.indices.tolist(),
                                                           row.values.tolist()))
        lines.append(f"{float(ds.targets[i])!r} {feats}".rstrip() + "\n")
    Path(path).write_text("".join(lines))


def augment(ds, count):
    """Prepend ``count`` constant-1 dummy features to every sample."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if count == 0:
        return ds
    ones = sp.csc_matrix(np.ones((ds.n_samples, count)))
    return SparseDataset(sp.hstack([ones, ds.csc], format="csc"), ds.targets)


def augment_sample(x, count):
    x = as_sample(x)
    if count == 0:
        return x
    return SampleView(np.concatenate([np.arange(count), x.indices + count]),
                      np.concatenate([np.ones(count), x.values]))


def one_hot_pair(user, item, n_users, n_items):
    """Concatenated one-hot encoding of a (user, item) pair."""
    if not 0 <= user < n_users:
        raise IndexError(f"user {user} out of range [0, {n_users})")
    if not 0 <= item < n_items:
        raise IndexError(f"item {item} out of range [0, {n_items})")
    return SampleView([user, n_users + item], [1.0, 1.0])


def one_hot_dataset(users, items, ratings, n_users, n_items):
    rows = [one_hot_pair(u, i, n_users, n_items) for u, i in zip(users, items)]
    return SparseDataset.from_rows([(r.indices, r.values) for r in rows],
                                   np.asarray(ratings, dtype=np.float64),
                                   n_users + n_items)


def train_test_split(ds, test_fraction=0.25, seed=0):
    """Seeded uniform split (75/25 by default)."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(ds.n_samples)
    n_test = int(round(test_fraction * ds.n_samples))
    return ds.subset(np.sort(perm[n_test:])), ds.subset(np.sort(perm[:n_test]))


def kfold_indices(n_samples, n_folds, seed=0):
    """Seeded fold assignment; yields (train_rows, test_rows)."""
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    if n_samples < n_folds:
        raise ValueError(f"{n_samples} samples is fewer than {n_folds} folds")
    perm = np.random.default_rng(seed).permutation(n_samples)
    folds = np.array_split(perm, n_folds)
    for f in range(n_folds):
        test = np.sort(folds[f])
        train = np.sort(np.concatenate([folds[g] for g in range(n_folds) if g != f]))
        yield train, test


def maxabs_scale(ds, scale=None):
    """Divide every feature by its max absolute value.

    Returns the scaled dataset and the per-feature divisors so the same
    transform can be applied to held-out data.
    """
    if scale is None:
        scale = np.asarray(abs(ds.csc).max(axis=0).todense()).ravel()
        scale[scale == 0] = 1.0
    scale = np.asarray(scale, dtype=np.float64)
    if scale.shape[0] != ds.n_features:
        raise ValueError("scale length does not match n_features")
    return SparseDataset(ds.csc @ sp.diags(1.0 / scale), ds.targets), scale
