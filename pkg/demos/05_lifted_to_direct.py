"""Recover a kernel expansion from a trained lifted model.

A degree-2 lifted model stores U and V; the eigendecomposition of
sym(U V^T) gives weights lambda and bases P predicting the same values.
"""

import numpy as np

from polyfm import SparseDataset, TrainConfig
from polyfm.lifted import lifted_to_direct, train_lifted

rng = np.random.default_rng(4)
X = rng.normal(size=(200, 10))
a, b = rng.normal(size=10), rng.normal(size=10)
y = (X @ a) ** 2 - 0.5 * (X @ b) ** 2
data = SparseDataset.from_dense(X, y)

lifted = train_lifted(data, TrainConfig(beta=0.1, rank=3, degree=2, kernel="homogeneous",
                                        epochs=300, init_std=0.1))
direct = lifted_to_direct(lifted)
print("eigen-weights:", np.round(direct.lams, 3))
print("target weights:", round(float(a @ a), 3), round(float(-0.5 * b @ b), 3))
gap = np.max(np.abs(direct.predict(data) - lifted.predict(data)))
print("largest prediction difference:", gap)
