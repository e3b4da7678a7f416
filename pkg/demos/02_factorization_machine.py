"""Train a second-order factorization machine with direct coordinate descent.

With lambda fixed to ones the model is a classic FM (without the linear
term, which a dummy feature brings back). Letting the solver fit lambda
allows negative eigenvalues in the interaction matrix.
"""

import numpy as np

from polyfm import SparseDataset, TrainConfig, train_direct
from polyfm.direct import objective_direct

rng = np.random.default_rng(1)
n, d = 400, 20
X = rng.normal(size=(n, d)) * (rng.random((n, d)) < 0.3)
a, b = rng.normal(size=d), rng.normal(size=d)
# Interactions from an indefinite matrix: a a^T - b b^T, off-diagonal only.
y = 0.5 * ((X @ a) ** 2 - (X ** 2) @ (a * a)) - 0.5 * ((X @ b) ** 2 - (X ** 2) @ (b * b))
data = SparseDataset.from_dense(X, y + 0.05 * rng.normal(size=n))

for policy in ("ones", "fit"):
    cfg = TrainConfig(beta=0.1, rank=4, degree=2, epochs=100, fit_lambda=policy, init_std=0.1)
    history = []
    model = train_direct(data, cfg, callback=lambda e, obj, delta: history.append(obj))
    print(f"lambda={policy:4s} epochs={model.meta['epochs']:3d} "
          f"objective {history[0]:.2f} -> {objective_direct(model, data, 'squared', 0.1):.2f} "
          f"lambda={np.round(model.lams, 2)}")
