"""A cubic polynomial network trained with the lifted solver.

One dummy feature turns <p, x>^3 into (gamma + <p, x>)^3, so the model also
learns the lower-order terms.
"""

import numpy as np

from polyfm import SparseDataset, TrainConfig
from polyfm.lifted import objective_lifted, train_lifted
from polyfm.store import r2

rng = np.random.default_rng(2)
n, d = 300, 8
X = rng.normal(size=(n, d))
w = rng.normal(size=d)
y = (X @ w) ** 3 / 10 + 2 * X[:, 0] + 1.0 + 0.1 * rng.normal(size=n)
data = SparseDataset.from_dense(X, y)

cfg = TrainConfig(beta=0.01, rank=4, degree=3, kernel="homogeneous", augment=1,
                  epochs=300, init_std=0.3)
log = []
model = train_lifted(data, cfg, callback=lambda e, obj, delta: log.append((e, obj, delta)))
for epoch, obj, delta in log[::50]:
    print(f"epoch {epoch:3d}  objective {obj:10.3f}  delta {delta:.2e}")
print("training r2:", round(r2(model.predict(data), y), 4))
print("final objective:", objective_lifted(model, data, "squared", cfg.beta))
