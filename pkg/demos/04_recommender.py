"""Rating prediction from one-hot (user, item) pairs.

For such inputs A^2 picks up exactly one user-item interaction per rating,
and a dummy feature adds user and item biases.
"""

import numpy as np

from polyfm import TrainConfig, train_direct
from polyfm.data import one_hot_dataset, train_test_split
from polyfm.store import rmse

rng = np.random.default_rng(3)
n_users, n_items, rank = 50, 40, 3
U, V = rng.normal(size=(n_users, rank)), rng.normal(size=(n_items, rank))
users = rng.integers(n_users, size=1500)
items = rng.integers(n_items, size=1500)
ratings = 3 + np.sum(U[users] * V[items], axis=1) + 0.3 * rng.normal(size=1500)
data = one_hot_dataset(users, items, ratings, n_users, n_items)
train, test = train_test_split(data, 0.25, seed=0)

print("global mean RMSE:", rmse(np.full(test.n_samples, train.y.mean()), test.y))
for beta in (0.1, 1.0, 10.0):
    cfg = TrainConfig(beta=beta, rank=6, degree=2, augment=1, epochs=200, tol=1e-5, init_std=0.1)
    model = train_direct(train, cfg)
    print(f"beta={beta:5.1f} test RMSE: {rmse(model.predict(test), test.y):.3f}")
