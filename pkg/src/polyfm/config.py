from dataclasses import dataclass, replace

_LAMBDA_POLICIES = {
    "ones": "ones", "fixed_ones": "ones",
    "fit": "fit",
    "signs": "signs", "random_signs": "signs",
}


@dataclass(frozen=True)
class TrainConfig:
    """Solver hyper-parameters shared by the direct and lifted trainers.

    ``rank`` is the number of bases k (direct) or the rank r (lifted).
    ``fit_lambda`` is one of ``ones``, ``fit`` or ``signs`` and only matters
    for the direct solver. ``tol`` bounds the summed absolute parameter change
    of one epoch. Caches are rebuilt from scratch every ``recompute_every``
    epochs to bound floating point drift.
    """

    beta: float = 1.0
    rank: int = 2
    degree: int = 2
    kernel: str = "anova"
    epochs: int = 100
    tol: float = 1e-6
    seed: int = 0
    fit_lambda: str = "ones"
    init_std: float = 0.01
    augment: int = 0
    recompute_every: int = 10
    full_cache: bool = False
    lambda_tol: float = 1e-8
    lambda_max_iter: int = 1000

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")
        if self.rank < 0 or self.epochs < 0 or self.augment < 0:
            raise ValueError("rank, epochs and augment must be >= 0")
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        if self.kernel not in ("anova", "homogeneous"):
            raise ValueError(f"kernel must be 'anova' or 'homogeneous', got {self.kernel!r}")
        if self.fit_lambda not in _LAMBDA_POLICIES:
            raise ValueError(f"unknown fit_lambda policy {self.fit_lambda!r}")
        object.__setattr__(self, "fit_lambda", _LAMBDA_POLICIES[self.fit_lambda])
        if self.recompute_every < 1:
            raise ValueError("recompute_every must be >= 1")

    def replace(self, **changes):
        return replace(self, **changes)
