"""Factorization machines and polynomial networks trained by coordinate descent."""

from .config import TrainConfig
from .data import (SampleView, SparseDataset, SvmlightFormatError, augment,
                   dump_svmlight, load_svmlight, one_hot_pair, train_test_split)
from .direct import (DirectCaches, DirectModel, epoch_update_P, fit_lambda,
                     objective_direct, train_direct)
from .kernels import (KernelKind, PowerSums, anova, anova_fast, anova_grad_coord,
                      anova_recursive, homogeneity_check, homogeneous)
from .lifted import (LiftedCaches, LiftedModel, epoch_update_lifted,
                     epoch_update_lifted_a2, lifted_to_direct, objective_lifted,
                     predict_lifted_a2, predict_lifted_h, train_lifted)
from .losses import LOGISTIC, SQUARED, SQUARED_HINGE, LossSpec, get_loss, loss_deriv, loss_value
from .store import load, r2, rmse, save

__version__ = "0.1.0"
