"""Command-line front end: ``polyfm {train,predict,evaluate,cv,verify,split}``."""

import argparse
import sys

import numpy as np

from . import properties, store
from .config import TrainConfig
from .data import (SvmlightFormatError, dump_svmlight, kfold_indices, load_svmlight,
                   maxabs_scale, train_test_split)
from .direct import objective_direct, train_direct
from .lifted import objective_lifted, train_lifted
from .losses import LOSSES, get_loss

KERNELS = {"anova": "anova", "poly": "homogeneous"}
LAMBDA = {"ones": "ones", "fit": "fit", "signs": "signs"}


class UsageError(Exception):
    pass


def _add_data(p, required=True):
    p.add_argument("--data", required=required, help="svmlight file")
    p.add_argument("--n-features", type=int, default=None,
                   help="override the inferred (raw) feature dimension")


def _add_train(p):
    p.add_argument("--solver", choices=("direct", "lifted"), default="direct")
    p.add_argument("--kernel", choices=tuple(KERNELS), default="anova")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--rank", type=int, default=10, help="k (direct) or r (lifted)")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--loss", choices=tuple(LOSSES), default="squared")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--augment", type=int, default=0, help="number of dummy features")
    p.add_argument("--fit-lambda", choices=tuple(LAMBDA), default="ones")
    p.add_argument("--init-std", type=float, default=0.01)
    p.add_argument("--full-cache", action="store_true",
                   help="lifted solver: keep all <u^t_s, x_i> instead of recomputing")
    p.add_argument("--scale", choices=("none", "maxabs"), default="none",
                   help="feature scaling applied before training (stored in the model)")


def build_parser():
    parser = argparse.ArgumentParser(prog="polyfm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write a .fmjson file")
    _add_data(p)
    _add_train(p)
    p.add_argument("--model", required=True, help="output model path")
    p.add_argument("--quiet", action="store_true", help="do not print the epoch log")

    p = sub.add_parser("predict", help="write one prediction per line")
    _add_data(p)
    p.add_argument("--model", required=True)
    p.add_argument("--output", default="-")

    p = sub.add_parser("evaluate", help="print a test-set metric")
    _add_data(p)
    p.add_argument("--model", required=True)
    p.add_argument("--metric", choices=tuple(store.METRICS), default="rmse")

    p = sub.add_parser("cv", help="select beta by k-fold cross-validation")
    _add_data(p)
    _add_train(p)
    p.add_argument("--beta-grid", default="1e-3:1e3:10", help="lo:hi:count, log-spaced")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--metric", choices=tuple(store.METRICS), default="rmse")
    p.add_argument("--model", default=None, help="write the model retrained on all data")

    p = sub.add_parser("verify", help="run the oracle-backed identity checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=None, help="cap trials per check")
    p.add_argument("--max-dim", type=int, default=None, help="cap oracle dimension")

    p = sub.add_parser("split", help="seeded train/test split of an svmlight file")
    _add_data(p)
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    return parser


def config_from_args(args, beta=None):
    kernel = KERNELS[args.kernel]
    if args.solver == "direct" and kernel == "homogeneous":
        raise UsageError(
            "--solver direct does not support --kernel poly: the direct objective with the "
            "homogeneous kernel is not coordinate-wise convex; use --solver lifted")
    if args.solver == "direct" and args.degree not in (2, 3):
        raise UsageError("--solver direct supports --degree 2 or 3 only")
    if args.solver == "lifted" and kernel == "anova" and args.degree != 2:
        raise UsageError(
            "--solver lifted with --kernel anova is only available for --degree 2; "
            "the lifted ANOVA formulation is not derived for higher degrees")
    if args.solver == "lifted" and args.degree < 2:
        raise UsageError("--solver lifted needs --degree >= 2")
    try:
        return TrainConfig(
            beta=args.beta if beta is None else beta, rank=args.rank, degree=args.degree,
            kernel=kernel, epochs=args.epochs, tol=args.tol, seed=args.seed,
            fit_lambda=LAMBDA[args.fit_lambda], init_std=args.init_std,
            augment=args.augment, full_cache=args.full_cache)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _fit(args, ds, config, callback=None):
    spec = get_loss(args.loss)
    if args.solver == "direct":
        return train_direct(ds, config, spec, callback=callback)
    return train_lifted(ds, config, spec, callback=callback)


def _load_data(args):
    return load_svmlight(args.data, n_features=args.n_features)


def cmd_train(args, out=sys.stdout):
    config = config_from_args(args)
    ds = _load_data(args)
    scale = None
    if args.scale == "maxabs":
        ds, scale = maxabs_scale(ds)

    def log(epoch, objective, delta):
        if not args.quiet:
            print(f"{epoch}\t{objective!r}\t{delta!r}", file=out)

    if not args.quiet:
        print("epoch\tobjective\tdelta", file=out)
    model = _fit(args, ds, config, log)
    store.save(model, args.model, feature_scale=scale)
    return 0


def _prepare_eval(args):
    model, scale = store.load(args.model, with_scale=True)
    ds = load_svmlight(args.data, n_features=args.n_features)
    if ds.n_features > model.n_features:
        raise ValueError(
            f"dimension mismatch: data has {ds.n_features} features, model was trained "
            f"on {model.n_features}")
    ds = ds.with_n_features(model.n_features)
    if scale is not None:
        ds, _ = maxabs_scale(ds, scale)
    return model, ds


def cmd_predict(args, out=sys.stdout):
    model, ds = _prepare_eval(args)
    text = "".join(f"{v!r}\n" for v in model.predict(ds).tolist())
    if args.output == "-":
        out.write(text)
    else:
        with open(args.output, "w") as f:
            f.write(text)
    return 0


def cmd_evaluate(args, out=sys.stdout):
    model, ds = _prepare_eval(args)
    value = store.METRICS[args.metric](model.predict(ds), ds.y)
    print(f"{args.metric}\t{value!r}", file=out)
    return 0


def parse_grid(spec):
    try:
        lo, hi, count = spec.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise UsageError(f"--beta-grid must be lo:hi:count, got {spec!r}") from None
    if lo <= 0 or hi <= 0 or count < 1:
        raise UsageError("--beta-grid bounds must be positive and count >= 1")
    return np.logspace(np.log10(lo), np.log10(hi), count)


def cmd_cv(args, out=sys.stdout):
    grid = parse_grid(args.beta_grid)
    config_from_args(args)
    ds = _load_data(args)
    if args.scale == "maxabs":
        ds, scale = maxabs_scale(ds)
    else:
        scale = None
    try:
        folds = list(kfold_indices(ds.n_samples, args.folds, seed=args.seed))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    metric = store.METRICS[args.metric]
    print("beta\tmean\tsd", file=out)
    means = []
    for beta in grid.tolist():
        config = config_from_args(args, beta=beta)
        scores = []
        for train, test in folds:
            model = _fit(args, ds.subset(train), config)
            held = ds.subset(test)
            scores.append(metric(model.predict(held), held.y))
        means.append(float(np.mean(scores)))
        print(f"{beta!r}\t{means[-1]!r}\t{float(np.std(scores))!r}", file=out)
    pick = int(np.argmin(means) if args.metric == "rmse" else np.argmax(means))
    best = float(grid[pick])
    print(f"best_beta\t{best!r}", file=out)
    if args.model:
        model = _fit(args, ds, config_from_args(args, beta=best))
        store.save(model, args.model, feature_scale=scale)
    return 0


def cmd_verify(args, out=sys.stdout):
    results = properties.run_all(seed=args.seed, trials=args.trials, max_dim=args.max_dim)
    for r in results:
        print(r.line(), file=out)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def cmd_split(args, out=sys.stdout):
    ds = _load_data(args)
    train, test = train_test_split(ds, args.test_fraction, args.seed)
    dump_svmlight(train, args.train_out)
    dump_svmlight(test, args.test_out)
    print(f"train\t{train.n_samples}\ntest\t{test.n_samples}", file=out)
    return 0


COMMANDS = {
    "train": cmd_train, "predict": cmd_predict, "evaluate": cmd_evaluate,
    "cv": cmd_cv, "verify": cmd_verify, "split": cmd_split,
}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, out=out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"polyfm {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, SvmlightFormatError, store.ModelFileError, ValueError) as exc:
        print(f"polyfm {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
