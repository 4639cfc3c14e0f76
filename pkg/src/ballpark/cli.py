"""Command-line entry point.

Exit codes: 0 on success, 2 when the constraints are infeasible, 1 on any
other error.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import io
from .alternator import fit_ballpark
from .core import Bag, BagSet, Hyperparams, LabeledSet
from .expharness import (SensitivityConfig, SyntheticConfig, accuracy,
                         factor_constraints, high_vs_low, macro_f1,
                         make_synthetic_bags, make_synthetic_test,
                         sensitivity_scan, true_proportions, write_scan_csv)
from .label_lp import check_feasibility
from .svm import decision_values
from .tuner import DEFAULT_GRID, CvInputs, select_C, split_bags

EXIT_INFEASIBLE = 2


class Infeasible(Exception):
    def __init__(self, certificate):
        super().__init__("constraints are infeasible")
        self.certificate = certificate


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _names(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _hyperparams(args, C=None):
    return Hyperparams(C=args.C if C is None else C, C_L=args.C_L,
                       descent_mode=args.mode, soft_penalty=args.soft,
                       seed=args.seed)


def _read_labeled(path, ds):
    """``id,label`` rows naming the instances whose labels may be used."""
    pos = {i: k for k, i in enumerate(ds.ids)}
    chosen = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["id"] not in pos:
                raise io.FormatError(f"{path}: unknown id {row['id']!r}")
            lab = int(row["label"])
            if lab not in (-1, 1):
                raise io.FormatError(f"{path}: label must be +1 or -1")
            chosen[pos[row["id"]]] = lab
    return chosen


def _training_problem(args):
    """Load data, bags and constraints; labeled rows move to the end."""
    ds = io.load_dataset(args.data, args.format)
    specs = io.read_bag_specs(args.bags)
    cons = io.read_constraints(args.constraints)
    chosen = _read_labeled(args.labeled, ds) if args.labeled else {}
    order = [i for i in range(len(ds)) if i not in chosen] + sorted(chosen)
    new_pos = {old: new for new, old in enumerate(order)}
    bags = BagSet([Bag(b.name, [new_pos[i] for i in b.members])
                   for b in io.assemble_bags(ds, specs)])
    ds = ds.subset(order)
    remove = io.bag_words(specs) if args.remove_bag_words else ()
    feat, X = io.fit_featurizer(ds, remove,
                                _names(args.drop_columns or ""))
    n_unl = len(ds) - len(chosen)
    labeled = LabeledSet(range(n_unl, len(ds)), [chosen[i] for i in
                                                 sorted(chosen)])
    return ds, feat, X, bags, cons, labeled


def cmd_train(args):
    ds, feat, X, bags, cons, labeled = _training_problem(args)
    model, y, trace = fit_ballpark(X, bags, cons, labeled, _hyperparams(args))
    if args.trace:
        io.write_json(args.trace, trace.to_dict())
    if model is None:
        raise Infeasible(trace.certificate)
    model.featurizer = feat
    io.write_model(args.out, model)
    print(f"status {trace.status} after {len(trace.records)} iterations; "
          f"model written to {args.out}")


def cmd_predict(args):
    model = io.read_model(args.model)
    feat = model.featurizer
    n = feat.get("n_features") if feat["kind"] == "svmlight" else None
    ds = io.load_dataset(args.data, args.format, n)
    margins = decision_values(model, io.transform(ds, feat))
    io.write_predictions(args.out, ds.ids, margins)
    print(f"{len(ds)} predictions written to {args.out}")


def cmd_eval(args):
    ids, _, preds = io.read_predictions(args.preds)
    ds = io.load_dataset(args.data, args.format)
    if ds.labels is None:
        raise io.FormatError(f"{args.data} carries no labels")
    truth = dict(zip(ds.ids, ds.labels))
    missing = [i for i in ids if i not in truth]
    if missing:
        raise io.FormatError(f"predictions for unknown ids {missing[:5]}")
    keep = [k for k, i in enumerate(ids) if truth[i] != 0]
    y = np.array([truth[ids[k]] for k in keep])
    p = preds[keep]
    result = {"n": len(keep), "accuracy": accuracy(p, y),
              "macro_f1": macro_f1(p, y)}
    print(json.dumps(result))
    if args.out:
        io.write_json(args.out, result)


def cmd_tune(args):
    ds, feat, X, bags, cons, labeled = _training_problem(args)
    if args.soft is None:
        ok, cert = check_feasibility(bags, cons, labeled, len(ds) - len(labeled))
        if not ok:
            raise Infeasible(cert)
    grid = _floats(args.grid) if args.grid else list(DEFAULT_GRID)
    plan = split_bags(bags, args.folds, args.seed)
    res = select_C(grid, CvInputs(X, bags, cons, labeled, _hyperparams(args)),
                   plan, n_jobs=args.jobs)
    io.write_json(args.out, res.to_dict())
    print(f"selected C = {res.selected_C!r}")


def cmd_baseline(args):
    ds = io.load_dataset(args.data, args.format)
    bags = io.assemble_bags(ds, io.read_bag_specs(args.bags))
    feat, X = io.fit_featurizer(ds, (), _names(args.drop_columns or ""))
    grid = _floats(args.grid) if args.grid else list(DEFAULT_GRID)
    model = high_vs_low(X, [bags[n] for n in _names(args.high)],
                        [bags[n] for n in _names(args.low)], grid, args.folds,
                        args.seed)
    model.featurizer = feat
    io.write_model(args.out, model)
    print(f"baseline C = {model.hyperparams['C']!r}; model written to "
          f"{args.out}")


def cmd_synth(args):
    props = tuple(_floats(args.proportions))
    cfg = SyntheticConfig(args.n_features, args.n_informative, args.class_sep,
                          tuple([args.bag_size] * len(props)), props,
                          args.seed)
    X, labels, bags = make_synthetic_bags(cfg)
    Xt, yt = make_synthetic_test(cfg, args.test_size)
    os.makedirs(args.out, exist_ok=True)
    d = cfg.n_features  # drop the bias column; loaders append their own
    io.write_svmlight(os.path.join(args.out, "train.svm"),
                      X.matrix[:, :d], labels)
    io.write_svmlight(os.path.join(args.out, "test.svm"), Xt.matrix[:, :d], yt)
    io.write_json(os.path.join(args.out, "bags.json"),
                  {"bags": [{"name": b.name, "indices": list(b.members)}
                            for b in bags]})
    cons = factor_constraints(SensitivityConfig(
        proportions=true_proportions(labels, bags)))
    io.write_json(os.path.join(args.out, "constraints.json"),
                  io.constraints_to_dict(cons))
    print(f"synthetic data written to {args.out}")


def cmd_scan(args):
    ds = io.load_dataset(args.data, args.format)
    if ds.labels is None or np.any(ds.labels == 0):
        raise io.FormatError("scan needs true labels for every instance to "
                             "derive bag proportions")
    bags = io.assemble_bags(ds, io.read_bag_specs(args.bags))
    remove = io.bag_words(io.read_bag_specs(args.bags)) \
        if args.remove_bag_words else ()
    feat, X = io.fit_featurizer(ds, remove, _names(args.drop_columns or ""))
    if args.valid:
        n = feat.get("n_features") if feat["kind"] == "svmlight" else None
        vs = io.load_dataset(args.valid, args.format, n)
        Xv, yv = io.transform(vs, feat), vs.labels
    else:
        Xv, yv = X, ds.labels
    rows = sensitivity_scan(X, bags, true_proportions(ds.labels, bags), Xv, yv,
                            args.factor, _floats(args.values),
                            _hyperparams(args))
    write_scan_csv(rows, args.out)
    print(f"{len(rows)} scan rows written to {args.out}")


def cmd_report(args):
    model = io.read_model(args.model)
    names = io.feature_names(model.featurizer)
    pos, neg = io.top_features(model, names, args.top_k)
    print("positive:", " ".join(f"{n}({w:.4g})" for n, w in pos))
    print("negative:", " ".join(f"{n}({w:.4g})" for n, w in neg))


def build_parser():
    p = argparse.ArgumentParser(prog="ballpark", description=(
        "Learn instance labels from bags with loose label-proportion "
        "constraints."))
    sub = p.add_subparsers(dest="command", required=True)

    def data_args(s, bags=True):
        s.add_argument("--data", required=True)
        s.add_argument("--format", required=True, choices=io.FORMATS)
        if bags:
            s.add_argument("--bags", required=True)
        s.add_argument("--drop-columns", default="",
                       help="comma-separated tabular columns to ignore as "
                            "features (e.g. the ones used to form bags)")

    def fit_args(s):
        s.add_argument("--constraints", required=True)
        s.add_argument("--C", type=float, default=1.0)
        s.add_argument("--C-L", dest="C_L", type=float, default=0.0)
        s.add_argument("--labeled", help="csv of id,label usable in training")
        s.add_argument("--soft", type=float, default=None, metavar="RHO")
        s.add_argument("--mode", choices=("sign", "exact"), default="sign")
        s.add_argument("--remove-bag-words", action="store_true")
        s.add_argument("--seed", type=int, required=True)

    s = sub.add_parser("train", help="fit a model under bag constraints")
    data_args(s)
    fit_args(s)
    s.add_argument("--out", required=True)
    s.add_argument("--trace")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", help="write margins and labels")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--format", required=True, choices=io.FORMATS)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("eval", help="score predictions against labels")
    s.add_argument("--preds", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--format", required=True, choices=io.FORMATS)
    s.add_argument("--out")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("tune", help="pick C by held-out constraint violation")
    data_args(s)
    fit_args(s)
    s.add_argument("--grid")
    s.add_argument("--folds", type=int, default=10)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_tune)

    s = sub.add_parser("baseline", help="high-vs-low weighted SVM")
    data_args(s)
    s.add_argument("--high", required=True)
    s.add_argument("--low", required=True)
    s.add_argument("--grid")
    s.add_argument("--folds", type=int, default=10)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_baseline)

    s = sub.add_parser("synth", help="generate a synthetic bag problem")
    s.add_argument("--n-features", type=int, default=20)
    s.add_argument("--n-informative", type=int, default=1)
    s.add_argument("--class-sep", type=float, default=1.0)
    s.add_argument("--bag-size", type=int, default=500)
    s.add_argument("--proportions", default="0.4,0.3,0.2")
    s.add_argument("--test-size", type=int, default=2000)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("scan", help="sensitivity of accuracy to one factor")
    data_args(s)
    s.add_argument("--factor", required=True, choices=("u_m", "l_p", "l_d"))
    s.add_argument("--values", required=True)
    s.add_argument("--valid")
    s.add_argument("--C", type=float, default=1.0)
    s.add_argument("--C-L", dest="C_L", type=float, default=0.0)
    s.add_argument("--soft", type=float, default=None, metavar="RHO")
    s.add_argument("--mode", choices=("sign", "exact"), default="sign")
    s.add_argument("--remove-bag-words", action="store_true")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("report", help="top positive and negative features")
    s.add_argument("--model", required=True)
    s.add_argument("--top-k", type=int, default=10)
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except Infeasible as exc:
        print("infeasible constraints; conflicting set:", file=sys.stderr)
        for name in exc.certificate:
            print(f"  {name}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
