"""Command line front end: train, predict, eval, and bench subcommands.

The CLI is a thin shell over the library; every behavior here is
reachable through the public functions with identical results.  Exit
codes: 0 success, 1 data or runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .bench import run_benchmark, significance_test, write_metrics_csv
from .boosting import (
    ABC_BASE_RULES,
    ALGORITHMS,
    ConfigError,
    TrainConfig,
    predict,
    predict_proba,
    train,
)
from .data import DataError, load_dataset
from .model_io import ModelLoadError, load_model, save_model

_PAIR_RULE_FLAGS = {"first": "first_order", "second": "second_order"}
_ABC_BASE_FLAGS = {"exhaustive": "exhaustive", "worst": "worst_class"}


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--train", required=True, help="training data path")
    parser.add_argument("--test", help="held-out data path (optional)")
    parser.add_argument("--format", default="auto", choices=("auto", "libsvm", "csv"))
    parser.add_argument("--label-col", type=int, default=0,
                        help="label column for CSV data (negative counts from the end)")
    parser.add_argument("-M", "--trees", type=int, default=10000,
                        help="maximum boosting iterations")
    parser.add_argument("-J", "--leaves", type=int, default=20,
                        help="terminal nodes per tree")
    parser.add_argument("-v", "--shrinkage", type=float, default=0.1)
    parser.add_argument("--pair-rule", choices=sorted(_PAIR_RULE_FLAGS), default="second")
    parser.add_argument("--abc-base", choices=sorted(_ABC_BASE_FLAGS), default="exhaustive")
    parser.add_argument("--min-node", type=int, default=1)
    parser.add_argument("--eval-every", type=int, default=50)
    parser.add_argument("--bins", type=int, default=0,
                        help="quantile bins per feature (0 = exact scan)")
    parser.add_argument("--threads", type=int, default=1,
                        help="intra-training parallelism (accepted for "
                             "compatibility; scans are vectorized)")
    parser.add_argument("--seed", type=int, default=0)


def _config_from_args(args: argparse.Namespace, algorithm: str) -> TrainConfig:
    return TrainConfig(
        algorithm=algorithm,
        n_leaves=args.leaves,
        shrinkage=args.shrinkage,
        max_iterations=args.trees,
        pair_rule=_PAIR_RULE_FLAGS[args.pair_rule],
        abc_base_rule=_ABC_BASE_FLAGS[args.abc_base],
        min_node_size=args.min_node,
        eval_every=args.eval_every,
        bins=args.bins,
        threads=args.threads,
        seed=args.seed,
    )


def _load_train_and_test(args: argparse.Namespace):
    train_set = load_dataset(args.train, fmt=args.format, label_column=args.label_col)
    test_set = None
    if args.test:
        test_set = load_dataset(
            args.test,
            fmt=args.format,
            label_column=args.label_col,
            n_features=train_set.n_features,
        )
    return train_set, test_set


def _summary_line(trees: int, loss: float, errors, n_tests) -> str:
    line = "trees=%d train_loss=%.10g" % (trees, loss)
    if errors is not None:
        line += " test_errors=%d/%d" % (errors, n_tests)
    return line


def cmd_train(args: argparse.Namespace) -> int:
    config = _config_from_args(args, args.algo)
    train_set, test_set = _load_train_and_test(args)
    model, state = train(train_set, config, eval_set=test_set)
    if args.model_out:
        save_model(model, args.model_out)
    if args.metrics_out:
        write_metrics_csv(state, args.metrics_out)
    errors = state.metrics[-1].test_errors if state.metrics and test_set else None
    n_tests = test_set.n_examples if test_set else None
    print(_summary_line(state.trees_built, state.final_loss, errors, n_tests))
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    data = load_dataset(
        args.data,
        fmt=args.format,
        label_column=args.label_col,
        n_features=model.n_features,
    )
    if data.n_features != model.n_features:
        raise ValueError(
            "data arity %d does not match model arity %d"
            % (data.n_features, model.n_features)
        )
    labels = predict(model, data.features)
    probas = predict_proba(model, data.features) if args.proba else None
    with open(args.out, "w", encoding="utf-8") as fh:
        for i, label in enumerate(labels):
            if probas is None:
                fh.write("%d\n" % label)
            else:
                fh.write(
                    "%d %s\n" % (label, " ".join(repr(float(p)) for p in probas[i]))
                )
    print("wrote %d predictions to %s" % (len(labels), args.out))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    with open(args.pred, "r", encoding="utf-8") as fh:
        pred = [int(line.split()[0]) for line in fh if line.strip()]
    data = load_dataset(args.data, fmt=args.format, label_column=args.label_col)
    truth = data.original_labels()
    if len(pred) != truth.size:
        print(
            "error: %d predictions but %d ground-truth labels"
            % (len(pred), truth.size),
            file=sys.stderr,
        )
        return 1
    pred_arr = np.asarray(pred)
    errors = int(np.sum(pred_arr != truth))
    print("errors=%d/%d error_rate=%.6f" % (errors, truth.size, errors / truth.size))
    values = sorted(set(truth.tolist()) | set(pred))
    index = {v: i for i, v in enumerate(values)}
    confusion = np.zeros((len(values), len(values)), dtype=np.int64)
    for t, p in zip(truth, pred_arr):
        confusion[index[t], index[p]] += 1
    width = max(len(str(v)) for v in values + [int(confusion.max())])
    header = " ".join("%*s" % (width, v) for v in values)
    print("confusion (rows=truth, cols=predicted):")
    print("%*s %s" % (width, "", header))
    for v in values:
        row = " ".join("%*d" % (width, c) for c in confusion[index[v]])
        print("%*s %s" % (width, v, row))
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    base = _config_from_args(args, args.algo_a)
    train_set, test_set = _load_train_and_test(args)
    report = run_benchmark(
        train_set, test_set, args.algo_a, args.algo_b, base, args.trees
    )
    for tag, side in (("a", report.side_a), ("b", report.side_b)):
        line = "%s: algo=%s trees=%d final_train_loss=%.10g stop=%s" % (
            tag,
            side.algorithm,
            side.state.trees_built,
            side.state.final_loss,
            side.state.stop_reason,
        )
        if side.test_errors is not None:
            line += " test_errors=%d/%d" % (side.test_errors, report.n_tests)
        print(line)
    print("R=%.6g" % report.tree_ratio)
    if report.loss_match_ratio is not None:
        print(
            "loss_match_trees_b=%d loss_match_ratio=%.6g"
            % (report.loss_match_trees_b, report.loss_match_ratio)
        )
    if report.p_value is not None:
        print("p_value=%.6g" % report.p_value)
    return 0


def cmd_significance(args: argparse.Namespace) -> int:
    result = significance_test(args.errors_a, args.errors_b, args.n)
    print(
        "rate_a=%.6g rate_b=%.6g z=%.6g p_value=%.6g"
        % (result.rate_a, result.rate_b, result.z_stat, result.p_value)
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aosoboost",
        description="Multi-class boosting with adaptive one-vs-one vector trees",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model")
    p_train.add_argument("--algo", choices=ALGORITHMS, default="aoso")
    _add_train_flags(p_train)
    p_train.add_argument("--model-out", help="write the trained model here")
    p_train.add_argument("--metrics-out", help="write the metrics CSV here")
    p_train.set_defaults(func=cmd_train)

    p_pred = sub.add_parser("predict", help="predict labels with a saved model")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--data", required=True)
    p_pred.add_argument("--out", required=True)
    p_pred.add_argument("--proba", action="store_true",
                        help="also write per-class probabilities")
    p_pred.add_argument("--format", default="auto", choices=("auto", "libsvm", "csv"))
    p_pred.add_argument("--label-col", type=int, default=0)
    p_pred.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("eval", help="score predictions against ground truth")
    p_eval.add_argument("--pred", required=True, help="file of predicted labels")
    p_eval.add_argument("--data", required=True, help="dataset with ground truth")
    p_eval.add_argument("--format", default="auto", choices=("auto", "libsvm", "csv"))
    p_eval.add_argument("--label-col", type=int, default=0)
    p_eval.set_defaults(func=cmd_eval)

    p_bench = sub.add_parser("bench", help="compare two algorithms at equal tree budgets")
    p_bench.add_argument("--algo-a", choices=ALGORITHMS, required=True)
    p_bench.add_argument("--algo-b", choices=ALGORITHMS, required=True)
    _add_train_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_sig = sub.add_parser(
        "significance", help="binomial significance test for two error counts"
    )
    p_sig.add_argument("errors_a", type=int)
    p_sig.add_argument("errors_b", type=int)
    p_sig.add_argument("n", type=int)
    p_sig.set_defaults(func=cmd_significance)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:  # bad flag values count as usage errors
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (DataError, ModelLoadError, ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
