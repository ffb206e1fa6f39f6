"""Two-algorithm comparisons, metrics emission, and the significance test.

Comparisons are made at equal tree budgets, never equal iteration counts:
one iteration adds 1 tree (aoso), K-1 trees (abc), or K trees
(logitboost), so the iteration budgets are corrected accordingly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .boosting import BoostState, Model, TrainConfig, train
from .data import Dataset

METRICS_FIELDS = ("trees", "train_loss", "test_errors", "test_error_rate", "wall_ms")


@dataclass
class SignificanceResult:
    errors_a: int
    errors_b: int
    n_tests: int
    rate_a: float
    rate_b: float
    z_stat: float
    p_value: float


def significance_test(errors_a: int, errors_b: int, n_tests: int) -> SignificanceResult:
    """Gaussian approximation to comparing two binomial error counts.

    The returned p-value is the one-sided upper tail: small values mean
    the first error count is significantly larger than the second.
    """
    if n_tests <= 0:
        raise ValueError("n_tests must be positive")
    for z in (errors_a, errors_b):
        if not 0 <= z <= n_tests:
            raise ValueError("error count %d outside [0, %d]" % (z, n_tests))
    rate_a = errors_a / n_tests
    rate_b = errors_b / n_tests
    var = (rate_a * (1 - rate_a) + rate_b * (1 - rate_b)) / n_tests
    if var == 0.0:
        z_stat = 0.0 if errors_a == errors_b else math.copysign(math.inf, rate_a - rate_b)
    else:
        z_stat = (rate_a - rate_b) / math.sqrt(var)
    p_value = 0.5 * math.erfc(z_stat / math.sqrt(2.0))
    return SignificanceResult(errors_a, errors_b, n_tests, rate_a, rate_b, z_stat, p_value)


def write_metrics_csv(state: BoostState, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_FIELDS)
        for row in state.metrics:
            writer.writerow(
                [
                    row.trees,
                    repr(row.train_loss),
                    "" if row.test_errors is None else row.test_errors,
                    "" if row.test_error_rate is None else repr(row.test_error_rate),
                    row.wall_ms,
                ]
            )


def trees_to_reach_loss(loss_history: list[tuple[int, float]], target: float) -> int | None:
    """First tree count whose recorded training loss is <= target."""
    for trees, loss in loss_history:
        if loss <= target:
            return trees
    return None


def trees_per_iteration(algorithm: str, n_classes: int) -> int:
    if algorithm == "aoso":
        return 1
    if algorithm == "abc":
        return n_classes - 1
    return n_classes


def iteration_budget(algorithm: str, n_classes: int, base_iterations: int) -> int:
    """Iteration cap giving every algorithm the same tree budget.

    ``base_iterations`` is expressed in abc iterations, so the shared tree
    budget is (K-1) * base_iterations.
    """
    budget = (n_classes - 1) * base_iterations
    return max(1, -(-budget // trees_per_iteration(algorithm, n_classes)))


@dataclass
class BenchmarkSide:
    algorithm: str
    model: Model
    state: BoostState
    test_errors: int | None


@dataclass
class BenchmarkReport:
    side_a: BenchmarkSide
    side_b: BenchmarkSide
    n_tests: int | None
    tree_ratio: float          # trees_b / trees_a at their stopping points
    loss_match_trees_b: int | None  # trees b needed to reach a's final loss
    loss_match_ratio: float | None
    p_value: float | None


def run_benchmark(
    train_set: Dataset,
    test_set: Dataset | None,
    algo_a: str,
    algo_b: str,
    base_config: TrainConfig,
    base_iterations: int,
) -> BenchmarkReport:
    """Train both algorithms under a shared tree budget and compare."""
    k = train_set.n_classes
    sides = []
    for algo in (algo_a, algo_b):
        config = TrainConfig(**{**base_config.__dict__, "algorithm": algo})
        config.max_iterations = iteration_budget(algo, k, base_iterations)
        model, state = train(train_set, config, eval_set=test_set)
        errors = state.metrics[-1].test_errors if state.metrics else None
        sides.append(BenchmarkSide(algo, model, state, errors))
    a, b = sides
    ratio = b.state.trees_built / a.state.trees_built if a.state.trees_built else math.nan
    match_trees = trees_to_reach_loss(b.state.loss_history, a.state.final_loss)
    match_ratio = (
        match_trees / a.state.trees_built
        if match_trees is not None and a.state.trees_built
        else None
    )
    p_value = None
    n_tests = test_set.n_examples if test_set is not None else None
    if test_set is not None and a.test_errors is not None and b.test_errors is not None:
        p_value = significance_test(a.test_errors, b.test_errors, n_tests).p_value
    return BenchmarkReport(a, b, n_tests, ratio, match_trees, match_ratio, p_value)
