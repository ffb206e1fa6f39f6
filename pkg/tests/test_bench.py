import math

import pytest

from aosoboost.bench import (
    iteration_budget,
    run_benchmark,
    significance_test,
    trees_per_iteration,
    trees_to_reach_loss,
    write_metrics_csv,
)
from aosoboost.boosting import TrainConfig, train

from conftest import random_dataset


class TestSignificance:
    def test_mnist10k_row(self):
        # 2102 vs 1948 errors out of 60000 tests
        result = significance_test(2102, 1948, 60000)
        assert result.p_value == pytest.approx(0.0069, abs=0.0005)

    def test_letter4k_row(self):
        result = significance_test(1055, 991, 16000)
        assert result.p_value == pytest.approx(0.0718, abs=0.0005)

    def test_poker_row_is_vanishing(self):
        assert significance_test(37345, 31399, 500000).p_value < 1e-4

    def test_equal_counts(self):
        result = significance_test(123, 123, 1000)
        assert result.z_stat == 0.0
        assert result.p_value == pytest.approx(0.5)

    def test_rates(self):
        result = significance_test(10, 20, 100)
        assert result.rate_a == pytest.approx(0.1)
        assert result.rate_b == pytest.approx(0.2)
        assert 0.0 <= result.p_value <= 1.0
        assert result.p_value > 0.5  # a has fewer errors

    def test_degenerate_variance(self):
        assert significance_test(0, 0, 50).p_value == pytest.approx(0.5)
        assert significance_test(50, 0, 50).p_value == 0.0
        assert significance_test(0, 50, 50).p_value == 1.0

    def test_input_validation(self):
        with pytest.raises(ValueError):
            significance_test(1, 1, 0)
        with pytest.raises(ValueError):
            significance_test(5, 1, 4)
        with pytest.raises(ValueError):
            significance_test(-1, 1, 4)


class TestBudgets:
    def test_trees_per_iteration(self):
        assert trees_per_iteration("aoso", 10) == 1
        assert trees_per_iteration("abc", 10) == 9
        assert trees_per_iteration("logitboost", 10) == 10

    def test_aoso_budget_matches_abc_tree_count(self):
        # K=10, 5000 abc iterations: both algorithms may build 45000 trees
        assert iteration_budget("aoso", 10, 5000) == 45000
        assert iteration_budget("abc", 10, 5000) == 5000
        assert iteration_budget("logitboost", 10, 5000) == 4500

    def test_budget_rounds_up(self):
        assert iteration_budget("logitboost", 4, 1) == 1  # ceil(3/4)


class TestTreesToReachLoss:
    def test_first_crossing(self):
        history = [(0, 10.0), (1, 5.0), (2, 2.0), (3, 1.0)]
        assert trees_to_reach_loss(history, 2.5) == 2
        assert trees_to_reach_loss(history, 10.0) == 0
        assert trees_to_reach_loss(history, 0.5) is None


class TestRunBenchmark:
    def test_identical_algorithms(self, rng):
        train_set = random_dataset(rng, 60, 3, 3)
        test_set = random_dataset(rng, 40, 3, 3)
        base = TrainConfig(n_leaves=4, shrinkage=0.1)
        report = run_benchmark(train_set, test_set, "aoso", "aoso", base, 10)
        assert report.tree_ratio == pytest.approx(1.0)
        assert report.side_a.test_errors == report.side_b.test_errors
        assert report.p_value == pytest.approx(0.5)

    def test_equal_tree_budgets(self, rng):
        train_set = random_dataset(rng, 60, 3, 4)
        base = TrainConfig(n_leaves=4, shrinkage=0.1)
        report = run_benchmark(train_set, None, "aoso", "abc", base, 6)
        # both sides stopped on budget: identical tree counts
        assert report.side_a.state.trees_built == 18
        assert report.side_b.state.trees_built == 18
        assert report.p_value is None


class TestMetricsCsv:
    def test_schema_and_ordering(self, rng, tmp_path):
        ds = random_dataset(rng, 40, 2, 3)
        test = random_dataset(rng, 20, 2, 3)
        _, state = train(
            ds,
            TrainConfig(n_leaves=3, shrinkage=0.1, max_iterations=12, eval_every=5),
            eval_set=test,
        )
        path = tmp_path / "metrics.csv"
        write_metrics_csv(state, str(path))
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "trees,train_loss,test_errors,test_error_rate,wall_ms"
        trees = [int(line.split(",")[0]) for line in lines[1:]]
        assert trees == sorted(set(trees))
        losses = [float(line.split(",")[1]) for line in lines[1:]]
        assert all(math.isfinite(x) for x in losses)

    def test_no_test_set_leaves_blank_columns(self, rng, tmp_path):
        ds = random_dataset(rng, 30, 2, 2)
        _, state = train(
            ds, TrainConfig(n_leaves=3, shrinkage=0.1, max_iterations=4, eval_every=2)
        )
        path = tmp_path / "metrics.csv"
        write_metrics_csv(state, str(path))
        for line in path.read_text().strip().splitlines()[1:]:
            cells = line.split(",")
            assert cells[2] == "" and cells[3] == ""
