"""Training loops for the three boosting variants and forest prediction.

All three trainers share the tree grower and differ only in how many
trees one iteration adds and how the class pair of a tree is chosen:

* aoso        one tree per iteration, pair re-selected per node, and the
              probabilities are refreshed before every tree;
* abc         K-1 trees per iteration, each tree's pair fixed to (class,
              base class) for all nodes, all grown against the iteration's
              starting probabilities; the base class is picked either by
              exhaustive candidate search or by the worst-class heuristic;
* logitboost  K independent single-class trees per iteration using the
              diagonal curvature approximation, no sum-to-zero coupling.

Training is deterministic; the seed only matters to callers that shuffle
or split data themselves.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, presort, quantize_features
from .numerics import (
    class_probabilities,
    per_class_loss,
    total_loss_from_probabilities,
)
from .tree import NO_CLASS, Tree, TreeGrower

ALGORITHMS = ("aoso", "abc", "logitboost")
PAIR_RULES = ("first_order", "second_order")
ABC_BASE_RULES = ("exhaustive", "worst_class")


class ConfigError(ValueError):
    """Invalid training configuration."""


@dataclass
class TrainConfig:
    algorithm: str = "aoso"
    n_leaves: int = 20
    shrinkage: float = 0.1
    max_iterations: int = 10000
    pair_rule: str = "second_order"
    abc_base_rule: str = "exhaustive"
    stop_eps: float = 1e-16
    min_node_size: int = 1
    eval_every: int = 50
    bins: int = 0        # 0 disables quantile binning
    threads: int = 1
    seed: int = 0

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError("unknown algorithm %r" % self.algorithm)
        if self.n_leaves < 2:
            raise ConfigError("n_leaves must be >= 2, got %d" % self.n_leaves)
        if not 0.0 < self.shrinkage <= 1.0:
            raise ConfigError("shrinkage must be in (0, 1], got %r" % self.shrinkage)
        if self.max_iterations < 1:
            raise ConfigError(
                "max_iterations must be >= 1, got %d" % self.max_iterations
            )
        if self.pair_rule not in PAIR_RULES:
            raise ConfigError("unknown pair rule %r" % self.pair_rule)
        if self.abc_base_rule not in ABC_BASE_RULES:
            raise ConfigError("unknown abc base rule %r" % self.abc_base_rule)
        if self.stop_eps < 0:
            raise ConfigError("stop_eps must be >= 0")
        if self.min_node_size < 1:
            raise ConfigError("min_node_size must be >= 1")
        if self.eval_every < 1:
            raise ConfigError("eval_every must be >= 1")
        if self.bins and not 2 <= self.bins <= 256:
            raise ConfigError("bins must be 0 or in [2, 256], got %d" % self.bins)
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


def should_stop(loss: float, iteration: int, config: TrainConfig) -> bool:
    """Stop when training converged or the iteration budget is exhausted."""
    return loss <= config.stop_eps or iteration >= config.max_iterations


@dataclass
class MetricsRow:
    trees: int
    train_loss: float
    test_errors: int | None
    test_error_rate: float | None
    wall_ms: int


@dataclass
class BoostState:
    scores: np.ndarray
    probs: np.ndarray
    trees_built: int = 0
    iterations: int = 0
    loss_history: list[tuple[int, float]] = field(default_factory=list)
    metrics: list[MetricsRow] = field(default_factory=list)
    iteration_ms: list[float] = field(default_factory=list)
    stop_reason: str = ""

    @property
    def final_loss(self) -> float:
        return self.loss_history[-1][1] if self.loss_history else float("nan")


@dataclass
class TreeGroup:
    """Trees committed by one iteration; base_class is set for abc groups."""

    trees: list[Tree]
    base_class: int | None = None


@dataclass
class Model:
    algorithm: str
    n_classes: int
    n_features: int
    shrinkage: float
    groups: list[TreeGroup]
    label_values: list[int]
    config: dict
    metadata: dict

    def iter_trees(self):
        for group in self.groups:
            yield from group.trees

    @property
    def n_trees(self) -> int:
        return sum(len(g.trees) for g in self.groups)


class TrainLog:
    """Counters for inspecting trainer behavior.

    probability_refreshes counts recomputations of the probability matrix
    trees are grown against (candidate-loss evaluations do not refresh it);
    trees_grown counts every tree built including abc candidates that are
    later discarded; trees_committed counts trees that entered the model.
    """

    def __init__(self) -> None:
        self.probability_refreshes = 0
        self.trees_grown = 0
        self.trees_committed = 0


def _apply_assignments(scores, tree, assignments, shrinkage) -> None:
    for node, ids in assignments:
        t = shrinkage * tree.value[node]
        if t == 0.0:
            continue
        scores[ids, tree.pair_first[node]] += t
        s = tree.pair_second[node]
        if s != NO_CLASS:
            scores[ids, s] -= t


class _EvalTracker:
    """Keeps a running score matrix for the held-out set during training."""

    def __init__(self, eval_set: Dataset, model_labels: list[int]):
        self.features = np.ascontiguousarray(eval_set.features)
        self.truth = eval_set.original_labels()
        self.model_labels = np.asarray(model_labels, dtype=np.int64)
        self.scores = np.zeros((eval_set.n_examples, len(model_labels)))

    def apply(self, tree: Tree, shrinkage: float) -> None:
        leaves = tree.route(self.features)
        tree.add_to_scores(self.scores, leaves, shrinkage)

    def errors(self) -> int:
        pred = self.model_labels[np.argmax(self.scores, axis=1)]
        return int(np.sum(pred != self.truth))


def train(
    dataset: Dataset,
    config: TrainConfig,
    eval_set: Dataset | None = None,
    init_scores: np.ndarray | None = None,
    log: TrainLog | None = None,
) -> tuple[Model, BoostState]:
    """Run one training job and return the model plus its trace."""
    config.validate()
    log = log if log is not None else TrainLog()
    k = dataset.n_classes
    if k < 2:
        raise ConfigError("training needs at least 2 classes, got %d" % k)
    train_ds = quantize_features(dataset, config.bins) if config.bins else dataset
    n, d = train_ds.n_examples, train_ds.n_features
    y = train_ds.labels
    v = config.shrinkage

    grower = TreeGrower(
        train_ds.features,
        presort(train_ds).order,
        y,
        k,
        n_leaves=config.n_leaves,
        min_node_size=config.min_node_size,
        pair_rule=config.pair_rule,
        threshold_mode="left" if config.bins else "midpoint",
    )

    if init_scores is not None:
        scores = np.array(init_scores, dtype=np.float64)
        if scores.shape != (n, k):
            raise ConfigError(
                "init_scores shape %r does not match (%d, %d)"
                % (scores.shape, n, k)
            )
    else:
        scores = np.zeros((n, k))

    tracker = None
    if eval_set is not None:
        if eval_set.n_features != d:
            raise ValueError(
                "eval set arity %d does not match training arity %d"
                % (eval_set.n_features, d)
            )
        tracker = _EvalTracker(eval_set, train_ds.label_values)

    state = BoostState(scores=scores, probs=np.empty((n, k)))
    groups: list[TreeGroup] = []
    start = time.perf_counter()
    next_mark = config.eval_every
    last_metric_trees = -1

    def record_metrics(loss: float) -> None:
        nonlocal last_metric_trees
        errs = tracker.errors() if tracker is not None else None
        rate = errs / tracker.truth.size if tracker is not None else None
        state.metrics.append(
            MetricsRow(
                trees=state.trees_built,
                train_loss=loss,
                test_errors=errs,
                test_error_rate=rate,
                wall_ms=int((time.perf_counter() - start) * 1000),
            )
        )
        last_metric_trees = state.trees_built

    def commit(group: TreeGroup, assignments_per_tree) -> None:
        groups.append(group)
        for tree, assignments in zip(group.trees, assignments_per_tree):
            _apply_assignments(state.scores, tree, assignments, v)
            if tracker is not None:
                tracker.apply(tree, v)
            log.trees_committed += 1
        state.trees_built += len(group.trees)

    def grow_fixed(probs, pair):
        tree, assignments = grower.grow(probs, fixed_pair=pair)
        log.trees_grown += 1
        return tree, assignments

    while True:
        state.probs = class_probabilities(state.scores)
        log.probability_refreshes += 1
        loss = total_loss_from_probabilities(y, state.probs)
        state.loss_history.append((state.trees_built, loss))
        if state.trees_built > 0 and state.trees_built >= next_mark:
            record_metrics(loss)
            next_mark = (state.trees_built // config.eval_every + 1) * config.eval_every
        if loss <= config.stop_eps:
            state.stop_reason = "converged"
            break
        if state.iterations >= config.max_iterations:
            state.stop_reason = "iteration_budget"
            break

        t0 = time.perf_counter()
        if config.algorithm == "aoso":
            tree, assignments = grower.grow(state.probs)
            log.trees_grown += 1
            if tree.max_abs_value() == 0.0:
                state.stop_reason = "no_progress"
                break
            commit(TreeGroup([tree]), [assignments])

        elif config.algorithm == "abc":
            if config.abc_base_rule == "exhaustive":
                best = None
                for b in range(k):
                    built = [grow_fixed(state.probs, (c, b)) for c in range(k) if c != b]
                    cand_scores = state.scores.copy()
                    for tree, assignments in built:
                        _apply_assignments(cand_scores, tree, assignments, v)
                    cand_loss = total_loss_from_probabilities(
                        y, class_probabilities(cand_scores)
                    )
                    if best is None or cand_loss < best[0]:
                        best = (cand_loss, b, built)
                _, b, built = best
            else:
                b = int(np.argmax(per_class_loss(y, state.probs)))
                built = [grow_fixed(state.probs, (c, b)) for c in range(k) if c != b]
            if all(tree.max_abs_value() == 0.0 for tree, _ in built):
                state.stop_reason = "no_progress"
                break
            commit(
                TreeGroup([tree for tree, _ in built], base_class=b),
                [assignments for _, assignments in built],
            )

        else:  # logitboost
            built = []
            for c in range(k):
                tree, assignments = grower.grow(state.probs, scalar_class=c)
                log.trees_grown += 1
                built.append((tree, assignments))
            if all(tree.max_abs_value() == 0.0 for tree, _ in built):
                state.stop_reason = "no_progress"
                break
            commit(
                TreeGroup([tree for tree, _ in built]),
                [assignments for _, assignments in built],
            )

        state.iterations += 1
        state.iteration_ms.append((time.perf_counter() - t0) * 1000.0)

    if state.trees_built > 0 and state.trees_built != last_metric_trees:
        record_metrics(state.final_loss)

    model = Model(
        algorithm=config.algorithm,
        n_classes=k,
        n_features=d,
        shrinkage=v,
        groups=groups,
        label_values=list(train_ds.label_values),
        config=dataclasses.asdict(config),
        metadata={
            "iterations": state.iterations,
            "trees": state.trees_built,
            "final_train_loss": state.final_loss,
            "stop_reason": state.stop_reason,
        },
    )
    return model, state


def predict_scores(model: Model, features: np.ndarray) -> np.ndarray:
    """Accumulated shrunken leaf updates, one (K,) row per example."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[np.newaxis, :]
    if x.shape[1] != model.n_features:
        raise ValueError(
            "feature arity %d does not match model arity %d"
            % (x.shape[1], model.n_features)
        )
    scores = np.zeros((x.shape[0], model.n_classes))
    for tree in model.iter_trees():
        leaves = tree.route(x)
        tree.add_to_scores(scores, leaves, model.shrinkage)
    return scores


def predict_proba(model: Model, features: np.ndarray) -> np.ndarray:
    return class_probabilities(predict_scores(model, features))


def predict(model: Model, features: np.ndarray) -> np.ndarray:
    """Predicted labels in the model's original label vocabulary.

    Ties on the score argmax resolve to the lowest class index.
    """
    scores = predict_scores(model, features)
    return np.asarray(model.label_values, dtype=np.int64)[
        np.argmax(scores, axis=1)
    ]
