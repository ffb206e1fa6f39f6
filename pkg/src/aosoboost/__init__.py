"""Multi-class boosting with adaptive one-vs-one vector trees."""

from .bench import (
    BenchmarkReport,
    SignificanceResult,
    iteration_budget,
    run_benchmark,
    significance_test,
    trees_to_reach_loss,
    write_metrics_csv,
)
from .boosting import (
    BoostState,
    ConfigError,
    MetricsRow,
    Model,
    TrainConfig,
    TrainLog,
    TreeGroup,
    predict,
    predict_proba,
    predict_scores,
    should_stop,
    train,
)
from .data import (
    DataError,
    Dataset,
    SortedIndex,
    load_csv,
    load_dataset,
    load_libsvm,
    presort,
    quantize_features,
)
from .model_io import ModelLoadError, load_model, save_model
from .numerics import (
    class_probabilities,
    sample_gradient,
    sample_hessian,
    sample_loss,
    total_loss,
)
from .pairs import (
    NodeStats,
    PairSolution,
    pair_gradient,
    pair_hessian,
    select_pair_first_order,
    select_pair_second_order,
    solve_pair,
)
from .tree import SplitCandidate, Tree, TreeGrower

__version__ = "0.1.0"

__all__ = [
    "BenchmarkReport",
    "BoostState",
    "ConfigError",
    "DataError",
    "Dataset",
    "MetricsRow",
    "Model",
    "ModelLoadError",
    "NodeStats",
    "PairSolution",
    "SignificanceResult",
    "SortedIndex",
    "SplitCandidate",
    "TrainConfig",
    "TrainLog",
    "Tree",
    "TreeGroup",
    "TreeGrower",
    "class_probabilities",
    "iteration_budget",
    "load_csv",
    "load_dataset",
    "load_libsvm",
    "load_model",
    "pair_gradient",
    "pair_hessian",
    "predict",
    "predict_proba",
    "predict_scores",
    "presort",
    "quantize_features",
    "run_benchmark",
    "sample_gradient",
    "sample_hessian",
    "sample_loss",
    "save_model",
    "select_pair_first_order",
    "select_pair_second_order",
    "should_stop",
    "significance_test",
    "solve_pair",
    "total_loss",
    "train",
    "trees_to_reach_loss",
    "write_metrics_csv",
]
