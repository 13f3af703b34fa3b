"""Supervised learning on tomogram features: estimators, pipelines,
randomized pipeline search, evaluation, and the entanglement verdict."""

from .estimators import (ESTIMATOR_KINDS, KNearest, LogisticRegression,
                         MultiLayerPerceptron, build_estimator)
from .metrics import (VERDICT_ENTANGLED, VERDICT_INCONCLUSIVE, EvalReport,
                      entanglement_verdict, evaluate, report_csv, report_json,
                      report_text)
from .pipeline import (MODEL_FORMAT, MODEL_VERSION, TASK_BINARY, TASK_MULTI,
                       TASK_REGRESS, TASKS, PipelineModel, fit, load_model,
                       predict, predict_tomogram, save_model)
from .search import (N_FOLDS, SEARCH_RANKS, SEARCH_SPACE, auto_search,
                     sample_config, stratified_folds)
from .trees import DecisionTree, GradientBoosting, RandomForest

__all__ = [
    "ESTIMATOR_KINDS", "KNearest", "LogisticRegression",
    "MultiLayerPerceptron", "build_estimator", "DecisionTree",
    "GradientBoosting", "RandomForest", "VERDICT_ENTANGLED",
    "VERDICT_INCONCLUSIVE", "EvalReport", "entanglement_verdict", "evaluate",
    "report_csv", "report_json", "report_text", "MODEL_FORMAT",
    "MODEL_VERSION", "TASK_BINARY", "TASK_MULTI", "TASK_REGRESS", "TASKS",
    "PipelineModel", "fit", "load_model", "predict", "predict_tomogram",
    "save_model", "N_FOLDS", "SEARCH_RANKS", "SEARCH_SPACE", "auto_search",
    "sample_config", "stratified_folds",
]
