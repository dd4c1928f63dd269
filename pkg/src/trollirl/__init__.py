"""Per-account MaxEnt IRL rewards on a small Twitter MDP, and troll detection from them."""

from trollirl.activity import (ActivityEvent, Kind, Trajectory, build_trajectories,
                               build_trajectory, filter_accounts, parse_activity_log)
from trollirl.analysis import KsResult, class_compare, ks_two_sample, recover_theta
from trollirl.boost import BoostModel, feature_importance, predict, predict_score, train_adaboost
from trollirl.config import PipelineConfig, load_config
from trollirl.deep import deep_maxent_irl
from trollirl.evaluation import (Dataset, EvalReport, cross_validate, evaluate, roc_auc,
                                 standardize, undersample_splits)
from trollirl.irl import (ConvergenceError, IrlConfig, empirical_counts, expected_visitation,
                          initial_distribution, maxent_irl, soft_value_iteration)
from trollirl.mdp import (Action, State, TransitionModel, encode_features, estimate_transitions,
                          feature_matrix, pair_index)
from trollirl.pipeline import varying_k_sweep
from trollirl.sim import AgentSpec, EnvironmentModel, generate_population, simulate_agent

__all__ = [
    "Action", "ActivityEvent", "AgentSpec", "BoostModel", "ConvergenceError", "Dataset",
    "EnvironmentModel", "EvalReport", "IrlConfig", "Kind", "KsResult", "PipelineConfig", "State",
    "Trajectory", "TransitionModel", "build_trajectories", "build_trajectory", "class_compare",
    "cross_validate", "deep_maxent_irl", "empirical_counts", "encode_features",
    "estimate_transitions", "evaluate", "expected_visitation", "feature_importance",
    "feature_matrix", "filter_accounts", "generate_population", "initial_distribution",
    "ks_two_sample", "load_config", "maxent_irl", "pair_index", "parse_activity_log", "predict",
    "predict_score", "recover_theta", "roc_auc", "simulate_agent", "soft_value_iteration",
    "standardize", "train_adaboost", "undersample_splits", "varying_k_sweep",
]
