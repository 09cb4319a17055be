"""Joint link / sign / weight prediction for dynamic signed weighted networks."""

__version__ = "0.1.0"

from .config import RunConfig
from .evaluation import MetricReport, auc, evaluate, mae, rmse
from .features import FeatureConfig, WindowFeatures, precompute_features
from .graph import (
    DataError,
    DatasetMeta,
    Snapshot,
    SnapshotSequence,
    TemporalEdge,
    TemporalGraph,
    Window,
    discretize,
    load_edge_csv,
    make_windows,
    normalize_weights,
    prepare_snapshots,
    signed_subgraphs,
)
from .model import JointPredictor, ModelConfig, PredictionTriple, build_model
from .semantic import SemanticEmbedding, SkipGramConfig, WalkConfig, train_skipgram, window_embedding
from .structural import balance_features, multihop_cumulative, signed_transition, structural_block, temporal_diff
from .training import EdgeBatch, TrainConfig, chronological_split, multitask_loss, sample_negatives, train

__all__ = [
    "DataError",
    "DatasetMeta",
    "EdgeBatch",
    "FeatureConfig",
    "JointPredictor",
    "MetricReport",
    "ModelConfig",
    "PredictionTriple",
    "RunConfig",
    "SemanticEmbedding",
    "SkipGramConfig",
    "Snapshot",
    "SnapshotSequence",
    "TemporalEdge",
    "TemporalGraph",
    "TrainConfig",
    "WalkConfig",
    "Window",
    "WindowFeatures",
    "auc",
    "balance_features",
    "build_model",
    "chronological_split",
    "discretize",
    "evaluate",
    "load_edge_csv",
    "mae",
    "make_windows",
    "multihop_cumulative",
    "multitask_loss",
    "normalize_weights",
    "precompute_features",
    "prepare_snapshots",
    "rmse",
    "sample_negatives",
    "signed_subgraphs",
    "signed_transition",
    "structural_block",
    "temporal_diff",
    "train",
    "train_skipgram",
    "window_embedding",
]
