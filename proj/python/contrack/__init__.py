"""Embedding-based multi-object tracking: association, losses, metrics."""

from ._core import (
    BatchEntry,
    Box,
    DatasetIndex,
    Detection,
    GtObject,
    IoError,
    MatchedEmbeddingBatch,
    PredObject,
    ScoredBox,
    SimulatorConfig,
    SyntheticDataset,
    SyntheticSequence,
    Tracker,
    TrackerConfig,
    TruthBox,
    ValidationError,
    VideoInfo,
    anchor_loss,
    batch_contrastive_loss,
    build_pretraining_batch,
    contrastive_gradient,
    cosine_similarity,
    detr_matching,
    evaluate,
    evaluate_files,
    export_dataset,
    finite_difference_gradient,
    focal_loss,
    generate,
    giou,
    iou,
    pair_loss,
    random_batch,
    sample_tracking_batch,
    solve_assignment,
)

__all__ = [
    "BatchEntry",
    "Box",
    "DatasetIndex",
    "Detection",
    "GtObject",
    "IoError",
    "MatchedEmbeddingBatch",
    "PredObject",
    "ScoredBox",
    "SimulatorConfig",
    "SyntheticDataset",
    "SyntheticSequence",
    "Tracker",
    "TrackerConfig",
    "TruthBox",
    "ValidationError",
    "VideoInfo",
    "anchor_loss",
    "batch_contrastive_loss",
    "build_pretraining_batch",
    "contrastive_gradient",
    "cosine_similarity",
    "detr_matching",
    "evaluate",
    "evaluate_files",
    "export_dataset",
    "finite_difference_gradient",
    "focal_loss",
    "generate",
    "giou",
    "iou",
    "pair_loss",
    "random_batch",
    "sample_tracking_batch",
    "solve_assignment",
]
