"""Key-pose prediction for cyclic motion: clustering, activation series,
stroke-frequency estimation, and ML/MAP occurrence prediction."""

from ._keypose import (  # noqa: F401
    ActivationSeries,
    AlignmentResult,
    ConfigurationCluster,
    JointConfiguration,
    KeyPoseModel,
    Mode,
    OccurrencePrediction,
    RegularInterval,
    SyntheticDataset,
    SyntheticMotionSpec,
    detect_activations,
    estimate_stroke_frequency,
    evaluate,
    fit_likelihoods,
    generate_synthetic,
    goodness_rank,
    kmeans_temporal,
    map_estimate,
    mean_correct,
    postprocess_predictions,
    procrustes_distance,
    prune_activations,
    regular_intervals,
    smooth,
)

__all__ = [
    "ActivationSeries",
    "AlignmentResult",
    "ConfigurationCluster",
    "JointConfiguration",
    "KeyPoseModel",
    "Mode",
    "OccurrencePrediction",
    "RegularInterval",
    "SyntheticDataset",
    "SyntheticMotionSpec",
    "detect_activations",
    "estimate_stroke_frequency",
    "evaluate",
    "fit_likelihoods",
    "generate_synthetic",
    "goodness_rank",
    "kmeans_temporal",
    "map_estimate",
    "mean_correct",
    "postprocess_predictions",
    "procrustes_distance",
    "prune_activations",
    "regular_intervals",
    "smooth",
]
