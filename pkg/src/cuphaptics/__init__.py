"""Suction-cup haptic yaw estimation.

A four-chamber suction cup overhanging an edge holds more vacuum on the
covered side. This package turns those four pressures into a direction
estimate two ways — a closed-form pressure-difference model and a small
learned network — and provides the synthetic data, training, evaluation,
and closed-loop search machinery to compare them.
"""

from .core import (
    EPS_ZERO,
    PRESSURE_TOLERANCE_KPA,
    Angle,
    DirectionEstimate,
    GroundTruthPose,
    SensorFrame,
    VacuumPressures,
    Vector2,
    angular_error,
    estimate_direction,
    model_direction,
    vacuum_pressures,
    wrap_angle,
)
from .dataset import (
    FeatureStats,
    LabeledSample,
    SplitSpec,
    feature_stats,
    read_csv,
    split,
    standardize,
    write_csv,
)
from .errors import (
    ConfigError,
    CsvParseError,
    CupHapticsError,
    DegenerateChannelError,
    InvalidInputError,
    ModelFormatError,
)
from .evaluate import (
    EvalReport,
    MethodSummary,
    PredictionPair,
    SeedMetrics,
    compare,
    evaluate_mlp,
    evaluate_model_based,
    export_scatter,
    mae_deg,
    rmse_deg,
    run_comparison,
)
from .mlp import (
    DEFAULT_LAYER_SIZES,
    MlpModel,
    RmspropState,
    TrainConfig,
    TrainHistory,
    backward,
    decode_angle,
    forward,
    init_model,
    load_model,
    loss,
    network_output,
    predict_angle,
    rmsprop_step,
    save_model,
    target_encoding,
    train,
)
from .search import (
    BatchRow,
    BatchSpec,
    MlpEstimator,
    ModelBasedEstimator,
    OracleEstimator,
    SearchConfig,
    SearchResult,
    batch_search,
    run_search,
    search_step,
    write_batch_csv,
)
from .synth import (
    CupGeometry,
    GenerationConfig,
    PressureFieldParams,
    chamber_vacuum,
    coverage_depth,
    generate_dataset,
    synth_frame,
)

__version__ = "0.1.0"

__all__ = [
    "EPS_ZERO",
    "PRESSURE_TOLERANCE_KPA",
    "Angle",
    "DirectionEstimate",
    "GroundTruthPose",
    "SensorFrame",
    "VacuumPressures",
    "Vector2",
    "angular_error",
    "estimate_direction",
    "model_direction",
    "vacuum_pressures",
    "wrap_angle",
    "FeatureStats",
    "LabeledSample",
    "SplitSpec",
    "feature_stats",
    "read_csv",
    "split",
    "standardize",
    "write_csv",
    "ConfigError",
    "CsvParseError",
    "CupHapticsError",
    "DegenerateChannelError",
    "InvalidInputError",
    "ModelFormatError",
    "EvalReport",
    "MethodSummary",
    "PredictionPair",
    "SeedMetrics",
    "compare",
    "evaluate_mlp",
    "evaluate_model_based",
    "export_scatter",
    "mae_deg",
    "rmse_deg",
    "run_comparison",
    "DEFAULT_LAYER_SIZES",
    "MlpModel",
    "RmspropState",
    "TrainConfig",
    "TrainHistory",
    "backward",
    "decode_angle",
    "forward",
    "init_model",
    "load_model",
    "loss",
    "network_output",
    "predict_angle",
    "rmsprop_step",
    "save_model",
    "target_encoding",
    "train",
    "BatchRow",
    "BatchSpec",
    "MlpEstimator",
    "ModelBasedEstimator",
    "OracleEstimator",
    "SearchConfig",
    "SearchResult",
    "batch_search",
    "run_search",
    "search_step",
    "write_batch_csv",
    "CupGeometry",
    "GenerationConfig",
    "PressureFieldParams",
    "chamber_vacuum",
    "coverage_depth",
    "generate_dataset",
    "synth_frame",
    "__version__",
]
