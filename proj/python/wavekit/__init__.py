"""Distributed sparse regression with inverse-variance weighted aggregation.

Workers fit local adaptive-lasso estimates on their shard and ship two
vectors (the estimate and a precision diagonal); the master combines them
per coordinate, re-sparsifies with an adaptive L1 step, and reports
confidence half-widths. See the C++ core for the full API surface.
"""

from wavekit._core import (
    WIRE_VERSION,
    AggregateResult,
    DataShard,
    LocalSummary,
    LossModel,
    WavekitError,
    aggregate,
    decode_summary,
    encode_summary,
    estimate_lambda_diag,
    fit_local,
    generate,
    local_summary,
    loss_eval,
    normal_quantile,
    run_pipeline,
    selection_metrics,
    shard_dataset,
    simple_average,
    soft_threshold,
    solve_weighted_l1,
    squared_error,
    true_beta,
    wave_point,
    wave_sparse,
)
from wavekit._core import __version__

__all__ = [
    "WIRE_VERSION",
    "AggregateResult",
    "DataShard",
    "LocalSummary",
    "LossModel",
    "WavekitError",
    "aggregate",
    "decode_summary",
    "encode_summary",
    "estimate_lambda_diag",
    "fit_local",
    "generate",
    "local_summary",
    "loss_eval",
    "normal_quantile",
    "run_pipeline",
    "selection_metrics",
    "shard_dataset",
    "simple_average",
    "soft_threshold",
    "solve_weighted_l1",
    "squared_error",
    "true_beta",
    "wave_point",
    "wave_sparse",
    "__version__",
]
