"""Python bindings for the CRISP hippocampus sequence memory library."""

from ._crisp import (  # noqa: F401
    ConfigError,
    DreamOrder,
    Error,
    ForgettingCurve,
    HippocampusModel,
    IntegrityError,
    ModelConfig,
    ParseError,
    RecallTrace,
    Relaxation,
    SequenceStore,
    UndefinedCorrelation,
    UsageError,
    Variant,
    classify_relaxation,
    corrupt,
    forgetting_curve,
    gen_rand,
    gen_rand_corr,
    max_correlation_profile,
    pearson,
    presets,
    render_preset,
    run_experiment,
)

__version__ = "0.1.0"
