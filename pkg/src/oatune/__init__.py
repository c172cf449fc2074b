"""Orthogonal-array (Taguchi) hyperparameter tuning for MLP regression models."""

__version__ = "0.1.0"

from .analysis import (
    EvaluationMetrics,
    MainEffectsTable,
    compute_metrics,
    main_effects,
    per_component_metrics,
    select_optimum,
    select_optimum_config,
    sn_larger_better,
)
from .design import (
    Factor,
    FactorSpace,
    HyperConfig,
    OrthogonalArray,
    build_array,
    build_l27,
    decode_hyperconfig,
    decode_run,
    paper_space,
    verify_strength2,
)
from .mechanics import engineering_constants
from .network import MLPModel, backward, forward, init_weights, load_model, save_model
from .pipeline import (
    Dataset,
    MinMaxScaler,
    SplitSpec,
    aspect_ratio,
    fit_minmax,
    generate_synthetic,
    load_dataset,
    split_dataset,
    validate_sample,
)
from .training import (
    EarlyStopping,
    TrainResult,
    TrainSettings,
    prepare_splits,
    run_design,
    run_seed,
    train_model,
)
