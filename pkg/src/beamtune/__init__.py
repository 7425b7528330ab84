"""Classifier-pruned Bayesian optimization of a synthetic beamline.

The tuner searches the injected latent point of a 48-module beamline whose
state is a forecasted latent trajectory, decodes each module into 15
projection images, scores the weighted beam loss of the energy-phase view,
and prunes candidates whose decoded states a classifier rejects as
non-physical.  Everything runs against a fully synthetic system with known
ground truth, so the optimum, the physical region and the classifier
quality are all independently checkable.
"""

from .acquisition import AcquisitionConfig, expected_improvement, propose_next
from .assets import build_asset_payload, default_system, load_assets, save_assets
from .baselines import BaselineConfig, gradient_search, random_search
from .config import AppConfig, load_config
from .gp import (
    GaussianProcessSurrogate,
    KernelParams,
    NotFittedError,
    NumericalFitError,
    heuristic_kernel_params,
    kernel_matrix,
)
from .objective import (
    Evaluation,
    batched_total_loss,
    module_beam_loss,
    objective_eval,
    step_weights,
    total_beam_loss,
)
from .reporting import (
    ComparisonReport,
    SummaryStats,
    compare,
    run_oracle,
    summarize,
    write_comparison,
    write_history_jsonl,
    write_summary_csv,
)
from .rng import derive_run_seed, make_rng
from .synthetic import SyntheticBeamSystem
from .tuner import (
    HistoryEntry,
    RunResult,
    TunerConfig,
    cbol_tune,
    default_objective,
    multi_run,
    sample_initial,
)
from .types import BeamState, BoundsBox, NON_PHYSICAL, default_bounds

__version__ = "0.1.0"

__all__ = [
    "AcquisitionConfig",
    "AppConfig",
    "BaselineConfig",
    "BeamState",
    "BoundsBox",
    "ComparisonReport",
    "Evaluation",
    "GaussianProcessSurrogate",
    "HistoryEntry",
    "KernelParams",
    "NON_PHYSICAL",
    "NotFittedError",
    "NumericalFitError",
    "RunResult",
    "SummaryStats",
    "SyntheticBeamSystem",
    "TunerConfig",
    "batched_total_loss",
    "build_asset_payload",
    "cbol_tune",
    "compare",
    "default_bounds",
    "default_objective",
    "default_system",
    "derive_run_seed",
    "expected_improvement",
    "gradient_search",
    "heuristic_kernel_params",
    "kernel_matrix",
    "load_assets",
    "load_config",
    "make_rng",
    "module_beam_loss",
    "multi_run",
    "objective_eval",
    "propose_next",
    "random_search",
    "run_oracle",
    "sample_initial",
    "save_assets",
    "step_weights",
    "summarize",
    "total_beam_loss",
    "write_comparison",
    "write_history_jsonl",
    "write_summary_csv",
]
