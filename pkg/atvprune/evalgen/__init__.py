"""
Synthetic bimodal data, reconstruction-error evaluation, drift statistics
and ablation sweeps.
"""

from .drift import DriftRow, drift_report
from .evaluate import EvalResult, evaluate
from .synth import (
    CALIB_FRACTION,
    SynthDataset,
    SynthSpec,
    generate,
    generate_model,
    generate_samples,
    modality_block_masks,
    modality_means,
    split_dataset,
)
from .sweep import (
    ALPHAS,
    TEXT_RATIOS,
    SweepKind,
    SweepRow,
    SweepSetup,
    alpha_sweep,
    baseline_rows,
    default_patterns,
    run_row,
    sweep_rows,
    selection_ablation,
    text_ratio_sweep,
)

__all__ = [
    "DriftRow",
    "drift_report",
    "EvalResult",
    "evaluate",
    "CALIB_FRACTION",
    "SynthDataset",
    "SynthSpec",
    "generate",
    "generate_model",
    "generate_samples",
    "modality_block_masks",
    "modality_means",
    "split_dataset",
    "ALPHAS",
    "TEXT_RATIOS",
    "SweepKind",
    "SweepRow",
    "SweepSetup",
    "alpha_sweep",
    "baseline_rows",
    "default_patterns",
    "run_row",
    "sweep_rows",
    "selection_ablation",
    "text_ratio_sweep",
]
