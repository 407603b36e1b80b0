"""
Ablation sweeps: budget coefficient, text-token retention and selection
strategy. Every row prunes the same dense model and evaluates it on the same
held-out samples.
"""

from enum import Enum
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence
from atvprune.errors import EmptyCalibrationError
from atvprune.constants import DEFAULT_ALPHA, DEFAULT_SPARSITIES, NM_PATTERNS
from atvprune.calibration import PoolKind, PoolPolicy
from atvprune.model import TokenSequence, ToyTransformer
from atvprune.saliency import BudgetRule, SaliencySignal, matched_fixed_budget
from atvprune.pruner import (
    ComparisonGroup,
    Propagation,
    PruneReport,
    SparsityPattern,
    run_atv_pipeline,
)
from .evaluate import evaluate

ALPHAS = (0.0, 0.5, 1.0, 2.0, 4.0, 8.0)
TEXT_RATIOS = (1.0, 0.9, 0.8, 0.6, 0.4, 0.2, 0.0)


class SweepKind(str, Enum):
    """Which ablation a sweep runs."""

    ALPHA = "alpha"
    TEXT_RATIO = "text_ratio"
    SELECTION = "selection"
    # mixed_all, text_only and visual_only reference rows
    BASELINES = "baselines"


@dataclass
class SweepRow:
    """Outcome of one pruning run in a sweep."""

    label: str
    value: float
    status: str = "ok"
    retention: Optional[float] = None
    error_text: Optional[float] = None
    error_visual: Optional[float] = None
    error_all: Optional[float] = None
    # Visual tokens selected per sample per block
    mean_selected: Optional[float] = None
    total_selected: Optional[int] = None
    error_code: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SweepSetup:
    """What stays fixed across the rows of a sweep."""

    model: ToyTransformer
    calib: Sequence[TokenSequence]
    heldout: Sequence[TokenSequence]
    pattern: SparsityPattern
    group: ComparisonGroup = ComparisonGroup.PER_OUTPUT_ROW
    propagation: Propagation = Propagation.SEQUENTIAL
    seed: Optional[int] = None
    threads: int = 1


def _mean_selected(report: PruneReport) -> float:
    slots = report.n_samples * len(report.blocks)
    return report.total_visual_selected() / slots if slots else 0.0


def run_row(setup: SweepSetup, policy: PoolPolicy, label: str, value: float) -> SweepRow:
    """
    Prune and evaluate once. An empty calibration pool yields a failed row.
    """
    try:
        outcome = run_atv_pipeline(
            setup.model,
            setup.calib,
            policy,
            setup.pattern,
            setup.group,
            setup.propagation,
            seed=setup.seed,
            threads=setup.threads,
        )
    except EmptyCalibrationError as e:
        return SweepRow(label=label, value=value, status="failed", error_code=e.code)

    result = evaluate(setup.model, outcome.model, setup.heldout)
    return SweepRow(
        label=label,
        value=value,
        retention=result.retention,
        error_text=result.error_text,
        error_visual=result.error_visual,
        error_all=result.error_all,
        mean_selected=_mean_selected(outcome.report),
        total_selected=outcome.report.total_visual_selected(),
    )


def alpha_sweep(
    setup: SweepSetup,
    alphas: Sequence[float] = ALPHAS,
    signal: SaliencySignal = SaliencySignal.DRIFT,
) -> List[SweepRow]:
    """One row per budget coefficient; alpha 0 is the text-anchored pool."""
    return [
        run_row(setup, PoolPolicy.atv(alpha=alpha, signal=signal), "alpha", alpha)
        for alpha in alphas
    ]


def text_ratio_sweep(
    setup: SweepSetup,
    ratios: Sequence[float] = TEXT_RATIOS,
    alpha: float = 1.0,
) -> List[SweepRow]:
    """One row per fraction of drift-ranked text tokens kept in the pool."""
    return [
        run_row(setup, PoolPolicy.atv(alpha=alpha, text_keep_ratio=ratio), "text_ratio", ratio)
        for ratio in ratios
    ]


def selection_ablation(setup: SweepSetup, alpha: float = 1.0) -> List[SweepRow]:
    """
    Compare visual-token selection strategies.

    The fixed-budget drift and random rows get the constant per-block budget
    whose total matches the adaptive drift row. ABS and DBS keep their own
    adaptive budgets.
    """
    adaptive = run_row(setup, PoolPolicy.atv(alpha=alpha), "drift_adaptive", alpha)
    rows = [adaptive]
    k, _ = matched_fixed_budget(
        adaptive.total_selected or 0, len(setup.calib), setup.model.config.n_blocks
    )
    fixed = BudgetRule.fixed(k)
    rows.append(
        run_row(
            setup,
            PoolPolicy(kind=PoolKind.ATV, signal=SaliencySignal.DRIFT, budget=fixed),
            "drift_fixed",
            k,
        )
    )
    if setup.seed is not None:
        rows.append(
            run_row(
                setup,
                PoolPolicy(kind=PoolKind.ATV, signal=SaliencySignal.RANDOM, budget=fixed),
                "random_fixed",
                k,
            )
        )
    rows.append(
        run_row(setup, PoolPolicy.atv(alpha=alpha, signal=SaliencySignal.ABS_ATTENTION), "abs_adaptive", alpha)
    )
    rows.append(
        run_row(setup, PoolPolicy.atv(alpha=alpha, signal=SaliencySignal.DBS_DIVERSITY), "dbs_adaptive", alpha)
    )
    return rows


def baseline_rows(setup: SweepSetup) -> List[SweepRow]:
    """Modality-agnostic and single-modality pools for reference."""
    return [
        run_row(setup, PoolPolicy(kind=kind), kind.value, 0.0)
        for kind in (PoolKind.MIXED_ALL, PoolKind.TEXT_ONLY, PoolKind.VISUAL_ONLY)
    ]


def default_patterns() -> List[SparsityPattern]:
    """The reference unstructured levels followed by the semi-structured patterns."""
    return [SparsityPattern.unstructured(rho) for rho in DEFAULT_SPARSITIES] + [
        SparsityPattern.parse(pattern) for pattern in NM_PATTERNS
    ]


def sweep_rows(setup: SweepSetup, kind: SweepKind, alpha: float = DEFAULT_ALPHA) -> List[SweepRow]:
    """
    Run one ablation on a setup.

    Args:
        setup: Model, data and sparsity shared by the rows
        kind: Which ablation
        alpha: Budget coefficient of the text-ratio and selection rows

    Returns:
        The rows in sweep order
    """
    kind = SweepKind(kind)
    if kind is SweepKind.ALPHA:
        return alpha_sweep(setup)
    if kind is SweepKind.TEXT_RATIO:
        return text_ratio_sweep(setup, alpha=alpha)
    if kind is SweepKind.SELECTION:
        return selection_ablation(setup, alpha=alpha)
    return baseline_rows(setup)
