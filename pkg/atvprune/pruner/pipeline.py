"""
Block-by-block activation-aware pruning driver.

For every block in order: forward the calibration samples, score visual
saliency, derive the block mean and per-sample budgets, build the
calibration positions, pool the channel norms over those positions, score
and mask every prunable layer, and apply the masks before moving on.
"""

import numpy as np
from numpy.typing import NDArray
from atvprune.numerics import Rng
from atvprune.utils import block_progress
from contextlib import ExitStack
from concurrent.futures import ThreadPoolExecutor
from atvprune.context import RunContext, current_context
from atvprune.errors import EmptyCalibrationError, ValidationError
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple
from atvprune.saliency import BlockSaliency, block_saliency
from atvprune.calibration import (
    CalibrationSelection,
    PoolPolicy,
    block_norms,
    build_selection,
)
from atvprune.model import (
    CAPTURE_ALL,
    CAPTURE_NONE,
    PRUNABLE_LAYERS,
    BlockTrace,
    ForwardTrace,
    TokenSequence,
    ToyTransformer,
    TransformerBlock,
    forward_block,
    layer_key,
)
from .wanda import make_mask, wanda_scores
from .pattern import ComparisonGroup, Propagation, SparsityPattern
from .report import BlockReport, BudgetSummary, LayerSparsity, PruneReport


class PruneOutcome(NamedTuple):
    """Pruned model, run report and the masks that produced it."""

    model: ToyTransformer
    report: PruneReport
    masks: Dict[str, NDArray[np.bool_]]


def check_pattern(model: ToyTransformer, pattern: SparsityPattern) -> None:
    """Reject N:M patterns whose M does not divide every layer's input width."""
    if not pattern.is_nm:
        return
    for width in {model.config.d_model, model.config.d_ffn}:
        if width % pattern.m != 0:
            raise ValidationError(
                "divisibility", f"input width {width} is not divisible by M={pattern.m}"
            )


def check_dataset(model: ToyTransformer, dataset: Sequence[TokenSequence]) -> None:
    if not dataset:
        raise ValidationError("empty-dataset", "the calibration set is empty")
    for seq in dataset:
        if seq.embeddings.shape[1] != model.config.d_model:
            raise ValidationError(
                "dimension-mismatch",
                f"sample {seq.id} has width {seq.embeddings.shape[1]}, model expects {model.config.d_model}",
            )


class BlockRunner:
    """
    Runs one block over every sample, optionally on a thread pool.

    Results always come back in dataset order.
    """

    def __init__(self, n_heads: int, threads: int = 1):
        self.n_heads = n_heads
        self.threads = max(1, int(threads))

    def map(self, fn: Callable, items: Sequence) -> List:
        if self.threads == 1 or len(items) < 2:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            return list(executor.map(fn, items))

    def run(
        self, block: TransformerBlock, hidden: Sequence[NDArray[np.float32]], capture=CAPTURE_ALL
    ) -> List[Tuple[NDArray[np.float32], BlockTrace]]:
        return self.map(lambda x: forward_block(block, x, self.n_heads, capture), hidden)


def prune_block_layers(
    block: TransformerBlock,
    norms: Dict[str, NDArray[np.float64]],
    pattern: SparsityPattern,
    group: ComparisonGroup,
    layers: Sequence[str] = PRUNABLE_LAYERS,
) -> Dict[str, NDArray[np.bool_]]:
    """Wanda masks for the given layers of a block."""
    return {
        name: make_mask(wanda_scores(block.layer(name), norms[name]), pattern, group)
        for name in layers
    }


def _block_report(
    index: int,
    saliency: Optional[BlockSaliency],
    selection: CalibrationSelection,
    masks: Dict[str, NDArray[np.bool_]],
) -> BlockReport:
    budgets = selection.budgets()
    return BlockReport(
        block=index,
        s_bar=saliency.mean if saliency is not None else None,
        budgets=budgets,
        budget_summary=BudgetSummary.from_budgets(budgets),
        positions_total=selection.total_positions,
        text_kept_total=sum(s.n_text_kept for s in selection.samples),
        visual_selected_total=selection.total_visual_selected,
        layers=[
            LayerSparsity.from_mask(layer_key(index, name), masks[name])
            for name in PRUNABLE_LAYERS
        ],
    )


def run_atv_pipeline(
    model: ToyTransformer,
    dataset: Sequence[TokenSequence],
    policy: PoolPolicy,
    pattern: SparsityPattern,
    group: ComparisonGroup = ComparisonGroup.PER_OUTPUT_ROW,
    propagation: Propagation = Propagation.SEQUENTIAL,
    seed: Optional[int] = None,
    threads: int = 1,
    show_progress: bool = False,
) -> PruneOutcome:
    """
    Prune every block of a model with a modality-aware calibration pool.

    Args:
        model: Dense model
        dataset: Calibration samples, in a fixed order
        policy: Calibration pool policy
        pattern: Unstructured or N:M sparsity
        group: Comparison group for unstructured masks
        propagation: Calibrate block b on pruned (sequential) or dense outputs of blocks < b
        seed: Seed of the random selection baseline
        threads: Worker threads for per-sample forwards
        show_progress: Show a rich progress bar

    Returns:
        PruneOutcome(model, report, masks)

    Raises:
        EmptyCalibrationError: If a block's pooled calibration set is empty
    """
    check_dataset(model, dataset)
    check_pattern(model, pattern)
    context = current_context()
    with ExitStack() as stack:
        if context is None:
            context = stack.enter_context(RunContext("prune"))
        return _prune_blocks(
            model,
            dataset,
            policy,
            pattern,
            ComparisonGroup(group),
            Propagation(propagation),
            seed,
            BlockRunner(model.config.n_heads, threads),
            context,
            show_progress,
        )


def _prune_blocks(
    model: ToyTransformer,
    dataset: Sequence[TokenSequence],
    policy: PoolPolicy,
    pattern: SparsityPattern,
    group: ComparisonGroup,
    propagation: Propagation,
    seed: Optional[int],
    runner: BlockRunner,
    context: RunContext,
    show_progress: bool,
) -> PruneOutcome:
    rng = Rng(seed) if seed is not None else None
    hidden = [seq.embeddings for seq in dataset]
    traces = [ForwardTrace(blocks=[], output=x) for x in hidden]
    blocks = list(model.blocks)
    all_masks: Dict[str, NDArray[np.bool_]] = {}
    reports: List[BlockReport] = []

    progress = block_progress() if show_progress else None
    task = None
    if progress is not None:
        progress.start()
        task = progress.add_task("Pruning blocks", total=len(blocks))

    try:
        for index, block in enumerate(blocks):
            results = runner.run(block, hidden)
            for trace, (out, block_trace) in zip(traces, results):
                trace.blocks.append(block_trace)
                trace.output = out

            saliency = None
            if policy.needs_saliency:
                saliency = block_saliency(policy.signal, traces, dataset, index)
            selection = build_selection(policy, traces, dataset, saliency, index, rng)
            if selection.total_positions == 0:
                raise EmptyCalibrationError(
                    f"block {index}: the pooled calibration set is empty"
                )

            norms = block_norms(traces, selection)
            masks = prune_block_layers(block, norms, pattern, group)
            pruned = block.with_masks(masks)
            blocks[index] = pruned
            for name, mask in masks.items():
                all_masks[layer_key(index, name)] = mask

            if propagation is Propagation.SEQUENTIAL:
                hidden = [out for out, _ in runner.run(pruned, hidden, CAPTURE_NONE)]
            else:
                hidden = [out for out, _ in results]

            report = _block_report(index, saliency, selection, masks)
            reports.append(report)
            context.add_history(
                "block",
                {
                    "block": index,
                    "s_bar": report.s_bar,
                    "positions": report.positions_total,
                },
            )
            # Release the captured tensors of the finished block.
            for trace in traces:
                trace.blocks[index] = BlockTrace()
            if progress is not None:
                progress.advance(task)
    finally:
        if progress is not None:
            progress.stop()

    numel = sum(layer.numel for r in reports for layer in r.layers)
    pruned_total = sum(layer.pruned for r in reports for layer in r.layers)
    report = PruneReport(
        config={"policy": policy.describe(), "seed": seed},
        pattern=pattern.to_dict(),
        comparison_group=group.value,
        propagation=propagation.value,
        n_samples=len(dataset),
        blocks=reports,
        global_sparsity=pruned_total / numel if numel else 0.0,
        flags={code: context.flags.count(code) for code in context.flags.codes()},
        elapsed_seconds=context.elapsed(),
    )
    return PruneOutcome(ToyTransformer(model.config, tuple(blocks)), report, all_masks)
