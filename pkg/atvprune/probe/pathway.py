"""
Pruning one modality pathway of a decoupled model under a calibration pool.
"""

import numpy as np
from numpy.typing import NDArray
from atvprune.errors import EmptyCalibrationError, ValidationError
from typing import Dict, Sequence, Tuple
from atvprune.calibration import PoolKind, PoolPolicy, block_norms, build_selection
from atvprune.model import CAPTURE_ALL, CAPTURE_NONE, ForwardTrace, TokenSequence, layer_key
from atvprune.pruner import (
    BlockRunner,
    ComparisonGroup,
    Propagation,
    SparsityPattern,
    prune_block_layers,
)
from .decoupled import (
    PATHWAY_LAYERS,
    DecoupledModel,
    PathwayTarget,
    forward_decoupled_block,
)

PROBE_POOLS = (PoolKind.TEXT_ONLY, PoolKind.VISUAL_ONLY, PoolKind.MIXED_ALL)


def prune_pathway(
    model: DecoupledModel,
    target: PathwayTarget,
    pool: PoolKind,
    pattern: SparsityPattern,
    dataset: Sequence[TokenSequence],
    group: ComparisonGroup = ComparisonGroup.PER_OUTPUT_ROW,
    propagation: Propagation = Propagation.SEQUENTIAL,
    threads: int = 1,
) -> Tuple[DecoupledModel, Dict[str, NDArray[np.bool_]]]:
    """
    Prune the five replicated layers of one pathway in every block.

    Channel norms come from the pre-routing activations of each layer over
    the pool's positions, so a text pathway can be scored with visual-token
    statistics. The other pathway and the shared w_o are never touched.

    Args:
        model: Dense decoupled model
        target: Pathway to prune
        pool: text_only, visual_only or mixed_all
        pattern: Sparsity pattern
        dataset: Calibration samples
        group: Comparison group for unstructured masks
        propagation: Calibrate on pruned or dense outputs of earlier blocks
        threads: Worker threads for per-sample forwards

    Returns:
        Tuple of (pruned model, masks keyed by layer name)

    Raises:
        EmptyCalibrationError: If the pool holds no position across the dataset
    """
    target = PathwayTarget(target)
    pool = PoolKind(pool)
    if pool not in PROBE_POOLS:
        raise ValidationError("config", f"probe pools are {[p.value for p in PROBE_POOLS]}")
    if not dataset:
        raise ValidationError("empty-dataset", "the calibration set is empty")
    if pattern.is_nm:
        for width in {model.config.d_model, model.config.d_ffn}:
            if width % pattern.m != 0:
                raise ValidationError(
                    "divisibility", f"input width {width} is not divisible by M={pattern.m}"
                )

    policy = PoolPolicy(kind=pool)
    runner = BlockRunner(model.config.n_heads, threads)
    hidden = [seq.embeddings for seq in dataset]
    masks: Dict[str, NDArray[np.bool_]] = {}

    def run(block, capture):
        return runner.map(
            lambda item: forward_decoupled_block(
                block, item[0], item[1].is_text, model.config.n_heads, capture
            ),
            list(zip(hidden, dataset)),
        )

    for index in range(model.config.n_blocks):
        block = model.blocks[index]
        results = run(block, CAPTURE_ALL)
        # Only the current block is addressed, earlier slots stay empty.
        traces = [
            ForwardTrace(blocks=[None] * index + [trace], output=out)
            for out, trace in results
        ]
        selection = build_selection(policy, traces, dataset, None, index)
        if selection.total_positions == 0:
            raise EmptyCalibrationError(
                f"{target.value} pathway under {pool.value} pool has no calibration rows at block {index}",
                code="empty-pathway-calibration",
            )
        norms = block_norms(traces, selection, PATHWAY_LAYERS)
        weights = block.pathway(target)
        block_masks = prune_block_layers(weights, norms, pattern, ComparisonGroup(group), PATHWAY_LAYERS)
        pruned = block.with_pathway(target, weights.with_masks(block_masks))
        model = model.with_block(index, pruned)
        for name, mask in block_masks.items():
            masks[layer_key(index, name)] = mask

        if Propagation(propagation) is Propagation.SEQUENTIAL:
            hidden = [out for out, _ in run(pruned, CAPTURE_NONE)]
        else:
            hidden = [out for out, _ in results]
    return model, masks
