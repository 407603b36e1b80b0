import pytest
import numpy as np
from atvprune.numerics import Rng
from atvprune.calibration import PoolKind
from atvprune.errors import EmptyCalibrationError, ValidationError
from atvprune.pruner import SparsityPattern
from atvprune.model import PRUNABLE_LAYERS, TokenSequence, layer_key
from atvprune.probe import (
    PATHWAY_LAYERS,
    MaskIoUStats,
    PathwayTarget,
    decouple,
    mask_iou,
    mask_iou_stats,
    pathway_activations,
    prune_pathway,
    sensitivity_grid,
)
from conftest import make_model, make_samples, random_mixed_sequence


def test_decoupled_forward_is_bitwise_identical():
    model = make_model(d_model=16, n_blocks=3, n_heads=4, d_ffn=32)
    dense = decouple(model)
    rng = Rng(8)
    for i in range(50):
        n_tokens = 1 + int(rng.next_u64(1)[0] % np.uint64(24))
        seq = random_mixed_sequence(rng.spawn("seq", i), n_tokens, 16, f"s{i}")
        shared = model.forward(seq)
        split = dense.forward(seq)
        assert np.array_equal(shared.output, split.output)
        for a, b in zip(shared.blocks, split.blocks):
            assert np.array_equal(a.block_output, b.block_output)
            for name in PRUNABLE_LAYERS:
                assert np.array_equal(a.activations[name], b.activations[name])


def test_pathways_are_independent_copies(tiny_model):
    dense = decouple(tiny_model)
    for block, source in zip(dense.blocks, tiny_model.blocks):
        for name in PATHWAY_LAYERS:
            text, visual = block.text.layer(name), block.visual.layer(name)
            assert np.array_equal(text, source.layer(name))
            assert np.array_equal(visual, source.layer(name))
            assert text is not visual and not np.shares_memory(text, visual)
        assert block.w_o is source.w_o
    assert len(dense.pathway_keys()) == tiny_model.config.n_blocks * len(PATHWAY_LAYERS)


def test_pathway_activations_route_rows(tiny_model):
    dense = decouple(tiny_model)
    text_only = TokenSequence("t", Rng(1).normal((4, 8)).astype(np.float32), ("text",) * 4)
    trace = dense.forward(text_only).block(0)
    visual = pathway_activations(trace, text_only, PathwayTarget.VISUAL)
    assert all(rows.shape[0] == 0 for rows in visual.values())
    text = pathway_activations(trace, text_only, PathwayTarget.TEXTUAL)
    assert all(rows.shape[0] == 4 for rows in text.values())


def _silu(x):
    return x / (1.0 + np.exp(-x))


def test_fully_pruned_visual_pathway_matches_hand_routing():
    model = make_model(n_blocks=1)
    samples = make_samples(n_samples=3)
    pruned, masks = prune_pathway(
        decouple(model), PathwayTarget.VISUAL, PoolKind.MIXED_ALL, SparsityPattern.unstructured(1.0), samples
    )
    assert not any(mask.any() for mask in masks.values())
    block = model.blocks[0]
    w = {name: block.layer(name).astype(np.float64) for name in PRUNABLE_LAYERS}
    n_heads, hd = 2, 4
    for seq in samples:
        x = seq.embeddings.astype(np.float64)
        keep = seq.is_text[:, None]
        h = x / np.sqrt((x * x).mean(axis=1, keepdims=True) + 1e-6) * block.norm1
        q, k, v = (np.where(keep, h @ w[name].T, 0.0) for name in ("w_q", "w_k", "w_v"))
        context = np.zeros_like(x)
        n = len(x)
        for head in range(n_heads):
            cols = slice(head * hd, (head + 1) * hd)
            logits = q[:, cols] @ k[:, cols].T / np.sqrt(hd)
            logits[np.triu_indices(n, 1)] = -np.inf
            weights = np.exp(logits - logits.max(axis=1, keepdims=True))
            context[:, cols] = (weights / weights.sum(axis=1, keepdims=True)) @ v[:, cols]
        mid = x + context @ w["w_o"].T
        h2 = mid / np.sqrt((mid * mid).mean(axis=1, keepdims=True) + 1e-6) * block.norm2
        out = mid + np.where(keep, _silu(h2 @ w["w_up"].T) @ w["w_down"].T, 0.0)
        assert np.allclose(pruned.forward(seq).output, out, rtol=1e-4, atol=1e-4)


def test_pruning_is_scoped_to_one_pathway(tiny_model, tiny_samples):
    dense = decouple(tiny_model)
    pruned, masks = prune_pathway(
        dense, PathwayTarget.TEXTUAL, PoolKind.VISUAL_ONLY, SparsityPattern.unstructured(0.5), tiny_samples
    )
    assert set(masks) == {layer_key(b, n) for b in range(2) for n in PATHWAY_LAYERS}
    for before, after in zip(dense.blocks, pruned.blocks):
        for name in PATHWAY_LAYERS:
            assert np.array_equal(after.visual.layer(name), before.visual.layer(name))
            assert (after.text.layer(name) == 0).mean() == pytest.approx(0.5)
        assert np.array_equal(after.w_o, before.w_o)
    # The dense model is left untouched
    for block, source in zip(dense.blocks, tiny_model.blocks):
        assert np.array_equal(block.text.w_up, source.w_up)


def test_zero_sparsity_is_identity(tiny_model, tiny_samples):
    dense = decouple(tiny_model)
    pruned, _ = prune_pathway(
        dense, PathwayTarget.TEXTUAL, PoolKind.TEXT_ONLY, SparsityPattern.unstructured(0.0), tiny_samples
    )
    for seq in tiny_samples:
        assert np.array_equal(pruned.forward(seq).output, tiny_model.forward(seq).output)


def test_empty_pathway_pool_raises(tiny_model):
    text_only = [TokenSequence("t", Rng(2).normal((4, 8)).astype(np.float32), ("text",) * 4)]
    with pytest.raises(EmptyCalibrationError) as e:
        prune_pathway(
            decouple(tiny_model),
            PathwayTarget.VISUAL,
            PoolKind.VISUAL_ONLY,
            SparsityPattern.unstructured(0.5),
            text_only,
        )
    assert e.value.code == "empty-pathway-calibration"
    with pytest.raises(ValidationError):
        prune_pathway(
            decouple(tiny_model), PathwayTarget.VISUAL, PoolKind.ATV, SparsityPattern.unstructured(0.5), text_only
        )


def test_mask_iou_cases(run_context):
    a = np.array([[True, False], [True, True]])
    assert mask_iou(a, a) == 1.0
    assert mask_iou(a, ~a) == 0.0
    assert mask_iou(a, np.array([[True, True], [False, False]])) == pytest.approx(1 / 4)
    empty = np.zeros((2, 2), dtype=bool)
    assert mask_iou(empty, empty) == 1.0
    assert run_context.flags.count("iou-empty-masks") == 1
    with pytest.raises(ValidationError):
        mask_iou(a, np.ones((2, 3), dtype=bool))


@pytest.mark.slow
def test_random_mask_iou_is_one_third():
    rng = Rng(99)
    values = []
    for batch in range(100):
        draws = rng.random(2 * 100 * 128 * 128).reshape(2, 100, 128, 128) < 0.5
        values.extend(mask_iou(draws[0, i], draws[1, i]) for i in range(100))
    assert len(values) == 10_000
    assert np.mean(values) == pytest.approx(1 / 3, abs=0.01)


def test_iou_stats():
    stats = MaskIoUStats.from_values({"b": 0.05, "a": 1.0, "c": 0.55})
    assert list(stats.layers) == ["b", "a", "c"]
    assert stats.histogram == [1, 0, 0, 0, 0, 1, 0, 0, 0, 1]
    assert (stats.min, stats.max) == (0.05, 1.0)
    assert stats.mean == pytest.approx(0.5333333333)
    masks = {"x": np.ones((2, 2), dtype=bool)}
    with pytest.raises(ValidationError):
        mask_iou_stats(masks, {"y": np.ones((2, 2), dtype=bool)})


def test_sensitivity_grid(tiny_model):
    samples = make_samples(n_samples=6)
    result = sensitivity_grid(
        tiny_model,
        samples[:4],
        samples[4:],
        sparsities=(0.5,),
        iou_pools=(PoolKind.TEXT_ONLY, PoolKind.TEXT_ONLY),
    )
    assert len(result.cells) == 6
    assert {(c.pathway, c.pool) for c in result.cells} == {
        (t, p) for t in ("textual", "visual") for p in ("text_only", "visual_only", "mixed_all")
    }
    for cell in result.cells:
        assert 0.0 <= cell.retention <= 1.0
        assert cell.error_all > 0.0
    assert len(result.iou) == 2
    assert all(s.stats.min == 1.0 for s in result.iou)
    assert len(result.iou_rows()) == 2 * 2 * len(PATHWAY_LAYERS)
