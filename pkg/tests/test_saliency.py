import math
import itertools
import pytest
import numpy as np
from atvprune.numerics import Rng, pairwise_cosine_distance
from atvprune.model import BlockTrace, ForwardTrace, ModelConfig, TokenSequence, ToyTransformer
from atvprune.errors import ValidationError
from atvprune.saliency import (
    BudgetRule,
    SaliencyProfile,
    SaliencySignal,
    TokenScores,
    abs_scores,
    block_mean_saliency,
    block_saliency,
    budget,
    dbs_scores,
    drift_scores,
    matched_fixed_budget,
    select_maxmin,
    select_random,
    select_topk,
)
from conftest import make_samples


def test_budget_formula_property():
    rng = Rng(123)
    alphas = rng.random(10000) * 8.0
    s_bars = rng.random(10000) * 2.0
    n_texts = 1 + (rng.next_u64(10000) % np.uint64(200)).astype(np.int64)
    for alpha, s_bar, n_text in zip(alphas, s_bars, n_texts):
        alpha, s_bar, n_text = float(alpha), float(s_bar), int(n_text)
        k = budget(BudgetRule(alpha=alpha), s_bar, n_text)
        assert k == math.floor(alpha * s_bar * n_text)
        assert budget(BudgetRule(alpha=alpha * 1.5), s_bar, n_text) >= k
        assert budget(BudgetRule(alpha=alpha), s_bar * 1.25, n_text) >= k
        assert budget(BudgetRule(alpha=alpha), s_bar, n_text + 1) >= k
        assert budget(BudgetRule(alpha=0.0), s_bar, n_text) == 0


def test_budget_rules():
    assert budget(BudgetRule.fixed(5), 0.0, 3) == 5
    with pytest.raises(ValidationError):
        BudgetRule(alpha=-1.0)
    with pytest.raises(ValidationError):
        BudgetRule(adaptive=False)
    with pytest.raises(ValidationError):
        budget(BudgetRule(), 0.5, 0)


def test_matched_fixed_budget():
    assert matched_fixed_budget(100, 4, 3) == (8, 4)
    assert matched_fixed_budget(0, 4, 3) == (0, 0)
    with pytest.raises(ValidationError):
        matched_fixed_budget(10, 0, 3)


def test_topk_ties_and_bounds():
    scores = TokenScores(np.array([2, 5, 7, 9]), np.array([0.5, 0.5, 0.9, 0.5]))
    assert select_topk(scores, 2).tolist() == [2, 7]
    assert select_topk(scores, 0).tolist() == []
    assert select_topk(scores, 10).tolist() == [2, 5, 7, 9]
    flat = TokenScores(np.arange(6), np.zeros(6))
    assert select_topk(flat, 3).tolist() == [0, 1, 2]


def test_topk_invariant_under_increasing_transforms():
    rng = Rng(77)
    transforms = [lambda s: 3.0 * s + 7.0, lambda s: s ** 3, lambda s: np.exp(s / 10.0)]
    for case in range(1000):
        n = 1 + case % 20
        raw = (rng.next_u64(n) % np.uint64(50)).astype(np.float64)
        positions = np.sort(rng.sample_without_replacement(100, n))
        k = int(rng.next_u64(1)[0] % np.uint64(n + 2))
        base = select_topk(TokenScores(positions, raw), k)
        for transform in transforms:
            assert np.array_equal(select_topk(TokenScores(positions, transform(raw)), k), base)


def _min_pairwise(angles, subset):
    return min(angles[i, j] for i, j in itertools.combinations(subset, 2))


def test_maxmin_half_approximation():
    for seed in range(100):
        for n, k in ((8, 3), (10, 4)):
            reps = Rng(seed).spawn(n).normal((n, 16))
            # Angles are a metric on the sphere and rank pairs like cosine distance
            angles = np.arccos(np.clip(1.0 - pairwise_cosine_distance(reps), -1.0, 1.0))
            optimum = max(
                _min_pairwise(angles, subset)
                for subset in itertools.combinations(range(n), k)
            )
            chosen = select_maxmin(reps, np.arange(n), k)
            assert chosen.size == k
            assert _min_pairwise(angles, chosen.tolist()) >= 0.5 * optimum - 1e-12


def test_maxmin_edges():
    reps = Rng(1).normal((4, 3))
    positions = np.array([10, 11, 12, 13])
    assert select_maxmin(reps, positions, 0).tolist() == []
    assert select_maxmin(reps, positions, 9).tolist() == [10, 11, 12, 13]
    # Start from the highest score, then the farthest token
    reps = np.array([[1.0, 0.0], [0.9, 0.1], [-1.0, 0.0]])
    picked = select_maxmin(reps, np.array([0, 1, 2]), 2, start_scores=np.array([0.0, 1.0, 0.0]))
    assert picked.tolist() == [1, 2]


def test_random_selection_is_seeded():
    positions = np.arange(5, 25)
    a = select_random(Rng(3).spawn("x", 0), positions, 6)
    b = select_random(Rng(3).spawn("x", 0), positions, 6)
    assert np.array_equal(a, b)
    assert a.size == 6 and set(a.tolist()) <= set(positions.tolist())


def test_drift_is_zero_on_identity_model():
    model = ToyTransformer.zeros(ModelConfig(8, 2, 2, 16))
    samples = make_samples()
    traces = [model.forward(seq) for seq in samples]
    saliency = block_saliency(SaliencySignal.DRIFT, traces, samples, 1)
    assert saliency.mean == pytest.approx(0.0, abs=1e-12)
    assert all(np.allclose(s.scores, 0.0, atol=1e-12) for s in saliency.samples)


def test_drift_scores_match_definition(tiny_model, tiny_samples):
    seq = tiny_samples[0]
    trace = tiny_model.forward(seq)
    scores = drift_scores(trace, seq, 0)
    assert scores.positions.tolist() == seq.visual_positions.tolist()
    x_in = trace.block(0).block_input.astype(np.float64)
    x_out = trace.block(0).block_output.astype(np.float64)
    for p, s in zip(scores.positions, scores.scores):
        cos = x_in[p] @ x_out[p] / (np.linalg.norm(x_in[p]) * np.linalg.norm(x_out[p]))
        assert s == pytest.approx(1.0 - cos, abs=1e-9)
    assert np.all((scores.scores >= 0.0) & (scores.scores <= 2.0))


def test_abs_scores_average_text_queries(tiny_model, tiny_samples):
    seq = tiny_samples[2]
    trace = tiny_model.forward(seq)
    scores = abs_scores(trace, seq, 1)
    attention = trace.block(1).attention.astype(np.float64)
    text = seq.text_positions
    for p, s in zip(scores.positions, scores.scores):
        assert s == pytest.approx(attention[:, text, p].mean(), abs=1e-12)


def test_dbs_scores(tiny_model, tiny_samples):
    seq = tiny_samples[0]
    trace = tiny_model.forward(seq)
    scores = dbs_scores(seq, trace, 0)
    reps = trace.block(0).block_input[seq.visual_positions]
    distances = pairwise_cosine_distance(reps)
    assert np.allclose(scores.scores, distances.sum(axis=1) / (len(reps) - 1))

    single = make_samples(n_visual=1)[0]
    assert dbs_scores(single, tiny_model.forward(single), 0).scores.tolist() == [0.0]


def test_block_mean_saliency(run_context):
    a = TokenScores(np.array([0, 1]), np.array([0.2, 0.4]))
    b = TokenScores(np.array([3]), np.array([0.9]))
    assert block_mean_saliency([a, b]) == pytest.approx(0.5)
    empty = TokenScores(np.zeros(0, dtype=np.int64), np.zeros(0))
    assert block_mean_saliency([empty, empty]) == 0.0
    assert run_context.flags.count("no-visual-tokens") == 1


def test_random_signal_uses_drift_mean(tiny_model, tiny_samples):
    traces = [tiny_model.forward(seq) for seq in tiny_samples]
    drift = block_saliency(SaliencySignal.DRIFT, traces, tiny_samples, 0)
    random = block_saliency(SaliencySignal.RANDOM, traces, tiny_samples, 0)
    assert random.mean == drift.mean


def _hand_trace(x_in, x_out=None, attention=None):
    x_in = np.asarray(x_in, dtype=np.float32)
    block = BlockTrace(
        block_input=x_in,
        block_output=None if x_out is None else np.asarray(x_out, dtype=np.float32),
        attention=None if attention is None else np.asarray(attention, dtype=np.float32),
    )
    return ForwardTrace(blocks=[block], output=x_in)


def _sequence(modality, d_model=3):
    return TokenSequence("hand", np.ones((len(modality), d_model), dtype=np.float32), tuple(modality))


def test_hand_built_signals():
    seq = _sequence(["visual", "visual", "text"])
    x_in = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 1.0], [1.0, 1.0, 1.0]])
    antipodal = drift_scores(_hand_trace(x_in, -x_in), seq, 0)
    assert np.allclose(antipodal.scores, 2.0)

    # Uniform rows over the 3 tokens, no causal mask in a hand-built trace
    uniform = np.full((1, 3, 3), 1.0 / 3.0)
    assert np.allclose(abs_scores(_hand_trace(x_in, attention=uniform), seq, 0).scores, 1.0 / 3.0)
    one_hot = np.zeros((1, 3, 3))
    one_hot[0, 2, 1] = 1.0
    assert abs_scores(_hand_trace(x_in, attention=one_hot), seq, 0).scores.tolist() == [0.0, 1.0]

    pair = _sequence(["visual", "text"])
    halves = _hand_trace(np.ones((2, 3)), attention=np.full((1, 2, 2), 0.5))
    assert abs_scores(halves, pair, 0).scores.tolist() == [0.5]


def test_hand_built_diversity():
    identical = _sequence(["visual", "visual", "text"])
    trace = _hand_trace([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [0.0, 0.0, 1.0]])
    assert np.allclose(dbs_scores(identical, trace, 0).scores, 0.0, atol=1e-12)
    orthogonal = _sequence(["visual", "visual", "visual", "text"])
    trace = _hand_trace(np.vstack([np.eye(3), np.ones((1, 3))]))
    assert np.allclose(dbs_scores(orthogonal, trace, 0).scores, 1.0)


def test_saliency_profile(tiny_model, tiny_samples):
    traces = [tiny_model.forward(seq) for seq in tiny_samples]
    profile = SaliencyProfile("drift")
    for block in (1, 0):
        profile.add(block_saliency(SaliencySignal.DRIFT, traces, tiny_samples, block))
    assert profile.signal is SaliencySignal.DRIFT
    assert profile.means() == [profile.blocks[0].mean, profile.blocks[1].mean]
    with pytest.raises(ValidationError):
        profile.add(block_saliency(SaliencySignal.DBS_DIVERSITY, traces, tiny_samples, 0))
