import pytest
import numpy as np
from typing import List
from atvprune.numerics import Rng
from atvprune.context import RunContext
from atvprune.evalgen import SynthSpec, generate_samples
from atvprune.model import ModelConfig, TokenSequence, ToyTransformer


def make_samples(
    n_samples: int = 4,
    n_visual: int = 6,
    n_text: int = 4,
    d_model: int = 8,
    seed: int = 3,
    separation: float = 4.0,
) -> List[TokenSequence]:
    return generate_samples(
        SynthSpec(
            seed=seed,
            n_samples=n_samples,
            n_visual=n_visual,
            n_text=n_text,
            d_model=d_model,
            separation=separation,
        )
    )


def make_model(
    d_model: int = 8, n_blocks: int = 2, n_heads: int = 2, d_ffn: int = 16, seed: int = 11
) -> ToyTransformer:
    return ToyTransformer.random(ModelConfig(d_model, n_blocks, n_heads, d_ffn), Rng(seed))


def random_mixed_sequence(rng: Rng, n_tokens: int, d_model: int, name: str) -> TokenSequence:
    """Sequence with randomly interleaved modalities and at least one text token."""
    labels = ["text" if u < 0.5 else "visual" for u in rng.random(n_tokens)]
    labels[int(rng.next_u64(1)[0] % np.uint64(n_tokens))] = "text"
    embeddings = rng.normal((n_tokens, d_model)).astype(np.float32)
    return TokenSequence(id=name, embeddings=embeddings, modality=tuple(labels))


@pytest.fixture
def tiny_model() -> ToyTransformer:
    return make_model()


@pytest.fixture
def tiny_samples() -> List[TokenSequence]:
    return make_samples()


@pytest.fixture
def run_context():
    with RunContext("test") as context:
        yield context
