from .config import RunConfig
from atvprune.constants import DEFAULT_ALPHA, QWEN_ALPHA


paper_default = RunConfig(
    alpha=DEFAULT_ALPHA,
    sparsity=0.5,
)
qwen_default = RunConfig(
    alpha=QWEN_ALPHA,
    sparsity=0.6,
)
text_anchor = RunConfig(
    alpha=0.0,
    sparsity=0.5,
)

__all__ = [
    "RunConfig",
    "paper_default",
    "qwen_default",
    "text_anchor",
]
