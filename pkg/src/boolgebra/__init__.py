"""AIG minimization with orchestrated Boolean transforms and a learning-based
sampler/ranker for the per-node transform decision space."""

from .aig import (
    Aig,
    AigError,
    GraphStats,
    LIT_FALSE,
    LIT_TRUE,
    Literal,
    lit_is_complemented,
    lit_node,
    lit_not,
    make_lit,
)

__version__ = "0.1.0"

__all__ = [
    "Aig",
    "AigError",
    "GraphStats",
    "LIT_FALSE",
    "LIT_TRUE",
    "Literal",
    "lit_is_complemented",
    "lit_node",
    "lit_not",
    "make_lit",
    "__version__",
]
