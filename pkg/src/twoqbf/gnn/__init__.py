"""Graph neural network inference over 2QBF formulas.

Pure-numpy forward pass: a bipartite literal/clause graph encoding, a binary
weight bundle format, seven message passing architectures, and the prediction
heads (truth vote, witness polarity, assignment scoring).
"""

from .bundle import (
    ARCHITECTURES,
    HEADS,
    SCORE_EXISTS,
    SCORE_FORALL,
    VOTE,
    WITNESS,
    WeightBundle,
    embedding_shapes,
    from_bytes,
    head_shapes,
    load_bundle,
    random_bundle,
    save_bundle,
    to_bytes,
)
from .graph import GraphEncoding, encode_graph, negate_rows
from .inference import (
    EmbeddingState,
    head_score_exists,
    head_score_forall,
    head_vote,
    head_witness,
    run_embedding,
)

__all__ = [
    "ARCHITECTURES",
    "HEADS",
    "SCORE_EXISTS",
    "SCORE_FORALL",
    "VOTE",
    "WITNESS",
    "WeightBundle",
    "embedding_shapes",
    "from_bytes",
    "head_shapes",
    "load_bundle",
    "random_bundle",
    "save_bundle",
    "to_bytes",
    "GraphEncoding",
    "encode_graph",
    "negate_rows",
    "EmbeddingState",
    "head_score_exists",
    "head_score_forall",
    "head_vote",
    "head_witness",
    "run_embedding",
]
