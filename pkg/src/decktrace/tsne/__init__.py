"""From-scratch Barnes-Hut t-SNE: affinities, quadtree, gradients, optimizer."""

from .affinity import (
    AffinityMatrix,
    conditional_affinities,
    nearest_neighbors,
    pairwise_sq_distances,
    perplexity_search,
    symmetrize,
    symmetrize_knn,
)
from .gradients import attractive_forces, gradient_bh, gradient_exact, kl_divergence
from .optimizer import (
    Embedding,
    TsneParameterError,
    TsneParams,
    embed,
    embedding_from_csv,
    embedding_to_csv,
    kl_history_to_csv,
)
from .quadtree import Quadtree, build_quadtree

__all__ = [
    "AffinityMatrix",
    "Embedding",
    "Quadtree",
    "TsneParameterError",
    "TsneParams",
    "attractive_forces",
    "build_quadtree",
    "conditional_affinities",
    "embed",
    "embedding_from_csv",
    "embedding_to_csv",
    "gradient_bh",
    "gradient_exact",
    "kl_divergence",
    "kl_history_to_csv",
    "nearest_neighbors",
    "pairwise_sq_distances",
    "perplexity_search",
    "symmetrize",
    "symmetrize_knn",
]
