"""Momentum gradient descent on the KL objective.

Standard schedule: affinities are exaggerated for the first 250
iterations so clusters can separate early, momentum steps from 0.5 to
0.8 at the same point, and per-coordinate adaptive gains rescale the
learning rate. Runs are deterministic given the seed; there is no
multithreading anywhere in the optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..encoders import EncodedCorpus
from .affinity import (
    AffinityMatrix,
    conditional_affinities,
    pairwise_sq_distances,
    symmetrize_knn,
)
from .gradients import gradient_bh, gradient_exact, kl_divergence

KL_SAMPLE_EVERY = 50
MIN_GAIN = 0.01


class TsneParameterError(ValueError):
    def __init__(self, message: str, suggested_max_perplexity: float | None = None):
        super().__init__(message)
        self.suggested_max_perplexity = suggested_max_perplexity


@dataclass(frozen=True)
class TsneParams:
    perplexity: float = 30.0
    theta: float = 0.5
    n_iter: int = 1000
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    learning_rate: float = 200.0
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    momentum_switch_iter: int = 250
    seed: int = 0
    init_scale: float = 1e-4
    exact: bool = False  # dense O(N^2) gradient instead of Barnes-Hut
    output_dim: int = 2

    def __post_init__(self) -> None:
        if self.perplexity <= 0:
            raise TsneParameterError("perplexity must be positive")
        if not 0.0 <= self.theta <= 1.0:
            raise TsneParameterError("theta must lie in [0, 1]")
        if self.n_iter < 1:
            raise TsneParameterError("n_iter must be >= 1")
        if self.output_dim != 2:
            raise TsneParameterError("only 2-D output is supported")
        if self.learning_rate <= 0 or self.init_scale <= 0:
            raise TsneParameterError("learning_rate and init_scale must be positive")


@dataclass(frozen=True)
class Embedding:
    points: np.ndarray  # (N, 2)
    kl_history: tuple[tuple[int, float], ...]  # (iteration, KL) samples
    params: TsneParams | None
    ids: tuple[str, ...]
    n_turns: np.ndarray
    labels: tuple[str | None, ...]

    @property
    def n_points(self) -> int:
        return self.points.shape[0]


def affinities_from_matrix(
    matrix: np.ndarray, perplexity: float
) -> AffinityMatrix:
    """Distances -> calibrated conditionals over 3*perplexity neighbors
    -> symmetrized joint affinities."""
    n = matrix.shape[0]
    k = min(n - 1, math.ceil(3 * perplexity))
    distances = pairwise_sq_distances(matrix)
    neighbors, rows, _ = conditional_affinities(distances, perplexity, k=k)
    P = symmetrize_knn(neighbors, rows, n)
    return P


def embed(corpus: EncodedCorpus, params: TsneParams = TsneParams()) -> Embedding:
    """Full pipeline from an encoded corpus to 2-D points with KL history."""
    n = corpus.n_traces
    required = int(3 * params.perplexity) + 1
    if n < required:
        suggested = max((n - 1) / 3.0, 0.0)
        raise TsneParameterError(
            f"corpus of {n} traces is too small for perplexity "
            f"{params.perplexity} (needs >= {required}); "
            f"try perplexity <= {suggested:.1f}",
            suggested_max_perplexity=suggested,
        )

    P = affinities_from_matrix(corpus.matrix, params.perplexity)
    P_dense = P.to_dense() if params.exact else None

    rng = np.random.default_rng(params.seed)
    Y = rng.normal(0.0, params.init_scale, size=(n, params.output_dim))
    velocity = np.zeros_like(Y)
    gains = np.ones_like(Y)

    exaggerate_until = min(params.exaggeration_iters, params.n_iter)
    kl_history: list[tuple[int, float]] = []

    for it in range(params.n_iter):
        factor = params.early_exaggeration if it < exaggerate_until else 1.0
        if params.exact:
            grad = gradient_exact(P_dense * factor, Y)
        else:
            grad = gradient_bh(P.scaled(factor), Y, params.theta)

        momentum = (
            params.momentum_early
            if it < params.momentum_switch_iter
            else params.momentum_late
        )
        flipped = np.sign(grad) != np.sign(velocity)
        gains = np.where(flipped, gains + 0.2, gains * 0.8)
        np.maximum(gains, MIN_GAIN, out=gains)
        velocity = momentum * velocity - params.learning_rate * (gains * grad)
        Y = Y + velocity
        Y -= Y.mean(axis=0)

        iteration = it + 1
        if iteration % KL_SAMPLE_EVERY == 0 or iteration == params.n_iter:
            # true objective: never measured against exaggerated affinities
            kl = kl_divergence(P, Y)
            if not kl_history or kl_history[-1][0] != iteration:
                kl_history.append((iteration, kl))

    return Embedding(
        points=Y,
        kl_history=tuple(kl_history),
        params=params,
        ids=corpus.ids,
        n_turns=corpus.n_turns.copy(),
        labels=corpus.labels,
    )


def kl_at(embedding: Embedding, iteration: int) -> float:
    """KL sample recorded at ``iteration`` (must be a sampled step)."""
    for it, kl in embedding.kl_history:
        if it == iteration:
            return kl
    raise KeyError(f"no KL sample at iteration {iteration}")


# ---- embedding CSV (header: trace_id,n_turns,label,x,y) ----


def embedding_to_csv(embedding: Embedding) -> str:
    lines = ["trace_id,n_turns,label,x,y"]
    for i in range(embedding.n_points):
        label = embedding.labels[i] or ""
        x, y = embedding.points[i]
        lines.append(
            f"{embedding.ids[i]},{embedding.n_turns[i]},{label},"
            f"{x:.17g},{y:.17g}"
        )
    return "\n".join(lines) + "\n"


def embedding_from_csv(text: str) -> Embedding:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "trace_id,n_turns,label,x,y":
        raise ValueError("bad embedding CSV header")
    ids: list[str] = []
    n_turns: list[int] = []
    labels: list[str | None] = []
    points: list[tuple[float, float]] = []
    for ln in lines[1:]:
        trace_id, turns, label, x, y = ln.split(",")
        ids.append(trace_id)
        n_turns.append(int(turns))
        labels.append(label or None)
        points.append((float(x), float(y)))
    return Embedding(
        points=np.array(points, dtype=np.float64).reshape(len(points), 2),
        kl_history=(),
        params=None,
        ids=tuple(ids),
        n_turns=np.array(n_turns, dtype=np.int64),
        labels=tuple(labels),
    )


def kl_history_to_csv(embedding: Embedding) -> str:
    lines = ["iter,kl"]
    for it, kl in embedding.kl_history:
        lines.append(f"{it},{kl:.17g}")
    return "\n".join(lines) + "\n"
