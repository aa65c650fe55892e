"""Perplexity-calibrated input affinities.

Each point i gets a conditional distribution over its nearest neighbors,
p_{j|i} ~ exp(-beta_i * d_ij^2), with beta_i found by binary search so
the distribution's effective neighbor count 2^H equals the requested
perplexity. Conditionals are then symmetrized,

    p_ij = (p_{j|i} + p_{i|j}) / (2N),

giving a sparse symmetric matrix with unit total mass. Storage is
restricted to each point's ceil(3 * perplexity) nearest neighbors
(union-symmetrized), found by exact scan; no approximate index.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np


def pairwise_sq_distances(matrix: np.ndarray) -> np.ndarray:
    """Full table of squared Euclidean distances.

    Exact, O(N^2) memory: intended for corpora up to a few thousand rows.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError("expected a 2-D matrix of row vectors")
    sq = np.sum(matrix * matrix, axis=1)
    dist = sq[:, None] + sq[None, :] - 2.0 * (matrix @ matrix.T)
    np.maximum(dist, 0.0, out=dist)  # clip roundoff negatives
    np.fill_diagonal(dist, 0.0)
    return dist


def perplexity_search(
    distances_row: np.ndarray,
    target_perplexity: float,
    tol: float = 1e-5,
    max_iter: int = 50,
) -> tuple[float, np.ndarray]:
    """Calibrate one conditional distribution row.

    ``distances_row`` holds squared distances to the candidate neighbors
    (self excluded). Returns the precision beta and the normalized row.
    The search stops once |2^H - perplexity| <= tol * perplexity, or
    after ``max_iter`` halvings, returning the best row found.
    """
    d = np.asarray(distances_row, dtype=np.float64)
    if d.size == 0:
        raise ValueError("cannot calibrate an empty distance row")
    if target_perplexity <= 0:
        raise ValueError("perplexity must be positive")
    if np.all(d == 0.0):
        warnings.warn(
            "degenerate distance row (all zero); returning uniform affinities",
            RuntimeWarning,
            stacklevel=2,
        )
        return 0.0, np.full(d.size, 1.0 / d.size)

    shifted = d - d.min()  # shift-invariant; avoids exp underflow
    beta, beta_lo, beta_hi = 1.0, 0.0, math.inf
    best_beta, best_row, best_gap = beta, None, math.inf
    for _ in range(max_iter):
        weights = np.exp(-beta * shifted)
        total = weights.sum()
        row = weights / total
        nz = row > 0
        entropy = -np.sum(row[nz] * np.log(row[nz]))  # nats
        achieved = math.exp(entropy)  # == 2**H with H in bits
        gap = abs(achieved - target_perplexity)
        if gap < best_gap:
            best_gap, best_beta, best_row = gap, beta, row
        if gap <= tol * target_perplexity:
            break
        if achieved > target_perplexity:  # too flat: sharpen
            beta_lo = beta
            beta = beta * 2.0 if beta_hi == math.inf else (beta + beta_hi) / 2.0
        else:
            beta_hi = beta
            beta = (beta + beta_lo) / 2.0
    return best_beta, best_row


def nearest_neighbors(distances: np.ndarray, k: int) -> np.ndarray:
    """(N, k) indices of each row's k nearest other points.

    Stable ordering (distance, then index) so results are reproducible
    in the presence of duplicate rows.
    """
    n = distances.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in 1..{n - 1}, got {k}")
    neighbors = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        order = np.argsort(distances[i], kind="stable")
        neighbors[i] = order[order != i][:k]
    return neighbors


def conditional_affinities(
    distances: np.ndarray,
    perplexity: float,
    k: int | None = None,
    tol: float = 1e-5,
    max_iter: int = 50,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-point calibrated conditionals over k nearest neighbors.

    Returns (neighbors (N,k), rows (N,k), betas (N,)); each row sums to 1.
    """
    n = distances.shape[0]
    if k is None:
        k = min(n - 1, math.ceil(3 * perplexity))
    neighbors = nearest_neighbors(distances, k)
    rows = np.empty((n, k))
    betas = np.empty(n)
    for i in range(n):
        betas[i], rows[i] = perplexity_search(
            distances[i, neighbors[i]], perplexity, tol=tol, max_iter=max_iter
        )
    return neighbors, rows, betas


@dataclass(frozen=True)
class AffinityMatrix:
    """Symmetric sparse affinities in CSR form; total mass 1."""

    n: int
    indptr: np.ndarray  # int64, length n + 1
    indices: np.ndarray  # int64, column per stored entry
    values: np.ndarray  # float64

    @property
    def nnz(self) -> int:
        return self.values.size

    def total_mass(self) -> float:
        return float(self.values.sum())

    def row_slice(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.values[lo:hi]

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n))
        for i in range(self.n):
            cols, vals = self.row_slice(i)
            dense[i, cols] = vals
        return dense

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "AffinityMatrix":
        dense = np.asarray(dense, dtype=np.float64)
        n = dense.shape[0]
        if dense.shape != (n, n):
            raise ValueError("affinity matrix must be square")
        rows, cols = np.nonzero(dense)
        values = dense[rows, cols]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        return cls(n=n, indptr=indptr, indices=cols.astype(np.int64), values=values)

    def scaled(self, factor: float) -> "AffinityMatrix":
        return AffinityMatrix(self.n, self.indptr, self.indices, self.values * factor)

    def validate(self, tol: float = 1e-9) -> None:
        """Raises ``ValueError`` unless symmetric, hollow, non-negative,
        and of unit total mass."""
        if np.any(self.values < 0):
            raise ValueError("negative affinity")
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        if np.any(rows == self.indices):
            raise ValueError("nonzero diagonal entry")
        forward = np.lexsort((self.indices, rows))
        backward = np.lexsort((rows, self.indices))
        same_support = np.array_equal(
            np.stack([rows[forward], self.indices[forward]]),
            np.stack([self.indices[backward], rows[backward]]),
        )
        if not same_support or np.any(
            np.abs(self.values[forward] - self.values[backward]) > tol
        ):
            raise ValueError("matrix is not symmetric")
        if abs(self.total_mass() - 1.0) > tol:
            raise ValueError(f"total mass {self.total_mass()} != 1")


def symmetrize(conditionals: np.ndarray) -> AffinityMatrix:
    """Dense-input symmetrization: p_ij = (p_{j|i} + p_{i|j}) / (2N).

    Each input row must sum to 1 (within 1e-6) with a zero diagonal.
    """
    cond = np.asarray(conditionals, dtype=np.float64)
    n = cond.shape[0]
    if cond.shape != (n, n):
        raise ValueError("conditionals must be square")
    if np.any(np.abs(cond.sum(axis=1) - 1.0) > 1e-6):
        raise ValueError("every conditional row must sum to 1")
    joint = (cond + cond.T) / (2.0 * n)
    np.fill_diagonal(joint, 0.0)
    return AffinityMatrix.from_dense(joint)


def symmetrize_knn(
    neighbors: np.ndarray, rows: np.ndarray, n: int
) -> AffinityMatrix:
    """Sparse symmetrization of kNN conditionals (union of supports)."""
    k = neighbors.shape[1]
    src = np.repeat(np.arange(n, dtype=np.int64), k)
    dst = neighbors.reshape(-1).astype(np.int64)
    val = rows.reshape(-1) / (2.0 * n)
    # stack entries with their transposes, then coalesce duplicates
    all_r = np.concatenate([src, dst])
    all_c = np.concatenate([dst, src])
    all_v = np.concatenate([val, val])
    keys = all_r * n + all_c
    uniq, inverse = np.unique(keys, return_inverse=True)
    agg = np.zeros(uniq.size)
    np.add.at(agg, inverse, all_v)
    rows_out = (uniq // n).astype(np.int64)
    cols_out = (uniq % n).astype(np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows_out, minlength=n), out=indptr[1:])
    return AffinityMatrix(n=n, indptr=indptr, indices=cols_out, values=agg)
