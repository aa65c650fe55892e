"""KL objective and its gradient, exact and Barnes-Hut approximated.

Low-dimensional similarities are Student-t with one degree of freedom:
w_ij = 1 / (1 + ||y_i - y_j||^2), q_ij = w_ij / Z, Z = sum_{k != l} w_kl.
The cost is C = KL(P || Q), whose gradient splits into an attractive
term over the sparse affinities and a dense repulsive term,

    dC/dy_i = 4 [ sum_j p_ij w_ij (y_i - y_j)
                  - (1/Z) sum_j w_ij^2 (y_i - y_j) ].

``gradient_exact`` evaluates both terms with full O(N^2) tables and is
the testing oracle; ``gradient_bh`` keeps the attractive term exact and
approximates the repulsive term with a quadtree. At theta = 0 the tree
traversal degenerates to the exact pairwise sum.
"""

from __future__ import annotations

import numpy as np

from .affinity import AffinityMatrix, pairwise_sq_distances
from .quadtree import build_quadtree


def _dense_p(P: AffinityMatrix | np.ndarray) -> np.ndarray:
    if isinstance(P, AffinityMatrix):
        return P.to_dense()
    return np.asarray(P, dtype=np.float64)


def student_weights(Y: np.ndarray) -> np.ndarray:
    """Unnormalized Student-t similarities with a zero diagonal."""
    W = 1.0 / (1.0 + pairwise_sq_distances(Y))
    np.fill_diagonal(W, 0.0)
    return W


def kl_divergence(P: AffinityMatrix | np.ndarray, Y: np.ndarray) -> float:
    """KL(P || Q) summed over the nonzero affinities.

    Z is computed exactly; memory stays O(N) by accumulating W row-wise.
    """
    Y = np.asarray(Y, dtype=np.float64)
    n = Y.shape[0]
    sq = np.sum(Y * Y, axis=1)
    z = 0.0
    block = 1024
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        d2 = sq[lo:hi, None] + sq[None, :] - 2.0 * (Y[lo:hi] @ Y.T)
        np.maximum(d2, 0.0, out=d2)
        w = 1.0 / (1.0 + d2)
        z += w.sum() - (hi - lo)  # drop the self terms (w_ii = 1)

    if isinstance(P, AffinityMatrix):
        rows = np.repeat(np.arange(P.n), np.diff(P.indptr))
        cols = P.indices
        vals = P.values
    else:
        rows, cols = np.nonzero(P)
        vals = np.asarray(P)[rows, cols]
    d2 = np.sum((Y[rows] - Y[cols]) ** 2, axis=1)
    q = (1.0 / (1.0 + d2)) / z
    nz = vals > 0
    return float(np.sum(vals[nz] * np.log(vals[nz] / q[nz])))


def gradient_exact(P: AffinityMatrix | np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Dense O(N^2) gradient of KL(P || Q) with respect to Y."""
    Y = np.asarray(Y, dtype=np.float64)
    Pd = _dense_p(P)
    W = student_weights(Y)
    Z = W.sum()
    Q = W / Z
    coef = (Pd - Q) * W  # (p_ij - q_ij) w_ij
    grad = 4.0 * (coef.sum(axis=1)[:, None] * Y - coef @ Y)
    return grad


def attractive_forces(P: AffinityMatrix, Y: np.ndarray) -> np.ndarray:
    """Exact attractive term sum_j p_ij w_ij (y_i - y_j) over sparse P."""
    n = P.n
    rows = np.repeat(np.arange(n), np.diff(P.indptr))
    cols = P.indices
    diff = Y[rows] - Y[cols]
    w = 1.0 / (1.0 + np.sum(diff * diff, axis=1))
    coef = P.values * w
    attr = np.empty_like(Y)
    attr[:, 0] = np.bincount(rows, weights=coef * diff[:, 0], minlength=n)
    attr[:, 1] = np.bincount(rows, weights=coef * diff[:, 1], minlength=n)
    return attr


def gradient_bh(
    P: AffinityMatrix, Y: np.ndarray, theta: float
) -> np.ndarray:
    """Barnes-Hut gradient: exact attraction, tree-approximated repulsion.

    A tree node of c points at center-of-mass m is admitted for point i
    when node_width / ||y_i - m|| < theta, contributing c w^2 (y_i - m)
    to the repulsive numerator and c w to Z.
    """
    if theta < 0:
        raise ValueError("theta must be >= 0")
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    tree = build_quadtree(Y)
    rep, z = tree.repulsion(theta)
    attr = attractive_forces(P, Y)
    return 4.0 * (attr - rep / z)
