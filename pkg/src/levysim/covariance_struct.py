"""Conditional covariance of the second tail term.

Three constructions of H_m Sigma(x) H_m^T are provided: the factorisation
G G^T with G = H_m (x ⊗ I_m - I_m ⊗ x), the explicit block layout, and a
Gram-matrix form that is linear in x x^T (so a weighted sum over k only needs
Q = sum_k w_k x_k x_k^T). The first two exist as mutual oracles.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .levy_sim import tail_constants
from .linalg_kron import kron_vec, n_pairs, select_lower


@dataclass(frozen=True)
class CondCov:
    m: int
    matrix: np.ndarray


def _as_x(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise DimensionError("x must be a vector of length m >= 2")
    return x


def cond_cov_factor(x):
    """The M x m factor G = H_m (x ⊗ I_m - I_m ⊗ x), built column by column."""
    x = _as_x(x)
    m = x.size
    G = np.empty((n_pairs(m), m))
    eye = np.eye(m)
    for col in range(m):
        G[:, col] = select_lower(kron_vec(x, eye[col]) - kron_vec(eye[col], x), m)
    return G


def cond_cov_direct(x):
    G = cond_cov_factor(x)
    return CondCov(G.shape[1], G @ G.T)


def cond_cov_blocks(x):
    """Assemble from the diagonal blocks B_{l,l} and off-diagonal blocks B_{r,s}."""
    x = _as_x(x)
    m = x.size
    M = n_pairs(m)
    out = np.zeros((M, M))
    # first row of block l (1-based) sits at offset sum_{t<l} (m - t)
    offsets = np.concatenate(([0], np.cumsum(np.arange(m - 1, 0, -1))))
    for l in range(m - 1):  # 0-based block index, pairs (l, l+1..m-1)
        o = offsets[l]
        tail = x[l + 1:]
        blk = np.outer(tail, tail)
        np.fill_diagonal(blk, x[l] ** 2 + tail ** 2)
        out[o:o + m - 1 - l, o:o + m - 1 - l] = blk
    for r in range(m - 1):
        for s in range(r + 1, m - 1):
            rows, cols = m - 1 - r, m - 1 - s
            blk = np.zeros((rows, cols))
            # rows r+1..m-1 of block r; row for partner s is the -b_{r,s} row
            lead = s - r - 1
            blk[lead, :] = -x[r] * x[s + 1:]
            blk[lead + 1:, :] = np.eye(cols) * (x[r] * x[s])
            o_r, o_s = offsets[r], offsets[s]
            out[o_r:o_r + rows, o_s:o_s + cols] = blk
            out[o_s:o_s + cols, o_r:o_r + rows] = blk.T
    return CondCov(m, out)


def cond_cov_gram(Q):
    """H_m Sigma H_m^T evaluated with x x^T replaced by a Gram matrix Q.

    Entry ((i,j),(k,l)) = Q_ik d_jl - Q_il d_jk - Q_jk d_il + Q_jl d_ik.
    ``Q`` may carry leading batch axes.
    """
    Q = np.asarray(Q, dtype=float)
    m = Q.shape[-1]
    iu, ju = np.triu_indices(m, 1)
    eye = np.eye(m)
    i, j = iu[:, None], ju[:, None]
    k, l = iu[None, :], ju[None, :]
    return (Q[..., i, k] * eye[j, l] - Q[..., i, l] * eye[j, k]
            - Q[..., j, k] * eye[i, l] + Q[..., j, l] * eye[i, k])


def sigma2_truncated(h, n, K, xs):
    """(h^2 / 4 pi^2) sum_{k=n+1}^{K} k^-2 cond_cov(x_k); ``xs`` is (K-n, m)."""
    if n < 1 or K < n:
        raise ParameterError(f"need K >= n >= 1, got n={n}, K={K}")
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[0] != K - n:
        raise DimensionError(f"xs must have shape (K-n, m) = ({K - n}, m)")
    m = xs.shape[1]
    w = 1.0 / np.arange(n + 1, K + 1, dtype=float) ** 2
    Q = (xs * w[:, None]).T @ xs
    return CondCov(m, h ** 2 / (4 * math.pi ** 2) * cond_cov_gram(Q))


def sigma2_inf(h, n, m=None):
    """Scale c with Sigma^{2,inf} = c I_M."""
    if not h > 0 or n < 1:
        raise ParameterError("need h > 0 and n >= 1")
    return h ** 2 / (2 * math.pi ** 2) * tail_constants(n).alpha
