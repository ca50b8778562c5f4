"""Index-level vec/mat, Kronecker, commutation and selection operations.

All matrices are plain 2-D numpy arrays; ``vec`` stacks columns (Fortran
order). The commutation matrix P_m and the selection matrix H_m are never
formed densely, only their action on vectors.
"""
from functools import lru_cache

import numpy as np

from .errors import DimensionError, MatrixError, PairIndexError


def n_pairs(m):
    """Number of strictly upper pairs, M = m(m-1)/2."""
    return m * (m - 1) // 2


def vec_of(B):
    """Column-major flattening of a matrix."""
    B = np.asarray(B, dtype=float)
    if B.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={B.ndim}")
    return B.ravel(order="F").copy()


def mat_of(v, rows, cols):
    """Inverse of :func:`vec_of`."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size != rows * cols:
        raise DimensionError(f"cannot reshape length {v.size} into {rows}x{cols}")
    return v.reshape((rows, cols), order="F").copy()


def kron(B, C):
    """Kronecker product with the standard block layout (b_ij * C)."""
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    p, q = B.shape
    r, s = C.shape
    return (B[:, None, :, None] * C[None, :, None, :]).reshape(p * r, q * s)


def kron_vec(u, w):
    """u ⊗ w for two vectors, returned as a flat vector."""
    u = np.asarray(u, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    return (u[:, None] * w[None, :]).ravel()


def _check_square_len(v, m):
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != m * m:
        raise DimensionError(f"expected trailing length m^2={m * m}, got {v.shape[-1]}")
    return v


def apply_commutation(v, m):
    """Return P_m v, i.e. vec(B^T) when v = vec(B).

    Works on a trailing axis of length m^2, so stacks of vectors are fine.
    """
    v = _check_square_len(v, m)
    lead = v.shape[:-1]
    # vec index (col*m + row) -> swap the two factors
    return v.reshape(lead + (m, m)).swapaxes(-1, -2).reshape(lead + (m * m,)).copy()


@lru_cache(maxsize=None)
def lower_positions(m):
    """0-based vec positions of the strictly lower triangle, in vec order."""
    idx = [col * m + row for col in range(m) for row in range(col + 1, m)]
    return np.array(idx, dtype=np.intp)


def select_lower(v, m):
    """H_m v: the M lower-triangle entries of mat(v) in vec order."""
    v = _check_square_len(v, m)
    return v[..., lower_positions(m)].copy()


def embed_antisym(a, m):
    """(I - P_m) H_m^T a; mat of the result is antisymmetric."""
    a = np.asarray(a, dtype=float)
    M = n_pairs(m)
    if a.shape[-1] != M:
        raise DimensionError(f"expected trailing length M={M}, got {a.shape[-1]}")
    w = np.zeros(a.shape[:-1] + (m * m,))
    w[..., lower_positions(m)] = a
    return w - apply_commutation(w, m)


def pair_to_index(i, j, m):
    """1-based linear index r of the pair (i, j), 1 <= i < j <= m."""
    if not (1 <= i < j <= m):
        raise PairIndexError(f"invalid pair ({i}, {j}) for m={m}")
    return (i - 1) * m + j - i * (i + 1) // 2


def index_to_pair(r, m):
    """Inverse of :func:`pair_to_index`."""
    M = n_pairs(m)
    if not (1 <= r <= M):
        raise PairIndexError(f"pair index {r} out of range 1..{M}")
    i = 1
    # rows hold m - i pairs each
    while r > m - i:
        r -= m - i
        i += 1
    return i, i + r


def sym_psd_sqrt(S, sym_tol=1e-10, neg_tol=1e-10):
    """Symmetric PSD square root via eigendecomposition.

    Accepts a single matrix or a stack ``(..., q, q)``. Eigenvalues slightly
    below zero (no lower than ``-neg_tol * ||S||_2``) are clamped to zero.

    Raises:
        MatrixError: if S is asymmetric beyond ``sym_tol`` (relative to its
            largest entry) or has an eigenvalue below the clamp floor.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim < 2 or S.shape[-1] != S.shape[-2]:
        raise DimensionError(f"expected square matrices, got shape {S.shape}")
    scale = np.max(np.abs(S), axis=(-1, -2), keepdims=True)
    scale = np.where(scale > 0, scale, 1.0)
    if np.any(np.abs(S - S.swapaxes(-1, -2)) > sym_tol * scale):
        raise MatrixError("matrix is not symmetric within tolerance")
    lam, U = np.linalg.eigh(0.5 * (S + S.swapaxes(-1, -2)))
    norm2 = np.max(np.abs(lam), axis=-1, keepdims=True)
    if np.any(lam < -neg_tol * norm2):
        raise MatrixError(f"matrix is indefinite: min eigenvalue {lam.min():.3e}")
    root = np.sqrt(np.clip(lam, 0.0, None))
    return (U * root[..., None, :]) @ U.swapaxes(-1, -2)
