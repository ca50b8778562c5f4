"""Lévy areas and twofold iterated integrals: the IA and FS algorithms.

Array conventions: batch axes lead, so ``dw`` is ``(..., m)``, Fourier
coefficients are ``(..., n, m)`` (row k-1 holds X_k), Lévy vectors are
``(..., M)`` in pair order (1,2), (1,3), ..., (m-1,m), and integral matrices
are ``(..., m, m)``.

Per realization the simulators consume normals in this order::

    V (m) | X_1 (m), Y_1 (m), ..., X_n (m), Y_n (m) | Psi1 (m) | Psi2 (M, IA only)

so a batch of ``count`` realizations is one ``(count, D)`` draw in C order.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, ParameterError
from .linalg_kron import n_pairs

ITO = "ito"
STRATONOVICH = "strat"
_CALCULI = (ITO, STRATONOVICH)

BASEL2 = math.pi ** 2 / 6.0
BASEL4 = math.pi ** 4 / 90.0


@dataclass(frozen=True)
class IncrementVector:
    h: float
    dw: np.ndarray

    @property
    def m(self):
        return self.dw.shape[-1]


@dataclass(frozen=True)
class CoefficientBlock:
    """Standard-normal Fourier coefficients; ``x`` and ``y`` are m x n."""

    x: np.ndarray
    y: np.ndarray

    @property
    def n(self):
        return self.x.shape[1]

    @property
    def m(self):
        return self.x.shape[0]


@dataclass(frozen=True)
class LevyVector:
    m: int
    a: np.ndarray


@dataclass(frozen=True)
class IntegralMatrix:
    h: float
    calculus: str
    values: np.ndarray

    @property
    def m(self):
        return self.values.shape[-1]


@dataclass(frozen=True)
class TailConstants:
    alpha: float  # sum_{k>n} k^-2
    beta: float  # sum_{k>n} k^-4


@lru_cache(maxsize=4096)
def tail_constants(n):
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    k = np.arange(n, 0, -1, dtype=float)
    s2 = float(np.sum(1.0 / k ** 2)) if n else 0.0
    s4 = float(np.sum(1.0 / k ** 4)) if n else 0.0
    return TailConstants(max(BASEL2 - s2, 0.0), max(BASEL4 - s4, 0.0))


def draws_per_realization(m, n, algo="ia"):
    """Normal draws consumed by one realization of ``simulate_ia``/``simulate_fs``."""
    base = 2 * m * (n + 1)
    return base + n_pairs(m) if algo == "ia" else base


def _pair_idx(m):
    return np.triu_indices(m, 1)


def _check_params(m, h, n):
    if int(m) != m or m < 1:
        raise ParameterError(f"m must be a positive integer, got {m}")
    if not h > 0 or not math.isfinite(h):
        raise ParameterError(f"h must be positive, got {h}")
    if int(n) != n or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")


# -- array kernels ----------------------------------------------------------

def area_truncated_arrays(dw, x, y, h):
    """Truncated Lévy area, step-2 form.

    ``x``, ``y`` have shape ``(..., n, m)``. The shifted factor
    ``Y_k - sqrt(2/h) dW`` is formed once per (j, k).
    """
    dw = np.asarray(dw, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = x.shape[-2:]
    if y.shape != x.shape or dw.shape[-1] != m:
        raise DimensionError("coefficient arrays do not match the increment dimension")
    if m < 2:
        return np.zeros(dw.shape[:-1] + (0,))
    inv_k = 1.0 / np.arange(1, n + 1, dtype=float)
    shifted = y - math.sqrt(2.0 / h) * dw[..., None, :]
    # C[i, j] = sum_k X_{i,k} (Y_{j,k} - sqrt(2/h) dW^j) / k
    C = np.matmul((x * inv_k[:, None]).swapaxes(-1, -2), shifted)
    iu, ju = _pair_idx(m)
    return (h / (2.0 * math.pi)) * (C[..., iu, ju] - C[..., ju, iu])


def tail1_arrays(dw, h, n, psi1):
    """Exact first tail term given Psi1 ~ N(0, I_m)."""
    dw = np.asarray(dw, dtype=float)
    psi1 = np.asarray(psi1, dtype=float)
    if psi1.shape[-1] != dw.shape[-1]:
        raise DimensionError("psi1 must have length m")
    m = dw.shape[-1]
    iu, ju = _pair_idx(m)
    coef = math.sqrt(h) / (math.sqrt(2.0) * math.pi) * math.sqrt(tail_constants(n).alpha)
    return coef * (dw[..., iu] * psi1[..., ju] - dw[..., ju] * psi1[..., iu])


def tail2_arrays(h, m, n, psi2):
    """Diagonal-covariance surrogate for the second tail term."""
    psi2 = np.asarray(psi2, dtype=float)
    if psi2.shape[-1] != n_pairs(m):
        raise DimensionError(f"psi2 must have length M={n_pairs(m)}")
    return h / (math.sqrt(2.0) * math.pi) * math.sqrt(tail_constants(n).alpha) * psi2


def assemble_arrays(dw, area, h, calculus=ITO):
    """Build the m x m integral matrix from increments and total Lévy area."""
    if calculus not in _CALCULI:
        raise ParameterError(f"unknown calculus {calculus!r}")
    dw = np.asarray(dw, dtype=float)
    area = np.asarray(area, dtype=float)
    m = dw.shape[-1]
    if area.shape[-1] != n_pairs(m):
        raise DimensionError(f"area must have length M={n_pairs(m)}")
    out = np.empty(dw.shape[:-1] + (m, m))
    iu, ju = _pair_idx(m)
    half = 0.5 * (dw[..., iu] * dw[..., ju])
    out[..., iu, ju] = half + area
    out[..., ju, iu] = half - area
    d = np.arange(m)
    out[..., d, d] = 0.5 * (dw * dw - h)
    if calculus == STRATONOVICH:
        out[..., d, d] += 0.5 * h
    return out


def pair_identity_residual(dw, values, h, calculus=ITO):
    """``I(i,j) + I(j,i) - (dW^i dW^j - h 1{i=j})`` for every ordered pair."""
    dw = np.asarray(dw, dtype=float)
    prod = dw[..., :, None] * dw[..., None, :]
    if calculus == ITO:
        prod = prod - h * np.eye(dw.shape[-1])
    return values + values.swapaxes(-1, -2) - prod


def simulate_batch(m, h, n, stream, count, algo="ia"):
    """Simulate ``count`` realizations; returns ``(dw, I)`` with Itô matrices.

    ``algo`` is ``"ia"`` (tail surrogate included) or ``"fs"``.
    """
    _check_params(m, h, n)
    if algo not in ("ia", "fs"):
        raise ParameterError(f"unknown algorithm {algo!r}")
    D = draws_per_realization(m, n, algo)
    z = stream.normal((count, D))
    dw = math.sqrt(h) * z[:, :m]
    if m == 1:
        return dw, assemble_arrays(dw, np.zeros((count, 0)), h)
    xy = z[:, m:m + 2 * m * n].reshape(count, n, 2, m)
    area = area_truncated_arrays(dw, xy[:, :, 0, :], xy[:, :, 1, :], h)
    off = m + 2 * m * n
    area += tail1_arrays(dw, h, n, z[:, off:off + m])
    if algo == "ia":
        area += tail2_arrays(h, m, n, z[:, off + m:])
    return dw, assemble_arrays(dw, area, h)


# -- single-realization API -------------------------------------------------

def truncated_area(inc, coeffs):
    if coeffs.m != inc.m:
        raise DimensionError("coefficient block dimension does not match increments")
    a = area_truncated_arrays(inc.dw, coeffs.x.T, coeffs.y.T, inc.h)
    return LevyVector(inc.m, a)


def tail1(inc, n, psi1):
    if n < 1:
        raise ParameterError("n must be >= 1")
    return LevyVector(inc.m, tail1_arrays(inc.dw, inc.h, n, psi1))


def tail2(h, m, n, psi2):
    if n < 1:
        raise ParameterError("n must be >= 1")
    return LevyVector(m, tail2_arrays(h, m, n, psi2))


def assemble(inc, area_total, calculus=ITO):
    a = area_total.a if isinstance(area_total, LevyVector) else area_total
    return IntegralMatrix(inc.h, calculus, assemble_arrays(inc.dw, a, inc.h, calculus))


def _simulate_one(m, h, n, stream, algo):
    dw, values = simulate_batch(m, h, n, stream, 1, algo)
    return IncrementVector(h, dw[0]), IntegralMatrix(h, ITO, values[0])


def simulate_ia(m, h, n, stream):
    return _simulate_one(m, h, n, stream, "ia")


def simulate_fs(m, h, n, stream):
    return _simulate_one(m, h, n, stream, "fs")


def convert(matrix, target):
    """Switch between Itô and Stratonovich by shifting the diagonal by h/2."""
    if target not in _CALCULI:
        raise ParameterError(f"unknown calculus {target!r}")
    if target == matrix.calculus:
        return matrix
    values = matrix.values.copy()
    d = np.arange(matrix.m)
    shift = 0.5 * matrix.h if target == STRATONOVICH else -0.5 * matrix.h
    values[..., d, d] += shift
    return IntegralMatrix(matrix.h, target, values)


def simulate_many(m, h, n, N, seed, algo="ia"):
    """``N`` realizations keyed by ``seed``; block b uses stream id b."""
    from .gaussian_source import map_blocks

    _check_params(m, h, n)
    parts = map_blocks(lambda stream, count: simulate_batch(m, h, n, stream, count, algo), seed, N)
    if not parts:
        return np.zeros((0, m)), np.zeros((0, m, m))
    return (np.concatenate([p[0] for p in parts]),
            np.concatenate([p[1] for p in parts]))
