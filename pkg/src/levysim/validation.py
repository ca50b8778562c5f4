"""Monte Carlo harness for the error identities, bounds and moment checks.

Every check returns :class:`McReport` rows carrying an estimate, its standard
error, a target and the tolerance rule used. All experiments are keyed by a
seed and split into fixed blocks (see :mod:`levysim.gaussian_source`), so the
numbers do not depend on the worker count.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr

from .covariance_struct import cond_cov_gram, sigma2_inf
from .error_model import l2_error_fs_exact, l2_error_ia_bound
from .errors import MatrixError, ParameterError
from .gaussian_source import StreamSpec, map_blocks, open_stream
from .levy_sim import (
    ITO,
    IncrementVector,
    IntegralMatrix,
    pair_identity_residual,
    simulate_many,
    tail2_arrays,
    tail_constants,
)
from .linalg_kron import n_pairs

# realizations per inner draw; bounds memory at roughly CHUNK_VALUES doubles
CHUNK_VALUES = 4_000_000


@dataclass
class McReport:
    statistic: str
    estimate: float
    std_error: float
    target: float
    rule: str
    passed: bool
    note: str = field(default="")

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.statistic}: estimate={self.estimate:.6g} "
                f"se={self.std_error:.3g} target={self.target:.6g} ({self.rule})")


def within_se(statistic, estimate, se, target, k=3.0, note=""):
    ok = abs(estimate - target) <= k * se
    return McReport(statistic, float(estimate), float(se), float(target), f"within {k:g} SE", bool(ok), note)


def below_bound(statistic, estimate, se, bound, k=3.0, note=""):
    ok = estimate <= bound + k * se
    return McReport(statistic, float(estimate), float(se), float(bound), f"<= target + {k:g} SE", bool(ok), note)


def absolute(statistic, estimate, target, tol, note=""):
    ok = abs(estimate - target) <= tol
    return McReport(statistic, float(estimate), 0.0, float(target), f"abs {tol:g}", bool(ok), note)


def mean_and_se(samples, axis=0):
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[axis]
    return samples.mean(axis=axis), samples.std(axis=axis, ddof=1) / math.sqrt(n)


def _rms_report(statistic, squares, target, k=3.0, note=""):
    """Compare sqrt(mean(squares)) to a target; SE by the delta method."""
    mse, se = mean_and_se(squares)
    rms = math.sqrt(mse)
    return within_se(statistic, rms, se / (2 * rms), target, k, note)


def _chunks(count, per_row):
    step = max(1, CHUNK_VALUES // max(per_row, 1))
    for start in range(0, count, step):
        yield min(step, count - start)


def _check_tail(n, K, N, min_N=1000):
    if n < 1:
        raise ParameterError("n must be >= 1")
    if K < 100 * n:
        raise ParameterError(f"tail cutoff K={K} must be >= 100 n = {100 * n}")
    if N < min_N:
        raise ParameterError(f"N={N} must be >= {min_N}")


def default_cutoff(n):
    return max(10_000, 100 * n)


def truncation_bias(n, K):
    """Relative bias alpha_K / alpha_n of a K-truncated tail second moment."""
    return tail_constants(K).alpha / tail_constants(n).alpha


# -- FS error: equality with the closed form ---------------------------------

def coupled_fs_error_grid(h, ns, K, N, seed, method="conditional"):
    """Coupled FS errors for several truncation levels sharing one set of draws.

    The FS error of an off-diagonal entry is the second tail term, sampled for
    the pair (1, 2) truncated at K. ``method="coefficients"`` draws all four
    coefficient arrays; ``"conditional"`` uses that, given X, the tail is
    N(0, (h/2pi)^2 sum_k k^-2 (X_1k^2 + X_2k^2)) and draws the chi-square(2)
    weights directly. Both have the same law.
    """
    ns = sorted(int(n) for n in ns)
    for n in ns:
        _check_tail(n, K, N)
    if method not in ("conditional", "coefficients"):
        raise ParameterError(f"unknown method {method!r}")
    n0 = ns[0]
    k = np.arange(n0 + 1, K + 1, dtype=float)
    scale = h / (2 * math.pi)

    def block(stream, count):
        out = []
        for rows in _chunks(count, 4 * k.size):
            if method == "conditional":
                chi = stream.chi2_2((rows, k.size))
                z = stream.normal((rows, 1))
                # tail sums of k^-2 chi over k > n for each n
                S = np.stack([chi[:, n - n0:] @ (1.0 / k[n - n0:] ** 2) for n in ns], axis=1)
                out.append(scale ** 2 * S * z ** 2)
            else:
                c = stream.normal((rows, k.size, 4))
                terms = (c[..., 0] * c[..., 3] - c[..., 1] * c[..., 2]) / k
                R = np.stack([terms[:, n - n0:].sum(axis=1) for n in ns], axis=1)
                out.append((scale * R) ** 2)
        return np.concatenate(out)

    squares = np.concatenate(map_blocks(block, seed, N))
    reports = []
    for col, n in enumerate(ns):
        target = l2_error_fs_exact(h, n)
        bias = truncation_bias(n, K)
        reports.append(_rms_report(f"fs_rms_error[h={h:g},n={n},K={K}]", squares[:, col], target,
                                   note=f"truncation bias (relative, mean square) <= {bias:.2e}"))
    return reports


def coupled_fs_error(h, n, K, N, seed, method="conditional"):
    return coupled_fs_error_grid(h, [n], K, N, seed, method)[0]


# -- IA error: coupled construction -----------------------------------------

class TailCoupling(NamedTuple):
    s1: np.ndarray  # sum_{k=n+1}^K X_k / k, shape (count, m)
    r2: np.ndarray  # second tail term, (count, M)
    psi2: np.ndarray  # coupled N(0, I_M) vector, (count, M)


def inv_sqrt_batch(S, rel_floor=1e-12):
    """Inverse symmetric square roots of a stack of SPD matrices."""
    lam, U = np.linalg.eigh(S)
    top = np.max(np.abs(lam), axis=-1, keepdims=True)
    if np.any(lam <= rel_floor * top):
        raise MatrixError("conditional covariance is singular within tolerance; increase K")
    return (U / np.sqrt(lam)[..., None, :]) @ U.swapaxes(-1, -2)


def coupled_tails(m, h, n, K, stream, count):
    """Draw X_k, Y_k for k = n+1..K and form the coupled tail quantities.

    Draw order per realization: (X_k, Y_k) interleaved by k. When K <= n the
    tails are empty and every returned quantity is zero.
    """
    M = n_pairs(m)
    L = max(K - n, 0)
    if L == 0 or M == 0:
        stream.normal((count, L, 2, m))
        zeros = np.zeros((count, M))
        return TailCoupling(np.zeros((count, m)), zeros, zeros.copy())
    k = np.arange(n + 1, K + 1, dtype=float)
    iu, ju = np.triu_indices(m, 1)
    s1, r2, psi2 = [], [], []
    for rows in _chunks(count, 2 * m * L):
        z = stream.normal((rows, L, 2, m))
        x, y = z[:, :, 0, :], z[:, :, 1, :]
        xk = x / k[:, None]
        s1.append(xk.sum(axis=1))
        C = xk.swapaxes(1, 2) @ y
        R = h / (2 * math.pi) * (C[:, iu, ju] - C[:, ju, iu])
        Q = (x / k[:, None] ** 2).swapaxes(1, 2) @ x
        sigma = h ** 2 / (4 * math.pi ** 2) * cond_cov_gram(Q)
        psi = np.einsum("brs,bs->br", inv_sqrt_batch(sigma), R)
        r2.append(R)
        psi2.append(psi)
    return TailCoupling(np.concatenate(s1), np.concatenate(r2), np.concatenate(psi2))


def ia_tail_error(m, h, n, coupling):
    """Pathwise IA error vector R2 - (Sigma^{2,inf})^{1/2} Psi2."""
    return coupling.r2 - tail2_arrays(h, m, n, coupling.psi2)


class IaErrorResult(NamedTuple):
    max_entry: McReport
    frobenius: McReport
    per_entry_rms: np.ndarray


def coupled_ia_error(m, h, n, K, N, seed):
    """Coupled IA error against the exact-tail-ratio L^2 bounds."""
    if m < 2:
        raise ParameterError("need m >= 2")
    _check_tail(n, K, N)

    def block(stream, count):
        return ia_tail_error(m, h, n, coupled_tails(m, h, n, K, stream, count))

    err = np.concatenate(map_blocks(block, seed, N))
    bound = l2_error_ia_bound(h, n, m)
    sq = err ** 2
    mse, se = mean_and_se(sq)
    r = int(np.argmax(mse))
    rms = math.sqrt(mse[r])
    note = f"truncation bias (relative) <= {truncation_bias(n, K):.2e}"
    max_rep = below_bound(f"ia_max_entry_rms[m={m},h={h:g},n={n}]", rms, se[r] / (2 * rms),
                          bound.max_entry, note=note)
    # both I(i,j) and I(j,i) carry the same error up to sign
    frob_sq = 2.0 * sq.sum(axis=1)
    fmse, fse = mean_and_se(frob_sq)
    frms = math.sqrt(fmse)
    frob_rep = below_bound(f"ia_frobenius_rms[m={m},h={h:g},n={n}]", frms, fse / (2 * frms),
                           bound.frobenius, note=note)
    return IaErrorResult(max_rep, frob_rep, np.sqrt(mse))


# -- conditional covariance statistics --------------------------------------

def sigma2_stats(m, h, n, K, N, seed, row=0):
    """MC check of E||Sigma2 - Sigma2inf||_F^2 and of one row sum of squares."""
    if m < 2:
        raise ParameterError("need m >= 2")
    if K < 100 * n or n < 1 or N < 100:
        raise ParameterError("need n >= 1, K >= 100 n, N >= 100")
    M = n_pairs(m)
    L = K - n
    k = np.arange(n + 1, K + 1, dtype=float)
    scale = sigma2_inf(h, n, m)
    c = h ** 2 / (4 * math.pi ** 2)

    def block(stream, count):
        frob, rows_ = [], []
        for rows in _chunks(count, m * L):
            x = stream.normal((rows, L, m))
            Q = (x / k[:, None] ** 2).swapaxes(1, 2) @ x
            D = c * cond_cov_gram(Q) - scale * np.eye(M)
            frob.append(np.sum(D ** 2, axis=(1, 2)))
            rows_.append(np.sum(D[:, row, :] ** 2, axis=1))
        return np.concatenate(frob), np.concatenate(rows_)

    parts = map_blocks(block, seed, N)
    frob = np.concatenate([p[0] for p in parts])
    rowsum = np.concatenate([p[1] for p in parts])
    beta = tail_constants(n).beta
    t_frob = h ** 4 * m ** 2 * (m - 1) / (16 * math.pi ** 4) * beta
    t_row = h ** 4 * m / (8 * math.pi ** 4) * beta
    e1, s1 = mean_and_se(frob)
    e2, s2 = mean_and_se(rowsum)
    return (within_se(f"sigma2_frobenius_sq[m={m},h={h:g},n={n}]", e1, s1, t_frob, 5.0),
            within_se(f"sigma2_row_sq[m={m},h={h:g},n={n},row={row + 1}]", e2, s2, t_row, 5.0))


def simultaneous_k(d, k=3.0):
    """SE multiple giving d independent checks the family-wise level of one k-SE check."""
    from scipy.special import ndtri

    single = 2.0 * (1.0 - ndtr(k))
    per = 1.0 - (1.0 - single) ** (1.0 / d)
    return float(ndtri(1.0 - per / 2.0))


def cond_cov_mean_check(m, N, seed):
    """Entrywise MC mean of cond_cov(x) for standard-normal x against 2 I_M.

    Every non-constant entry is compared at once; the SE multiple is widened
    from 3 so the whole matrix has the false-alarm rate of a single 3-SE
    check (the entries are functions of 2M distinct quantities for m >= 3).
    """
    M = n_pairs(m)
    x = open_stream(StreamSpec(seed, 0)).normal((N, m))
    S = cond_cov_gram(x[:, :, None] * x[:, None, :])
    mean, se = mean_and_se(S.reshape(N, M * M))
    target = (2.0 * np.eye(M)).ravel()
    live = se > 0
    if np.any(~live & (mean != target)):
        return McReport(f"cond_cov_mean[m={m}]", float("nan"), 0.0, 0.0, "structural zeros", False)
    z = np.zeros_like(mean)
    z[live] = np.abs(mean[live] - target[live]) / se[live]
    worst = int(np.argmax(z))
    k = simultaneous_k(1 if m == 2 else 2 * M)
    return within_se(f"cond_cov_mean[m={m}] worst entry {divmod(worst, M)}",
                     mean[worst], se[worst], target[worst], round(k, 3),
                     note=f"max |z| = {z.max():.2f} over {int(live.sum())} random entries")


# -- square-root Lipschitz inequalities --------------------------------------

def _random_orthogonal(stream, q):
    Z = stream.normal((q, q))
    Qm, R = np.linalg.qr(Z)
    return Qm * np.sign(np.diag(R))


def sqrt_lipschitz_check(q, trials, seed, slack=1e-10):
    """Randomized test of the three square-root difference inequalities."""
    if q < 1:
        raise ParameterError("q must be >= 1")
    stream = open_stream(StreamSpec(seed, 0))
    violations = 0
    worst = 0.0
    for _ in range(trials):
        U = _random_orthogonal(stream, q)
        lam_a = ndtr(stream.normal(q))  # uniform on (0, 1), PSD
        lam_b = 0.05 + ndtr(stream.normal(q))  # uniform on (0.05, 1.05), PD
        C = stream.normal((q, q))
        A = (U * lam_a) @ U.T
        B = (U * lam_b) @ U.T
        D_root = (U * (np.sqrt(lam_a) - np.sqrt(lam_b))) @ U.T
        inv = 1.0 / math.sqrt(lam_b.min())
        lhs_mat = C @ D_root
        diff = C @ (A - B)
        checks = (
            (np.linalg.norm(lhs_mat, 2), inv * np.linalg.norm(diff, 2)),
            (np.linalg.norm(lhs_mat, 2), inv * np.linalg.norm(diff, "fro")),
            (np.linalg.norm(lhs_mat, "fro"), inv * np.linalg.norm(diff, "fro")),
        )
        for lhs, rhs in checks:
            worst = max(worst, lhs / rhs if rhs > 0 else 0.0)
            if lhs > rhs + slack * (1.0 + rhs):
                violations += 1
    return McReport(f"sqrt_lipschitz_violations[q={q},trials={trials}]", float(violations), 0.0, 0.0,
                    f"exact count, slack {slack:g}", violations == 0, note=f"max lhs/rhs = {worst:.4f}")


# -- fine-grid path oracle --------------------------------------------------

def path_oracle_batch(m, h, fine_steps, stream, count):
    """Left-point Itô sums on a uniform fine grid; returns ``(dw, I)``."""
    if fine_steps < 1 or not h > 0:
        raise ParameterError("need fine_steps >= 1 and h > 0")
    dws, Is = [], []
    for rows in _chunks(count, fine_steps * m):
        d = math.sqrt(h / fine_steps) * stream.normal((rows, fine_steps, m))
        w_left = np.cumsum(d, axis=1) - d
        I = w_left.swapaxes(1, 2) @ d
        dw = d.sum(axis=1)
        idx = np.arange(m)
        I[:, idx, idx] = 0.5 * (dw * dw - h)
        dws.append(dw)
        Is.append(I)
    return np.concatenate(dws), np.concatenate(Is)


def path_oracle(m, h, fine_steps, stream):
    if fine_steps < 1000:
        raise ParameterError("path_oracle needs fine_steps >= 1000")
    dw, I = path_oracle_batch(m, h, fine_steps, stream, 1)
    return IncrementVector(h, dw[0]), IntegralMatrix(h, ITO, I[0])


def oracle_moments(h, fine_steps, N, seed):
    """Second-moment checks of the path oracle for m = 2."""
    parts = map_blocks(lambda s, c: path_oracle_batch(2, h, fine_steps, s, c), seed, N)
    I = np.concatenate([p[1] for p in parts])
    disc = h * h / fine_steps  # left-point sums are biased by O(h^2 / fine_steps)
    i12, i21 = I[:, 0, 1], I[:, 1, 0]
    area = 0.5 * (i12 - i21)
    out = []
    for name, samples, target in (("E[I12^2]", i12 ** 2, h * h / 2),
                                  ("E[I12*I21]", i12 * i21, 0.0),
                                  ("Var(A12)", area ** 2, h * h / 4)):
        est, se = mean_and_se(samples)
        out.append(McReport(f"path_oracle {name}", est, se, target, f"within 3 SE + {disc:.1e}",
                            bool(abs(est - target) <= 3 * se + disc)))
    return out


# -- moments of simulated matrices ------------------------------------------

def moment_suite(algo, m, h, n, N, seed):
    """Means, second moments, cross-covariances and the pair identity."""
    dw, I = simulate_many(m, h, n, N, seed, algo)
    reports = []
    for i in range(m):
        for j in range(m):
            est, se = mean_and_se(I[:, i, j])
            reports.append(within_se(f"{algo} mean I({i + 1},{j + 1})", est, se, 0.0))
    alpha = tail_constants(n).alpha
    second = h * h / 2 if algo == "ia" else h * h / 2 - h * h / (2 * math.pi ** 2) * alpha
    for i in range(m):
        for j in range(m):
            if i != j:
                est, se = mean_and_se(I[:, i, j] ** 2)
                reports.append(within_se(f"{algo} E[I({i + 1},{j + 1})^2]", est, se, second))
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    for a in range(len(pairs)):
        for b in range(a + 1, len(pairs)):
            (i, j), (k, l) = pairs[a], pairs[b]
            x, y = I[:, i, j], I[:, k, l]
            prod = (x - x.mean()) * (y - y.mean())
            est, se = mean_and_se(prod)
            reports.append(within_se(f"{algo} Cov(I({i + 1},{j + 1}),I({k + 1},{l + 1}))", est, se, 0.0))
    reports.append(identity_report(dw, I, h, f"{algo} pair identity residual"))
    return reports


def identity_report(dw, I, h, statistic, max_ulps=4.0):
    """Largest identity residual, in ulps of the largest |dW^i dW^j|."""
    resid = np.abs(pair_identity_residual(dw, I, h, ITO)).max() if I.size else 0.0
    prods = np.abs(dw[:, :, None] * dw[:, None, :]).max() if dw.size else 0.0
    ulps = resid / np.spacing(prods) if prods > 0 else 0.0
    return McReport(statistic, float(ulps), 0.0, 0.0, f"<= {max_ulps:g} ulps", bool(ulps <= max_ulps),
                    note=f"max residual {resid:.3e}, max |product| {prods:.3e}")


def fit_slope(xs, ys):
    """Least-squares slope of log(ys) against log(xs)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 3 or xs.shape != ys.shape:
        raise ParameterError("need at least 3 matching points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ParameterError("slope fit needs positive inputs")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
