"""Closed-form error values, bounds, truncation levels and cost counts."""
import math
from dataclasses import dataclass

from scipy import integrate

from .errors import ParameterError
from .levy_sim import tail_constants


def gamma_fn(x):
    """Gamma function on [0.25, 60]."""
    if not 0.25 <= x <= 60:
        raise ParameterError(f"gamma_fn supports x in [0.25, 60], got {x}")
    return math.gamma(x)


def gauss_abs_moment(p, sigma):
    """E|Z|^p for Z ~ N(0, sigma^2)."""
    if p < 1 or not sigma > 0:
        raise ParameterError("need p >= 1 and sigma > 0")
    return (math.sqrt(2.0) * sigma) ** p / math.sqrt(math.pi) * gamma_fn((p + 1) / 2)


def chi2_abs_moment(p, c):
    """E|X^2 + Y^2 - c|^p for independent standard normals X, Y."""
    if not p > -1:
        raise ParameterError(f"need p > -1, got {p}")
    if c == 0:
        tail = 0.0
    else:
        tail, _ = integrate.quad(lambda t: abs(t) ** p * math.exp(t), 0.0, c / 2.0,
                                 epsabs=0.0, epsrel=1e-12, limit=200)
    return 2.0 ** p * math.exp(-c / 2.0) * (math.gamma(p + 1) + tail)


def c_mp(m, p):
    """The L^p constant c_{m,p}, defined for m >= 2 and p > 2."""
    if m < 2:
        raise ParameterError("c_mp needs m >= 2")
    if not p > 2:
        raise ParameterError("c_mp is defined for p > 2; p = 2 uses hat_c directly")
    g = gamma_fn((p + 1) / 2)
    first = math.exp(-2.0 / p) * (gamma_fn(p + 1) + math.e / (p + 1)) ** (2.0 / p)
    second = (2 * m - 4) / math.pi ** (2.0 / p) * g ** (4.0 / p)
    return g ** (1.0 / p) * math.sqrt(first + second)


def hat_c(m, p):
    if m < 2 or p < 2:
        raise ParameterError("hat_c needs m >= 2 and p >= 2")
    if p == 2:
        return math.sqrt(m) / (math.sqrt(12.0) * math.pi)
    return c_mp(m, p) * math.sqrt(p - 1) / (math.sqrt(3.0) * math.pi ** ((2 * p + 1) / (2 * p)))


def _check_h_eps(h, eps):
    if not h > 0 or not eps > 0:
        raise ParameterError("need h > 0 and eps > 0")


def choose_n(m, p, h, eps):
    """Smallest level guaranteeing the simplified L^p bound <= eps."""
    _check_h_eps(h, eps)
    return max(1, math.ceil(hat_c(m, p) * h / eps))


def n_wik(m, h, eps):
    """Wiktorsson's L^2 truncation level."""
    _check_h_eps(h, eps)
    return math.ceil(math.sqrt(5 * (m - 1) * m) * h / (math.sqrt(24.0) * math.pi * eps))


def n_fs(p, h, eps):
    """Truncation level that makes the FS L^p bound <= eps."""
    _check_h_eps(h, eps)
    if p < 2:
        raise ParameterError("need p >= 2")
    const = (p - 1) ** 2 / (2 * math.pi ** 2) * gamma_fn(p / 2 + 1) ** (2.0 / p)
    return max(1, math.ceil(const * h ** 2 / eps ** 2))


def _check_hn(h, n):
    if not h > 0 or n < 1:
        raise ParameterError("need h > 0 and n >= 1")


def l2_error_fs_exact(h, n):
    """Exact L^2 error of the FS approximation for an off-diagonal entry."""
    _check_hn(h, n)
    return math.sqrt(h ** 2 / (2 * math.pi ** 2) * tail_constants(n).alpha)


def tail_ratio(n):
    tc = tail_constants(n)
    return tc.beta / tc.alpha


@dataclass(frozen=True)
class IaL2Bound:
    max_entry: float
    frobenius: float
    max_entry_simplified: float
    frobenius_simplified: float


def l2_error_ia_bound(h, n, m):
    """Root-mean-square IA error bounds, exact tail ratio and 1/(3n^2) forms."""
    _check_hn(h, n)
    if m < 2:
        raise ParameterError("need m >= 2")
    max_entry = math.sqrt(h ** 2 * m / (4 * math.pi ** 2) * tail_ratio(n))
    simple = math.sqrt(m) * h / (math.sqrt(12.0) * math.pi * n)
    return IaL2Bound(
        max_entry=max_entry,
        frobenius=math.sqrt(m * (m - 1)) * max_entry,
        max_entry_simplified=simple,
        frobenius_simplified=math.sqrt(m * (m - 1)) * simple,
    )


@dataclass(frozen=True)
class LpBounds:
    fs: float
    ia_max: float
    ia_frob: float
    ia_max_simplified: float
    ia_frob_simplified: float


def lp_error_bounds(h, n, m, p):
    """L^p bounds for FS (any p >= 2) and IA (p > 2; NaN at p = 2)."""
    _check_hn(h, n)
    if p < 2:
        raise ParameterError("need p >= 2")
    alpha = tail_constants(n).alpha
    fs = (p - 1) * h / (math.sqrt(2.0) * math.pi) * gamma_fn(p / 2 + 1) ** (1.0 / p) * math.sqrt(alpha)
    if p == 2 or m < 2:
        nan = float("nan")
        return LpBounds(fs, nan, nan, nan, nan)
    lead = c_mp(m, p) * math.sqrt(p - 1) * h / math.pi ** ((2 * p + 1) / (2 * p))
    ia_max = lead * math.sqrt(tail_ratio(n))
    simple = lead / (math.sqrt(3.0) * n)
    pairs = math.sqrt(m * m - m)
    return LpBounds(fs, ia_max, pairs * ia_max, simple, pairs * simple)


@dataclass(frozen=True)
class CostReport:
    algo: str
    n: int
    draws: int


def cost(algo, m, p, h, eps):
    """Standard-normal draws per realization of (dW, I) at accuracy eps."""
    algo = algo.upper()
    M = m * (m - 1) // 2
    if algo == "IA":
        n = math.ceil(hat_c(m, p) * h / eps)
        return CostReport("IA", n, 2 * m * (n + 1) + M)
    if algo == "WIK":
        if p != 2:
            raise ParameterError("WIK cost is only defined for p = 2")
        n = n_wik(m, h, eps)
        # 2m(n + 1/2) is an integer
        return CostReport("WIK", n, m * (2 * n + 1) + M)
    if algo == "FS":
        n = n_fs(p, h, eps)
        return CostReport("FS", n, 2 * m * (n + 1))
    raise ParameterError(f"unknown algorithm {algo!r}")
