import math

import mpmath
import numpy as np
import pytest

from levysim.error_model import (
    c_mp,
    chi2_abs_moment,
    choose_n,
    cost,
    gamma_fn,
    gauss_abs_moment,
    hat_c,
    l2_error_fs_exact,
    l2_error_ia_bound,
    lp_error_bounds,
    n_fs,
    n_wik,
)
from levysim.errors import ParameterError
from levysim.gaussian_source import StreamSpec, open_stream


def mp_c_mp(m, p):
    """High-precision evaluation of the c_{m,p} closed form."""
    mpmath.mp.dps = 40
    p = mpmath.mpf(p)
    g = mpmath.gamma((p + 1) / 2)
    first = mpmath.e ** (-2 / p) * (mpmath.gamma(p + 1) + mpmath.e / (p + 1)) ** (2 / p)
    second = (2 * m - 4) / mpmath.pi ** (2 / p) * g ** (4 / p)
    return g ** (1 / p) * mpmath.sqrt(first + second)


def test_gamma_fn():
    assert gamma_fn(1) == 1 and gamma_fn(2) == 1 and gamma_fn(5) == 24
    assert gamma_fn(1.5) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)
    with pytest.raises(ParameterError):
        gamma_fn(0.1)


def test_gauss_abs_moment_values():
    assert gauss_abs_moment(2, 1) == pytest.approx(1.0, rel=1e-15)
    assert gauss_abs_moment(1, 1) == pytest.approx(0.7978846, abs=1e-7)


def test_gauss_abs_moment_mc():
    z = 2.0 * open_stream(StreamSpec(21, 0)).normal(1_000_000)
    s = np.abs(z) ** 3
    assert abs(s.mean() - gauss_abs_moment(3, 2)) <= 3 * s.std(ddof=1) / math.sqrt(s.size)


def test_chi2_abs_moment_values():
    assert chi2_abs_moment(1, 0) == 2.0
    assert chi2_abs_moment(2, 2) == pytest.approx(4.0, abs=1e-12)
    # against an mpmath quadrature of the defining expectation
    mpmath.mp.dps = 30
    p, c = 2.5, 1.0
    ref = mpmath.quad(lambda s: abs(s - c) ** p * mpmath.e ** (-s / 2) / 2, [0, c, mpmath.inf])
    assert chi2_abs_moment(p, c) == pytest.approx(float(ref), rel=1e-10)


def test_chi2_abs_moment_mc():
    xy = open_stream(StreamSpec(22, 0)).normal((1_000_000, 2))
    s = np.abs(np.sum(xy ** 2, axis=1) - 1.0) ** 2.5
    assert abs(s.mean() - chi2_abs_moment(2.5, 1.0)) <= 3 * s.std(ddof=1) / math.sqrt(s.size)


def test_c_mp():
    assert c_mp(2, 4) == pytest.approx(1.8613, abs=1e-4)
    assert c_mp(3, 3) == pytest.approx(float(mp_c_mp(3, 3)), rel=1e-10)
    for p in (2.5, 4, 7):
        vals = [c_mp(m, p) for m in range(2, 10)]
        assert all(b > a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ParameterError):
        c_mp(3, 2)


def test_hat_c():
    assert hat_c(2, 2) == pytest.approx(0.1299491, abs=1e-6)
    assert hat_c(2, 4) == pytest.approx(0.5135, abs=1e-3)
    for m in range(2, 11):
        v = hat_c(m, 2) * math.sqrt(12.0) * math.pi / math.sqrt(m)
        assert abs(v - 1.0) <= 2.0 ** -52


def test_choose_n():
    assert choose_n(2, 2, 1.0, 0.01) == 13
    assert choose_n(2, 2, 1.0, 1.0) == 1
    for eps in np.geomspace(1e-5, 1e-1, 30):
        assert choose_n(3, 4, 1.0, eps / 2) <= 2 * choose_n(3, 4, 1.0, eps) + 1


def test_fs_exact():
    assert l2_error_fs_exact(1.0, 1) == pytest.approx(math.sqrt(1 / 12 - 1 / (2 * math.pi ** 2)), rel=1e-12)
    assert l2_error_fs_exact(1.0, 1) == pytest.approx(0.1807560, abs=1e-7)
    for n in range(1, 101):
        assert l2_error_fs_exact(1.0, n) <= 1.0 / (math.pi * math.sqrt(2 * n))
    assert l2_error_fs_exact(3.0, 4) == pytest.approx(3 * l2_error_fs_exact(1.0, 4), rel=1e-15)


def test_ia_bound():
    b = l2_error_ia_bound(1.0, 1, 2)
    assert b.max_entry == pytest.approx(0.080415, abs=1e-6)
    assert b.max_entry <= b.max_entry_simplified == pytest.approx(0.1299491, abs=1e-6)
    assert b.frobenius / b.max_entry == pytest.approx(math.sqrt(2), rel=1e-15)
    b3 = l2_error_ia_bound(1.0, 5, 3)
    assert b3.frobenius / b3.max_entry == pytest.approx(math.sqrt(6), rel=1e-15)


def test_lp_bounds():
    fs2 = lp_error_bounds(1.0, 3, 2, 2).fs
    assert fs2 == pytest.approx(l2_error_fs_exact(1.0, 3), rel=1e-14)
    for n in range(1, 51):
        b = lp_error_bounds(1.0, n, 3, 4)
        assert b.ia_max <= b.ia_max_simplified * (1 + 1e-12)
    a, c = lp_error_bounds(1.0, 4, 3, 4), lp_error_bounds(2.5, 4, 3, 4)
    for name in ("fs", "ia_max", "ia_frob"):
        assert getattr(c, name) == pytest.approx(2.5 * getattr(a, name), rel=1e-14)
    assert math.isnan(lp_error_bounds(1.0, 4, 3, 2).ia_max)


def test_cost_examples():
    assert cost("IA", 2, 2, 1.0, 0.01).draws == 57
    wik = cost("WIK", 2, 2, 1.0, 0.01)
    assert (wik.n, wik.draws) == (21, 87)
    fs = cost("FS", 2, 2, 1.0, 0.01)
    assert (fs.n, fs.draws) == (507, 2032)
    with pytest.raises(ParameterError):
        cost("WIK", 2, 4, 1.0, 0.01)


@pytest.mark.parametrize("m", [2, 3, 5, 10])
def test_wik_ia_ratio(m):
    ratio = n_wik(m, 1.0, 1e-6) / choose_n(m, 2, 1.0, 1e-6)
    assert ratio == pytest.approx(math.sqrt(5 * (m - 1) / 2), rel=0.01)


def test_n_fs_errors():
    with pytest.raises(ParameterError):
        n_fs(1.5, 1.0, 0.1)
    with pytest.raises(ParameterError):
        choose_n(2, 2, 1.0, 0.0)
