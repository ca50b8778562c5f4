import math

import numpy as np
import pytest

from levysim.errors import ParameterError
from levysim.sde_demo import DemoConfig, run_demo

SMALL_H = (0.25, 0.125, 0.0625)


def test_config_validation():
    with pytest.raises(ParameterError):
        DemoConfig(h_list=(0.5, 0.25)).validate()
    with pytest.raises(ParameterError):
        DemoConfig(h_list=(0.3, 0.25, 0.125)).validate()
    with pytest.raises(ParameterError):
        DemoConfig(K=10).validate()
    with pytest.raises(ParameterError):
        DemoConfig(paths=1).validate()
    DemoConfig().validate()


def test_level_schedule():
    cfg = DemoConfig()
    assert [cfg.level(h) for h in cfg.h_list] == [1, 1, 1, 2, 2]
    assert DemoConfig(n_override=7).level(0.5) == 7


def test_no_approximation_gives_zero_error():
    cfg = DemoConfig(h_list=SMALL_H, paths=50, K=40, n_override=40)
    res = run_demo(cfg)
    for row in res.rows:
        assert row.rmse_milstein_ia <= 1e-12 and row.rmse_milstein_fs <= 1e-12
        assert row.rmse_euler > 0


def test_rmse_nonincreasing_in_n():
    vals = []
    for n in (1, 4, 16):
        cfg = DemoConfig(h_list=SMALL_H, paths=400, K=1600, n_override=n, seed=3)
        vals.append(run_demo(cfg).rows[-1].rmse_milstein_ia)
    assert vals[0] > vals[1] > vals[2]


def test_deterministic_and_shaped():
    cfg = DemoConfig(h_list=SMALL_H, paths=64, K=200, seed=5)
    a, b = run_demo(cfg), run_demo(cfg)
    assert [r.rmse_euler for r in a.rows] == [r.rmse_euler for r in b.rows]
    assert a.slopes == b.slopes
    assert set(a.slopes) == {"rmse_milstein_ia", "rmse_milstein_fs", "rmse_euler"}
    # FS drops the whole second tail, IA only its non-Gaussian remainder
    for r in a.rows:
        assert r.rmse_milstein_ia < r.rmse_milstein_fs
        assert math.isfinite(r.rmse_euler)
    assert np.isclose(a.config["h_list"][0], 0.25)


def test_demo_shares_error_code_path():
    from levysim import sde_demo, validation

    assert sde_demo.ia_tail_error is validation.ia_tail_error
    assert sde_demo.coupled_tails is validation.coupled_tails
