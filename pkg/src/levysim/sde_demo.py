"""Milstein with approximate iterated integrals versus Euler-Maruyama.

Test system: dX1 = dW1, dX2 = X1 dW2, X(0) = 0. Its Milstein step only needs
I(1,2) and is exact when I(1,2) is exact, so the RMSE at T measures the
integral approximation error alone. The reference integral per step is the
K-truncated series; IA and FS reuse the same draws at level n.
"""
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .error_model import choose_n
from .errors import ParameterError
from .gaussian_source import map_blocks
from .levy_sim import area_truncated_arrays, tail1_arrays, tail_constants
from .validation import coupled_tails, fit_slope, ia_tail_error


@dataclass
class DemoConfig:
    T: float = 1.0
    h_list: tuple = tuple(2.0 ** -e for e in range(3, 8))
    paths: int = 1000
    K: int = 1000
    seed: int = 0
    n_override: int | None = None  # fixed level instead of the eps = h^{3/2} schedule

    def validate(self):
        if len(self.h_list) < 3:
            raise ParameterError("h_list needs at least 3 step sizes")
        if self.paths < 2:
            raise ParameterError("need at least 2 paths")
        for h in self.h_list:
            steps = self.T / h
            if not h > 0 or abs(steps - round(steps)) > 1e-9 * steps:
                raise ParameterError(f"step size {h} does not divide T={self.T}")
        n_max = max(self.level(h) for h in self.h_list)
        if self.n_override is None and self.K < 100 * n_max:
            raise ParameterError(f"K={self.K} must be >= 100 * max n = {100 * n_max}")

    def level(self, h):
        if self.n_override is not None:
            return int(self.n_override)
        return choose_n(2, 2, h, h ** 1.5)


@dataclass
class DemoRow:
    h: float
    n: int
    rmse_milstein_ia: float
    rmse_milstein_fs: float
    rmse_euler: float


@dataclass
class DemoResult:
    rows: list
    slopes: dict
    config: dict = field(default_factory=dict)


def _paths_block(h, n, steps, K, stream, count):
    """Final X2 under Milstein(true), Milstein(IA), Milstein(FS) and Euler."""
    x1 = np.zeros(count)
    true, ia, fs, euler = (np.zeros(count) for _ in range(4))
    for _ in range(steps):
        z = stream.normal((count, 2 + 4 * n))
        dw = math.sqrt(h) * z[:, :2]
        xy = z[:, 2:].reshape(count, n, 2, 2)
        a_n = area_truncated_arrays(dw, xy[:, :, 0, :], xy[:, :, 1, :], h)[:, 0]
        tails = coupled_tails(2, h, n, K, stream, count)
        alpha = tail_constants(n).alpha
        # tail1 with Psi1 = s1 / sqrt(alpha_n) reproduces R1 exactly
        psi1 = tails.s1 / math.sqrt(alpha) if alpha > 0 else np.zeros_like(tails.s1)
        r1 = tail1_arrays(dw, h, n, psi1)[:, 0]
        half = 0.5 * dw[:, 0] * dw[:, 1]
        exact = half + a_n + r1 + tails.r2[:, 0]
        err_ia = ia_tail_error(2, h, n, tails)[:, 0]
        drift2 = x1 * dw[:, 1]
        true += drift2 + exact
        ia += drift2 + (exact - err_ia)
        fs += drift2 + (exact - tails.r2[:, 0])
        euler += drift2
        x1 += dw[:, 0]
    return np.stack([true, ia, fs, euler], axis=1)


def run_demo(cfg):
    cfg.validate()
    rows = []
    for idx, h in enumerate(cfg.h_list):
        n = cfg.level(h)
        steps = int(round(cfg.T / h))
        # distinct seed per step size keeps the h-levels independent
        seed = ((int(cfg.seed) << 8) + idx) & ((1 << 64) - 1)
        finals = np.concatenate(map_blocks(
            lambda s, c: _paths_block(h, n, steps, cfg.K, s, c), seed, cfg.paths))
        ref = finals[:, 0]
        rmse = [math.sqrt(np.mean((finals[:, col] - ref) ** 2)) for col in (1, 2, 3)]
        rows.append(DemoRow(h, n, *rmse))
    hs = [r.h for r in rows]
    slopes = {}
    for key in ("rmse_milstein_ia", "rmse_milstein_fs", "rmse_euler"):
        ys = [getattr(r, key) for r in rows]
        slopes[key] = fit_slope(hs, ys) if all(y > 0 for y in ys) else float("nan")
    config = asdict(cfg)
    config["h_list"] = list(cfg.h_list)
    return DemoResult(rows, slopes, config)
