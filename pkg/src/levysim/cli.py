"""Command-line entry point: ``levysim <command> [options]``.

Exit codes: 0 when every check passes, 1 on a statistical failure, 2 on a
usage error. Data goes to ``--out`` (or stdout); with ``--out`` a replay
manifest is written next to it as ``<out>.manifest.json``.
"""
import argparse
import csv
import io
import json
import sys
import time

from . import __version__
from .covariance_struct import cond_cov_blocks, cond_cov_direct
from .error_model import choose_n, cost, l2_error_fs_exact, l2_error_ia_bound
from .errors import LevySimError
from .gaussian_source import StreamSpec, open_stream
from .levy_sim import ITO, IntegralMatrix, convert, simulate_many
from .sde_demo import DemoConfig, run_demo
from .validation import (
    absolute,
    coupled_fs_error_grid,
    coupled_ia_error,
    cond_cov_mean_check,
    default_cutoff,
    fit_slope,
    moment_suite,
    sigma2_stats,
    sqrt_lipschitz_check,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SUITES = ("moments", "fs-error", "ia-error", "cov", "lemma43")


def fmt(x):
    """Round-trip decimal formatting (17 significant digits)."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _float_list(text):
    return [float(eval_pow(t)) for t in text.split(",") if t.strip()]


def _int_list(text):
    return [int(t) for t in text.split(",") if t.strip()]


def eval_pow(token):
    """Parse a float, also accepting ``2^-3`` style powers."""
    token = token.strip()
    if "^" in token:
        base, exp = token.split("^", 1)
        return float(base) ** float(exp)
    return float(token)


class Payload:
    """Tabular output plus an optional JSON summary."""

    def __init__(self, header, rows, summary=None):
        self.header = header
        self.rows = rows
        self.summary = summary

    def render(self, form):
        if form == "json":
            body = {"columns": self.header,
                    "rows": [dict(zip(self.header, r)) for r in self.rows]}
            if self.summary is not None:
                body["summary"] = self.summary
            return json.dumps(body, indent=2, sort_keys=True, default=fmt) + "\n"
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for r in self.rows:
            writer.writerow([fmt(x) for x in r])
        return buf.getvalue()


def _emit(args, payload, params, started):
    text = payload.render(args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        if payload.summary is not None and args.format == "csv":
            with open(args.out + ".summary.json", "w", encoding="utf-8") as fh:
                json.dump(payload.summary, fh, indent=2, sort_keys=True)
                fh.write("\n")
        manifest = {"command": args.command, "parameters": params, "seed": args.seed,
                    "version": __version__, "wall_time_s": round(time.perf_counter() - started, 3)}
        with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stdout.write(text)
        if payload.summary is not None and args.format == "csv":
            sys.stderr.write(json.dumps(payload.summary, sort_keys=True) + "\n")


def _reports_payload(reports):
    header = ["statistic", "estimate", "std_error", "target", "rule", "pass"]
    rows = [[r.statistic, r.estimate, r.std_error, r.target, r.rule, r.passed] for r in reports]
    return Payload(header, rows)


# -- commands ---------------------------------------------------------------

def cmd_simulate(args):
    if (args.eps is None) == (args.n is None):
        raise argparse.ArgumentTypeError("give exactly one of --eps or --n")
    n = args.n if args.n is not None else choose_n(max(args.m, 2), args.p, args.h, args.eps)
    dw, I = simulate_many(args.m, args.h, n, args.batch, args.seed, args.algo)
    I = convert(IntegralMatrix(args.h, ITO, I), args.calculus).values
    m = args.m
    header = ["realization"] + [f"dW{i + 1}" for i in range(m)]
    header += [f"I_{i + 1}_{j + 1}" for i in range(m) for j in range(m)]
    rows = [[r] + dw[r].tolist() + I[r].ravel().tolist() for r in range(args.batch)]
    params = {"m": m, "h": args.h, "eps": args.eps, "p": args.p, "n": n, "algo": args.algo,
              "calculus": args.calculus, "batch": args.batch}
    return Payload(header, rows), params, True


def cmd_validate(args):
    suite = args.suite
    reports = []
    if suite == "moments":
        reports = moment_suite(args.algo, args.m[0], args.h, args.n_list[0], args.N, args.seed)
    elif suite == "fs-error":
        K = args.K or default_cutoff(max(args.n_list))
        reports = coupled_fs_error_grid(args.h, args.n_list, K, args.N, args.seed)
    elif suite == "ia-error":
        for m in args.m:
            for n in args.n_list:
                K = args.K or default_cutoff(n)
                res = coupled_ia_error(m, args.h, n, K, args.N, args.seed)
                reports += [res.max_entry, res.frobenius]
    elif suite == "cov":
        stream = open_stream(StreamSpec(args.seed, 0))
        for m in args.m:
            worst = 0.0
            for _ in range(100):
                x = stream.normal(m)
                worst = max(worst, abs(cond_cov_blocks(x).matrix - cond_cov_direct(x).matrix).max())
            reports.append(absolute(f"cond_cov blocks vs direct [m={m}]", worst, 0.0, 1e-12))
            reports.append(cond_cov_mean_check(m, args.N, args.seed))
        for m, n in ((2, 1), (3, 2)):
            reports += sigma2_stats(m, args.h, n, args.K or 1000, 10_000, args.seed)
    elif suite == "lemma43":
        reports = [sqrt_lipschitz_check(args.q, args.trials, args.seed)]
    params = {k: v for k, v in vars(args).items() if k not in ("func", "out", "format", "command", "seed")}
    return _reports_payload(reports), params, all(r.passed for r in reports)


def cmd_cost(args):
    header = ["algo", "n", "draws", "ratio_to_ia"]
    ia = cost("IA", args.m, args.p, args.h, args.eps)
    rows = [["IA", ia.n, ia.draws, 1.0]]
    if args.p == 2:
        wik = cost("WIK", args.m, args.p, args.h, args.eps)
        rows.append(["WIK", wik.n, wik.draws, wik.draws / ia.draws])
    else:
        rows.append(["WIK", "n/a (L² schedule only)", "n/a (L² schedule only)", "n/a"])
    fs = cost("FS", args.m, args.p, args.h, args.eps)
    rows.append(["FS", fs.n, fs.draws, fs.draws / ia.draws])
    params = {"m": args.m, "h": args.h, "eps": args.eps, "p": args.p}
    return Payload(header, rows), params, True


def cmd_convergence(args):
    ns = sorted(args.n_list)
    if len(ns) < 3:
        raise argparse.ArgumentTypeError("--n-list needs at least 3 levels")
    header = ["n", "estimate", "std_error", "closed_form", "pass"]
    rows = []
    if args.algo == "fs":
        K = args.K or default_cutoff(max(ns))
        reps = coupled_fs_error_grid(args.h, ns, K, args.paths, args.seed)
        closed = [l2_error_fs_exact(args.h, n) for n in ns]
    else:
        reps, closed = [], []
        for n in ns:
            K = args.K or default_cutoff(n)
            reps.append(coupled_ia_error(args.m, args.h, n, K, args.paths, args.seed).max_entry)
            closed.append(l2_error_ia_bound(args.h, n, args.m).max_entry)
    for n, r, c in zip(ns, reps, closed):
        rows.append([n, r.estimate, r.std_error, c, r.passed])
    slope = fit_slope(ns, [r.estimate for r in reps])
    closed_slope = fit_slope(ns, closed)
    summary = {"algo": args.algo, "slope": slope, "closed_form_slope": closed_slope}
    params = {"algo": args.algo, "n_list": ns, "m": args.m, "h": args.h, "paths": args.paths, "K": args.K}
    return Payload(header, rows, summary), params, all(r.passed for r in reps)


def cmd_demo(args):
    cfg = DemoConfig(T=args.T, h_list=tuple(args.h_list), paths=args.paths, K=args.K, seed=args.seed)
    res = run_demo(cfg)
    header = ["h", "n", "rmse_milstein_ia", "rmse_milstein_fs", "rmse_euler"]
    rows = [[r.h, r.n, r.rmse_milstein_ia, r.rmse_milstein_fs, r.rmse_euler] for r in res.rows]
    summary = {"slopes": res.slopes,
               "ia_slope_in_window": 0.85 <= res.slopes["rmse_milstein_ia"] <= 1.15,
               "euler_slope_in_window": 0.35 <= res.slopes["rmse_euler"] <= 0.65}
    ok = summary["ia_slope_in_window"] and summary["euler_slope_in_window"]
    params = {"T": args.T, "h_list": list(args.h_list), "paths": args.paths, "K": args.K}
    return Payload(header, rows, summary), params, ok


# -- parser -----------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="levysim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="64-bit seed (default 0)")
        p.add_argument("--out", help="output path; a manifest is written beside it")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("simulate", help="simulate (dW, I) realizations")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--eps", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--algo", choices=("ia", "fs"), default="ia")
    p.add_argument("--calculus", choices=("ito", "strat"), default="ito")
    p.add_argument("--batch", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="run a Monte Carlo validation suite")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--algo", choices=("ia", "fs"), default="ia")
    p.add_argument("--m", type=_int_list, default=None, help="comma list of dimensions")
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--n-list", type=_int_list, default=None)
    p.add_argument("--K", type=int, default=None, help="tail cutoff (default max(1e4, 100 n))")
    p.add_argument("--N", type=int, default=None, help="Monte Carlo sample size")
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--trials", type=int, default=1000)
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("cost", help="standard-normal draw counts for IA, WIK and FS")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--p", type=float, default=2.0)
    common(p)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("convergence", help="coupled error versus truncation level")
    p.add_argument("--algo", choices=("ia", "fs"), default="ia")
    p.add_argument("--n-list", type=_int_list, default=[2, 4, 8, 16])
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--paths", type=int, default=2000)
    p.add_argument("--K", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("demo", help="Milstein (IA/FS) versus Euler strong error slopes")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--h-list", type=_float_list, default=[2.0 ** -e for e in range(3, 8)],
                   help="comma list, e.g. 2^-3,2^-4,2^-5")
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--K", type=int, default=1000)
    common(p)
    p.set_defaults(func=cmd_demo)
    return parser


_SUITE_DEFAULTS = {
    "moments": {"m": [3], "n_list": [4], "N": 100_000, "h": None},
    "fs-error": {"m": [2], "n_list": [1, 2, 5, 10], "N": 100_000},
    "ia-error": {"m": [2, 3], "n_list": [2, 4, 8], "N": 1000},
    "cov": {"m": list(range(2, 9)), "n_list": [1], "N": 100_000},
    "lemma43": {"m": [2], "n_list": [1], "N": 1},
}


def _fill_defaults(args):
    if args.command != "validate":
        return
    for key, value in _SUITE_DEFAULTS[args.suite].items():
        if getattr(args, key, None) is None and value is not None:
            setattr(args, key, value)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _fill_defaults(args)
    if not 0 <= args.seed < 2 ** 64:
        parser.error("--seed must be an unsigned 64-bit integer")
    started = time.perf_counter()
    try:
        payload, params, ok = args.func(args)
    except (LevySimError, argparse.ArgumentTypeError) as exc:
        print(f"levysim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(args, payload, params, started)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
