"""Command-line front end: ``solve``, ``model``, ``filter-plot``, ``bench`` and ``verify``.

Exit codes: 0 success (including an empty result), 1 a violated invariant
in ``verify``, 2 bad configuration or input, 3 numerical failure.
"""

import argparse
import itertools
import math
import os
import sys
import time
from dataclasses import replace

import numpy as np

from .contour import DEFAULT_ALPHA, DEFAULT_N, EXP, IDENTITY, build_contour
from .diagnostics import LHS_FLOOR, oracle_floor, verify_run
from .errors import ConfigError, NumericalError, SsSvdError
from .filters import filter_profile
from .moments import SsParams
from .oracle import ORACLE_CAP, jacobi_svd
from .pipeline import MODES, STEP_GROUPS, accuracy, solve
from .problems import ModelSpec, build_model, normalize_spectrum, read_matrix_market, write_matrix_market
from .report import SCHEMA_VERSION, result_payload, write_csv, write_json, write_triplets_csv
from .shifted_solver import orient

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
DEFAULT_INTERVALS = {1: (0.8, 1.2), 2: (1e-3, 1e-1)}
BENCH_COLUMNS = (
    ("model", "mode", "m", "n", "L", "M", "N", "ell", "repeats", "rank", "count")
    + STEP_GROUPS
    + ("total", "error", "residual", "status")
)


def _threads(args):
    env = os.environ.get("SSSVD_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"SSSVD_THREADS must be an integer, got {env!r}") from None
    else:
        value = args.threads if args.threads is not None else (os.cpu_count() or 1)
    if value < 1:
        raise ConfigError("thread count must be positive")
    return value


def _params(args):
    L = args.L
    if getattr(args, "auto_L", None) is not None:
        # LM about three times the expected triplet count
        L = max(1, math.ceil(3 * args.auto_L / args.M))
    return SsParams(L=L, M=args.M, N=args.N, ell=args.ell, delta=args.delta, eps=args.eps, seed=args.seed)


def _load(args):
    """Return ``(A, truth or None, description)``."""
    if args.model is not None:
        spec = ModelSpec(args.model, m=args.m, n=args.n, seed=args.model_seed)
        A, truth = build_model(spec)
        desc = {"model": int(spec.which), "m": spec.m, "n": spec.n, "model_seed": spec.seed}
    else:
        A, truth = read_matrix_market(args.matrix), None
        desc = {"matrix": str(args.matrix)}
    if getattr(args, "normalize", False):
        A, scale = normalize_spectrum(A)
        desc["scale"] = scale
        if truth is not None:
            truth = replace(truth, sigma=truth.sigma / scale)
    return A, truth, desc


def _interval(args):
    if args.interval is not None:
        return tuple(args.interval)
    if args.model is not None:
        return DEFAULT_INTERVALS[args.model]
    raise ConfigError("--interval is required with --matrix")


def _noise_hook(level, seed):
    if not level:
        return None

    def hook(U):
        rng = np.random.default_rng(seed)
        return U + level * rng.standard_normal(U.shape)

    return hook


def cmd_solve(args):
    A, truth, desc = _load(args)
    interval = _interval(args)
    params = _params(args)
    threads = _threads(args)
    result = solve(
        A,
        interval,
        params,
        mode=args.mode,
        alpha=args.alpha,
        threads=threads,
        exact_residuals=not args.no_exact,
        basis_hook=_noise_hook(args.inject_noise, args.seed),
    )
    acc = None
    if truth is not None:
        acc = accuracy(result, truth.sigma)
        acc = {k: v for k, v in acc.items() if not k.endswith("rel_errors")}
    config = dict(desc, interval=list(interval), mode=args.mode, alpha=args.alpha, threads=threads)
    write_json(f"{args.out}.report.json", result_payload(result, config, acc))
    write_triplets_csv(f"{args.out}.triplets.csv", result)

    print(f"{args.mode}: {result.count} triplets in [{interval[0]:g}, {interval[1]:g}] (rank {result.rank})")
    if acc is not None:
        print(f"max relative error {acc['max_target_error']:.3e}, median {acc['median_target_error']:.3e}")
    for note in result.notes:
        print(f"note: {note}")
    return EXIT_OK


def cmd_model(args):
    spec = ModelSpec(args.model, m=args.m, n=args.n, seed=args.model_seed)
    A, truth = build_model(spec)
    write_matrix_market(f"{args.out}.mtx", A)
    write_csv(f"{args.out}.sigma.csv", ["sigma"], ([s] for s in truth.sigma))
    print(f"wrote {args.out}.mtx ({spec.m}x{spec.n}) and {args.out}.sigma.csv")
    return EXIT_OK


def cmd_filter_plot(args):
    a, b = args.interval
    transforms = {"identity": [IDENTITY], "exp": [EXP], "both": [IDENTITY, EXP]}[args.transform]
    smin = args.sigma_min if args.sigma_min is not None else a / 2
    smax = args.sigma_max if args.sigma_max is not None else 2 * b
    for transform in transforms:
        rule = build_contour(a, b, args.N, args.alpha, transform)
        profile = filter_profile(rule, smin, smax, args.points, args.log)
        suffix = "" if len(transforms) == 1 else f".{transform.kind.value}"
        path = f"{args.out}{suffix}.filter.csv"
        profile.to_csv(path)
        print(f"wrote {path} ({profile.grid.size} points)")
    return EXIT_OK


def _bench_one(A, truth, interval, params, mode, repeats, threads):
    best = {key: math.inf for key in STEP_GROUPS + ("total",)}
    result = None
    for _ in range(repeats):
        result = solve(A, interval, params, mode=mode, threads=threads)
        for key in best:
            best[key] = min(best[key], result.timings[key])
    acc = accuracy(result, truth.sigma)
    sel = result.selected
    residual = float(result.residuals.exact[sel].max()) if sel.any() else math.nan
    return result, best, acc["max_target_error"], residual


def cmd_bench(args):
    threads = _threads(args)
    rows = []
    for which, mode, L in itertools.product(args.models, args.modes, args.L):
        A, truth = build_model(ModelSpec(which, m=args.m, n=args.n, seed=args.model_seed))
        interval = tuple(args.interval) if args.interval else DEFAULT_INTERVALS[which]
        row = {"model": which, "mode": mode, "m": args.m, "n": args.n, "L": L, "M": args.M, "N": args.N}
        row.update(ell=args.ell, repeats=args.repeats)
        try:
            params = SsParams(L=L, M=args.M, N=args.N, ell=args.ell, delta=args.delta, eps=args.eps, seed=args.seed)
            result, times, error, residual = _bench_one(A, truth, interval, params, mode, args.repeats, threads)
            row.update(times, rank=result.rank, count=result.count, error=error, residual=residual, status="ok")
        except SsSvdError as exc:
            row.update({key: math.nan for key in STEP_GROUPS + ("total", "error", "residual")})
            row.update(rank=0, count=0, status=f"failed: {exc}")
        rows.append(row)
        print(f"model {which} {mode:<10} L={L:<4} total {row['total']:.4f}s  {row['status']}")

    write_csv(f"{args.out}.bench.csv", BENCH_COLUMNS, ([row[c] for c in BENCH_COLUMNS] for row in rows))
    write_json(f"{args.out}.bench.json", {"schema_version": SCHEMA_VERSION, "threads": threads, "rows": rows})
    return EXIT_OK


def cmd_verify(args):
    A, truth, desc = _load(args)
    interval = _interval(args)
    A, _ = orient(A)
    if A.shape[1] > ORACLE_CAP:
        print(f"notice: n = {A.shape[1]} exceeds the oracle cap ({ORACLE_CAP}); verification skipped")
        return EXIT_OK
    started = time.perf_counter()
    oracle = jacobi_svd(A)
    oracle_seconds = time.perf_counter() - started
    if truth is not None:
        spread = float(np.max(np.abs(oracle.sigma - truth.sigma)))
        print(f"oracle spectrum vs constructed truth: max abs difference {spread:.3e}")
        # constructed factors are exact; the oracle only cross-checks the spectrum
        reference, floor = truth, LHS_FLOOR
    else:
        reference, floor = oracle, oracle_floor(oracle)
    report = verify_run(
        A,
        interval,
        reference,
        _params(args),
        mode=args.mode,
        threads=_threads(args),
        basis_hook=_noise_hook(args.inject_noise, args.seed),
        lhs_floor=floor,
    )
    for check in report.checks:
        print(f"{'PASS' if check.passed else 'FAIL'}  {check.name}: {check.detail}")
    if args.out:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "config": dict(desc, interval=list(interval), mode=args.mode),
            "oracle_seconds": oracle_seconds,
            "lhs_floor": floor,
            "passed": report.passed,
            "checks": [vars(c) for c in report.checks],
            "bounds": {
                str(ell): {
                    "conclusive": b.conclusive,
                    "approximate": b.approximate,
                    "note": b.note,
                    "sigma": b.sigma,
                    "abs_f": b.abs_f,
                    "lhs_v": b.lhs_v,
                    "bound_v": b.bound_v,
                    "lhs_u": b.lhs_u,
                    "bound_u": b.bound_u,
                }
                for ell, b in report.bounds.items()
            },
        }
        write_json(f"{args.out}.verify.json", payload)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _add_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", type=int, choices=(1, 2), help="built-in model problem")
    src.add_argument("--matrix", help="Matrix Market file")
    p.add_argument("--m", type=int, default=1000, help="model rows (default 1000)")
    p.add_argument("--n", type=int, default=200, help="model columns (default 200)")
    p.add_argument("--model-seed", type=int, default=0, help="seed for the model's random factors")
    p.add_argument("--normalize", action="store_true", help="scale A so its largest singular value is 1")


def _add_params(p, single_L=True):
    if single_L:
        p.add_argument("--L", type=int, default=20, help="block size")
    p.add_argument("--M", type=int, default=4, help="moment degree")
    p.add_argument("--N", type=int, default=DEFAULT_N, help="quadrature points (even)")
    p.add_argument("--ell", type=int, default=1, help="refinement iterations")
    p.add_argument("--delta", type=float, default=1e-20, help="relative low-rank threshold")
    p.add_argument("--eps", type=float, default=1e-8, help="relative spurious threshold")
    p.add_argument("--seed", type=int, default=0, help="seed of the start block")
    p.add_argument("--threads", type=int, default=None, help="workers for shifted solves (default: all cores)")


def build_parser():
    parser = argparse.ArgumentParser(prog="sssvd", description="Interval singular triplets by contour integration.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute triplets with singular values in [a, b]")
    _add_source(p)
    _add_params(p)
    p.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"))
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="ellipse aspect ratio")
    p.add_argument("--mode", choices=sorted(MODES), default="ss-svd")
    p.add_argument("--auto-L", type=int, metavar="T", help="set L = ceil(3*T/M) for T expected triplets")
    p.add_argument("--no-exact", action="store_true", help="skip exact residuals (NT calibration still uses one)")
    p.add_argument("--out", default="sssvd", help="output prefix")
    p.add_argument("--inject-noise", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("model", help="write a model problem as Matrix Market plus its exact spectrum")
    p.add_argument("--model", type=int, choices=(1, 2), required=True)
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--model-seed", type=int, default=0)
    p.add_argument("--out", default="model")
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("filter-plot", help="tabulate |f(sigma)| of the contour filter")
    p.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"), required=True)
    p.add_argument("--N", type=int, default=DEFAULT_N)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--transform", choices=("identity", "exp", "both"), default="both")
    p.add_argument("--sigma-min", type=float)
    p.add_argument("--sigma-max", type=float)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--log", action="store_true", help="logarithmic grid")
    p.add_argument("--out", default="filter")
    p.set_defaults(func=cmd_filter_plot)

    p = sub.add_parser("bench", help="step-group timings over models, modes and block sizes")
    p.add_argument("--models", type=int, nargs="+", choices=(1, 2), default=[1, 2])
    p.add_argument("--modes", nargs="+", choices=sorted(MODES), default=list(MODES))
    p.add_argument("--L", type=int, nargs="+", default=[20])
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--model-seed", type=int, default=0)
    p.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"))
    p.add_argument("--repeats", type=int, default=3, help="runs per config; the fastest is kept")
    _add_params(p, single_L=False)
    p.add_argument("--out", default="bench")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="check invariants against an oracle SVD")
    _add_source(p)
    _add_params(p)
    p.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"))
    p.add_argument("--mode", choices=sorted(MODES), default="ss-svd")
    p.add_argument("--out", help="optional prefix for <prefix>.verify.json")
    p.add_argument("--inject-noise", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "repeats", 1) < 1:
            raise ConfigError("--repeats must be positive")
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, MemoryError) as exc:
        step = getattr(exc, "step", None)
        where = f" during {step}" if step else ""
        print(f"numerical failure{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
