"""``corr`` command line: stream, basis, simulate, resample, bench."""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .baselines import EwPearsonState, WindowSpearman
from .cli_io import (
    iter_pairs,
    json_line,
    parse_interval,
    previous_tick_resample,
    read_ticks_csv,
    write_returns_csv,
    write_rows_csv,
)
from .correlation import estimate_spearman, spearman_to_pearson
from .errors import InputError
from .hermite_basis import build_basis_cache
from .simulation import Contamination, SimulationConfig, run_mae_study
from .stream_state import CoefficientState, Standardizer


class UsageError(Exception):
    pass


def _open_input(path):
    if path in (None, "-"):
        return sys.stdin
    return open(path, newline="")


def _record(i: int, estimator: str, value: float | None, pearson_scale: bool = False) -> dict:
    if value is None:
        return {"i": i, "estimator": estimator, "raw": None, "clamped": None, "pearson": None}
    clamped = min(1.0, max(-1.0, value))
    pearson = clamped if pearson_scale else spearman_to_pearson(clamped)
    return {"i": i, "estimator": estimator, "raw": value, "clamped": clamped, "pearson": pearson}


def cmd_stream(args, out) -> int:
    est = args.estimator
    if est in ("hermite-ew", "ew-pearson") and args.lam is None:
        raise UsageError(f"--lambda is required for {est}")
    if est == "window" and args.window is None:
        raise UsageError("--window is required for the window estimator")
    if args.snapshot and est not in ("hermite", "hermite-ew"):
        raise UsageError("--snapshot applies to hermite estimators only")
    if args.emit_every < 1:
        raise UsageError("--emit-every must be >= 1")

    cache = None
    if est in ("hermite", "hermite-ew"):
        cache = build_basis_cache(args.order)
        tracker = CoefficientState(args.order, args.lam if est == "hermite-ew" else None)
    elif est == "ew-pearson":
        tracker = EwPearsonState(args.lam)
    else:
        tracker = WindowSpearman(args.window)

    std_x, std_y = Standardizer(), Standardizer()
    rejected = 0
    i = 0
    fh = _open_input(args.input)
    try:
        for x, y in iter_pairs(fh):
            if not (np.isfinite(x) and np.isfinite(y)):
                rejected += 1
                print(f"warning: non-finite pair ({x}, {y}) rejected", file=sys.stderr)
                continue
            if args.standardize:
                x, y = std_x.update(x), std_y.update(y)
            i += 1
            if cache is not None:
                tracker.update(x, y)
                if i % args.emit_every == 0:
                    rec = estimate_spearman(tracker, cache).to_record(i, est)
                    out.write(json_line(rec) + "\n")
            else:
                value = tracker.update(x, y)
                if i % args.emit_every == 0 and (est != "window" or i >= args.window):
                    out.write(json_line(_record(i, est, value, pearson_scale=est == "ew-pearson")) + "\n")
    finally:
        if fh is not sys.stdin:
            fh.close()
    if rejected:
        print(f"warning: {rejected} non-finite pair(s) rejected", file=sys.stderr)
    if args.snapshot:
        with open(args.snapshot, "w") as snap:
            snap.write(tracker.to_json())
    return 0


def cmd_basis(args, out) -> int:
    text = build_basis_cache(args.order).to_json()
    if args.out in (None, "-"):
        out.write(text + "\n")
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


_MODEL_NAMES = {"normal": "normal", "lognormal": "lognormal", "1": "model1", "2": "model2",
                "model1": "model1", "model2": "model2"}


def cmd_simulate(args, out) -> int:
    model = _MODEL_NAMES[args.model]
    contamination = Contamination(args.contamination)
    base = dict(model=model, reps=args.reps, order=args.order, lam=args.lam, seed=args.seed,
                standardize=args.standardize, contamination=contamination)
    if model in ("model1", "model2"):
        if args.lam is None:
            raise UsageError("--lambda is required for models 1 and 2")
        arms = [("hermite-ew", "spearman"), ("hermite-ew", "pearson"), ("ew-pearson", "pearson")]
        configs = [SimulationConfig(n=n, estimator=e, target=t, **base) for n in args.n for e, t in arms]
    else:
        estimator = args.estimator or ("hermite-ew" if args.lam is not None else "hermite")
        configs = [SimulationConfig(n=n, rho=rho, estimator=estimator, **base)
                   for n in args.n for rho in args.rho]

    reports = [run_mae_study(cfg, workers=args.workers) for cfg in configs]
    rows = [rep.row() for rep in reports]
    if args.out in (None, "-"):
        write_rows_csv(out, rows)
    else:
        write_rows_csv(args.out, rows)

    curves = [r for r in reports if r.curve is not None]
    if args.curve_out and curves:
        # one curve file per n keeps the columns aligned
        for n in args.n:
            group = [r for r in curves if r.config.n == n]
            path = args.curve_out if len(args.n) == 1 else f"{args.curve_out}.n{n}"
            cols = {f"mae_{r.config.estimator}_{r.config.target}": r.curve for r in group}
            crows = [{"i": j + 1, **{k: float(v[j]) for k, v in cols.items()}} for j in range(n)]
            write_rows_csv(path, crows)
    return 0


def cmd_resample(args, out) -> int:
    interval = parse_interval(args.interval)
    returns = previous_tick_resample(read_ticks_csv(args.left), read_ticks_csv(args.right), interval)
    if args.out in (None, "-"):
        out.write("x,y,timestamp_ms\n")
        for a, b, t in zip(returns.r1.tolist(), returns.r2.tolist(), returns.timestamp_ms.tolist()):
            out.write(f"{a!r},{b!r},{t}\n")
    else:
        write_returns_csv(args.out, returns)
    return 0


def bench_update_latency(order: int = 20, positions=(1_000, 100_000), samples: int = 2_000,
                         lam: float | None = None, seed: int = 0) -> dict[int, float]:
    """Median wall time (seconds) of a single ``update`` at each stream position."""
    rng = np.random.default_rng(seed)
    state = CoefficientState(order, lam)
    results = {}
    timer = time.perf_counter_ns
    for pos in sorted(positions):
        while state.count < pos:
            x, y = rng.standard_normal(2)
            state.update(x, y)
        data = rng.standard_normal((samples, 2)).tolist()
        times = np.empty(samples)
        for j, (x, y) in enumerate(data):
            t0 = timer()
            state.update(x, y)
            times[j] = timer() - t0
        results[pos] = float(np.median(times)) * 1e-9
    return results


def cmd_bench(args, out) -> int:
    lat = bench_update_latency(args.order, samples=args.samples)
    lo, hi = sorted(lat)
    cache = build_basis_cache(args.order)
    state = CoefficientState(args.order).update_batch(*np.random.default_rng(1).standard_normal((2, 1000)))
    t0 = time.perf_counter()
    reps = 200
    for _ in range(reps):
        estimate_spearman(state, cache)
    est_time = (time.perf_counter() - t0) / reps
    report = {
        "order": args.order,
        "update_latency_s": {str(k): v for k, v in lat.items()},
        "ratio": lat[hi] / lat[lo],
        "estimate_latency_s": est_time,
        "state_bytes": state.nbytes,
    }
    out.write(json.dumps(report, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="corr", description="Streaming Hermite-series Spearman correlation")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("stream", help="estimate correlation over an (x,y) CSV stream")
    s.add_argument("--estimator", choices=["hermite", "hermite-ew", "ew-pearson", "window"], default="hermite")
    s.add_argument("--order", type=int, default=10)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--window", type=int)
    s.add_argument("--standardize", action="store_true")
    s.add_argument("--input", default="-")
    s.add_argument("--emit-every", type=int, default=1)
    s.add_argument("--snapshot")
    s.set_defaults(func=cmd_stream)

    b = sub.add_parser("basis", help="write the W/z cache as JSON")
    b.add_argument("--order", type=int, required=True)
    b.add_argument("--out")
    b.set_defaults(func=cmd_basis)

    m = sub.add_parser("simulate", help="run Monte Carlo MAE studies, write CSV")
    m.add_argument("--model", choices=sorted(_MODEL_NAMES), default="normal")
    m.add_argument("--n", type=int, nargs="+", default=[10_000])
    m.add_argument("--reps", type=int, default=100)
    m.add_argument("--rho", type=float, nargs="+", default=[0.5])
    m.add_argument("--order", type=int, default=20)
    m.add_argument("--lambda", dest="lam", type=float)
    m.add_argument("--estimator", choices=["hermite", "hermite-ew", "exact"])
    m.add_argument("--contamination", type=float, default=0.0)
    m.add_argument("--standardize", action="store_true")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("--out")
    m.add_argument("--curve-out")
    m.set_defaults(func=cmd_simulate)

    r = sub.add_parser("resample", help="previous-tick sample two tick files into bp log returns")
    r.add_argument("--interval", default="60s")
    r.add_argument("--left", required=True)
    r.add_argument("--right", required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_resample)

    k = sub.add_parser("bench", help="per-update latency at stream positions 1e3 and 1e5")
    k.add_argument("--order", type=int, default=20)
    k.add_argument("--samples", type=int, default=2_000)
    k.set_defaults(func=cmd_bench)
    return p


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad usage
    try:
        return args.func(args, out)
    except UsageError as exc:
        parser.error(str(exc))
    except (InputError, ValueError, OSError) as exc:
        print(f"corr: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
