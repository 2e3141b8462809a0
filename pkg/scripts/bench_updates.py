"""Per-update latency against stream position, to check it stays flat.

    python3 scripts/bench_updates.py --orders 5 10 20 --positions 1000 10000 100000
"""
import argparse

from hermite_spearman.cli import bench_update_latency
from hermite_spearman.stream_state import CoefficientState


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--orders", type=int, nargs="+", default=[5, 10, 20])
    ap.add_argument("--positions", type=int, nargs="+", default=[1_000, 10_000, 100_000])
    ap.add_argument("--samples", type=int, default=2_000)
    ap.add_argument("--ew", type=float, help="benchmark the EW update with this lambda")
    args = ap.parse_args(argv)

    print("order  bytes  " + "  ".join(f"@{p:<9}" for p in args.positions) + "  ratio")
    for order in args.orders:
        lat = bench_update_latency(order, args.positions, args.samples, lam=args.ew)
        first, last = lat[min(lat)], lat[max(lat)]
        cells = "  ".join(f"{lat[p] * 1e6:7.2f}us" for p in sorted(lat))
        print(f"{order:>5}  {CoefficientState(order).nbytes:>5}  {cells}  {last / first:.3f}")


if __name__ == "__main__":
    main()
