#!/usr/bin/env python3
"""Reproduce the scratch-vs-update timing experiment and summarize it.

Desk scale by default (m=20000, fits comfortably in a laptop's memory and a
couple of minutes). ``--full`` switches to the published-style sweep
(m=100000, n=100..1000, r in {10,20,30}, 10 reps), which wants ~4 GB of RAM
and a long coffee break. Per-rep rows land in the CSV; the summary printed
here does the averaging.

For strictly single-threaded timings pin the BLAS first, e.g.::

    OMP_NUM_THREADS=1 python scripts/run_benchmark.py --out results.csv
"""

import argparse
import statistics
import sys

from lrlsq.bench import BenchConfig, run_benchmark


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--full", action="store_true",
                        help="published-style sweep: m=1e5, n=100..1000, r=10,20,30")
    parser.add_argument("--m", type=int, default=None, help="override row count")
    parser.add_argument("--reps", type=int, default=None, help="override repetitions")
    parser.add_argument("--seed", type=int, default=20240601)
    parser.add_argument("--backend", choices=("qr", "cg"), default="qr")
    parser.add_argument("--out", default="bench_results.csv", help="CSV output path")
    args = parser.parse_args(argv)

    if args.full:
        cfg = BenchConfig(
            m=args.m or 100_000,
            n_list=tuple(range(100, 1001, 100)),
            r_list=(10, 20, 30),
            reps=args.reps or 10,
            seed=args.seed,
            backend=args.backend,
            out_path=args.out,
        )
    else:
        cfg = BenchConfig(
            m=args.m or 20_000,
            n_list=(200, 500, 1000),
            r_list=(10,),
            reps=args.reps or 5,
            seed=args.seed,
            backend=args.backend,
            out_path=args.out,
        )

    print(f"m={cfg.m}, n_list={cfg.n_list}, r_list={cfg.r_list}, "
          f"reps={cfg.reps}, seed={cfg.seed}, backend={cfg.backend}")
    records = run_benchmark(cfg)

    print(f"\n{'n':>6} {'r':>4} {'median speedup':>16} {'mean ms scratch':>16} "
          f"{'mean ms update':>15} {'max rel err':>12}")
    for n in cfg.n_list:
        for r in cfg.r_list:
            group = [rec for rec in records if rec.n == n and rec.r == r]
            med = statistics.median(rec.speedup for rec in group)
            scratch_ms = statistics.mean(rec.t_scratch_ns for rec in group) / 1e6
            update_ms = statistics.mean(rec.t_woodbury_ns for rec in group) / 1e6
            err = max(rec.rel_forward_error for rec in group)
            print(f"{n:>6} {r:>4} {med:>15.1f}x {scratch_ms:>16.1f} "
                  f"{update_ms:>15.2f} {err:>12.2e}")
    print(f"\nwrote {len(records)} records to {cfg.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
