"""Throughput comparison of the simulation backends.

Runs the same seeded replicate batches through the compiled kernel and
the pure-Python reference and reports germs per second for each, plus
the verified-identical statistics.  Usage:

    python3 benchmarks/bench_kernels.py [--reps N] [--T LENGTH]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tabp import _kernels
from tabp.distributions import parse_distribution
from tabp.process import make_stream

CASES = [
    ("exponential:mean=1", 1.0),
    ("pareto:alpha=1", 1.0),
    ("pareto:alpha=1.5", 2.0),
]


def run_batch(mod, spec, lam, T, reps, seed):
    dist = parse_distribution(spec)
    fam, p0, p1, ty, ts = _kernels.params_for(dist)
    probes = np.empty(0, dtype=np.float64)
    probe_out = np.empty(0, dtype=np.uint8)
    gaps_out = np.empty(int(lam * T) + 1024, dtype=np.float64)
    germs = 0
    acc = 0.0
    t0 = time.perf_counter()
    for r in range(reps):
        gen = make_stream(seed, r)
        res = mod.simulate_stats(gen, lam, 0.0, T, fam, p0, p1, ty, ts,
                                 probes, probe_out, gaps_out)
        germs += res[0]
        acc += res[3]
    elapsed = time.perf_counter() - t0
    return germs, acc, elapsed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=50)
    ap.add_argument("--T", type=float, default=20000.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = [(name, _kernels.get_backend(name)) for name in _kernels.available_backends()]
    print(f"{args.reps} replicates of T={args.T:g} per case\n")
    for spec, lam in CASES:
        print(f"{spec} @ lam={lam:g}")
        base_acc = None
        base_rate = None
        for name, mod in backends:
            germs, acc, elapsed = run_batch(mod, spec, lam, args.T, args.reps, args.seed)
            rate = germs / elapsed
            if base_acc is None:
                base_acc, base_rate = acc, rate
            else:
                assert acc == base_acc, "backends disagree"
            print(f"  {name:>8}: {germs:>9d} germs in {elapsed:7.3f}s "
                  f"= {rate / 1e6:7.2f} M germs/s ({rate / base_rate:5.1f}x vs {backends[0][0]})")
        print()


if __name__ == "__main__":
    main()
