#!/usr/bin/env python3
"""Reproduce the numerical coefficient tables end to end.

Runs the full Monte-Carlo protocol (default 10^6 samples x 20 replicates per
row) on all three example families, prints value vs reference vs ratio for
the recursion route and the typeset route, and cross-checks each Monte-Carlo
estimate against the deterministic block-Laplace evaluation.

    python scripts/reproduce_tables.py [--samples N] [--replicates R] [--quick]
"""

import argparse
import math
import time

from penciltrace.blockint import block_total
from penciltrace.cli import REFERENCE_TABLES, table_polynomial
from penciltrace.coeffs import c_total, cutoff_radius_for
from penciltrace.mcint import MCConfig
from penciltrace.testfun import InversePowerF


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--replicates", type=int, default=20)
    ap.add_argument("--seed", type=int, default=20240901)
    ap.add_argument("--quick", action="store_true",
                    help="2e5 x 6 instead of the full protocol")
    args = ap.parse_args()
    samples = 200_000 if args.quick else args.samples
    reps = 6 if args.quick else args.replicates

    for name, spec in REFERENCE_TABLES.items():
        d, m = spec["d"], spec["m"]
        mu = math.floor(d * (m + 1) / m) + 1
        f = InversePowerF(t=1.0, mu=mu)
        tp = (2 * math.pi) ** d
        print(f"\n=== {name}: d={d}, m={m}, f=(s+1)^-{mu}, "
              f"{samples}x{reps} samples ===")
        print(f"{'params':>14} {'reference':>10} {'mc(pipe)x(2pi)^d':>18} "
              f"{'exact(pipe)':>12} {'exact(printed)':>14} {'ratio/ref':>10}")
        base = None
        for params, ref in spec["rows"]:
            P = table_polynomial(name, params)
            R = cutoff_radius_for(P, f, d, 2, 1e-3)
            cfg = MCConfig(n_samples=samples, n_replicates=reps,
                           seed=args.seed, cutoff_radius=R)
            t0 = time.time()
            mc = c_total(2, d, P, f, cfg, route="pipeline")
            ex = block_total(2, d, P, f, route="pipeline")
            exp = block_total(2, d, P, f, route="printed")
            if base is None:
                base = (ref, mc.value)
            ratio = (mc.value / base[1]) / (ref / base[0])
            print(f"{str(params):>14} {ref:>10.0f} "
                  f"{mc.value * tp:>11.1f}+-{mc.stderr * tp:<6.1f} "
                  f"{ex * tp:>12.1f} {exp * tp:>14.1f} {ratio:>10.3f} "
                  f"[{time.time() - t0:.0f}s]")


if __name__ == "__main__":
    main()
