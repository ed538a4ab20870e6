#!/usr/bin/env python3
"""Print the exact coefficient tables of both order-2 density routes.

For d = 5 and d = 7 the recursion-pipeline density and the typeset density
are expanded onto the same basis of concrete derivative monomials and
compared coefficient by coefficient (exact pi-rational arithmetic).  The two
densities differ pointwise by design (the typeset tables were reduced with
x-integrations by parts) and by the documented slips; this report names
every differing monomial rather than reconciling anything.
"""

import argparse

import numpy as np

from penciltrace.cli import table_polynomial
from penciltrace.coeffs import dual_route_report
from penciltrace.testfun import InversePowerF


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, choices=(5, 7), default=5)
    args = ap.parse_args()
    d = args.d
    f = InversePowerF(t=1.0, mu=7 if d == 5 else 9)
    P = table_polynomial("example1" if d == 5 else "example2",
                         (7,) if d == 5 else (7, 7))
    rep = dual_route_report(d, P, f, xs=[np.zeros(d), np.full(d, 0.5)])
    print(f"d={d}: {rep['n_monomials']} monomials, "
          f"{rep['agreeing']} agree, {rep['n_disagreements']} differ\n")
    hdr = f"{'f-order':>7}  {'monomial':<44} {'pipeline':<28} {'typeset':<28}"
    print(hdr)
    print("-" * len(hdr))
    for r in rep["rows"]:
        mark = "  " if r["agree"] else "* "
        print(f"{mark}f^({r['f_order']})  {r['monomial']:<44} "
              f"{r['pipeline']:<28} {r['printed']:<28}")
    print("\npointwise densities:")
    for p in rep["pointwise"]:
        print(f"  x={p['x']}: pipeline {p['pipeline']:.6g}, "
              f"typeset {p['printed']:.6g}")


if __name__ == "__main__":
    main()
