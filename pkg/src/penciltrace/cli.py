"""Command-line interface: coefficients, verification suites, table runs.

Every command echoes its full configuration (seeds and defaults included) in
a RunReport, prints JSON, and exits 0 only if all requested checks pass.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .polyalg import MultiPoly, parse_poly, poly_from_json, poly_to_json
from .testfun import InversePowerF, decay_admissible, default_mu
from .special import BTable, b_radial_oracle
from .contour import J, ContourSpec, contour_integrate, i_recursion_residual
from .symcalc import (symbol_chain, q_decomposition, check_lemma_val,
                      check_index_range, check_degree, compare_with_printed_k2)
from .coeffs import (c_total, c0_odd_check, vanishing_check,
                     dual_route_report, cutoff_radius_for, get_density_form,
                     shape_name)
from .mcint import MCConfig
from .qepver import (QuadPencil, trace_identity_residual,
                     lidskii_residual, refined_spectrum, counting_profile)

REFERENCE_TABLES = {
    "example1": {
        "d": 5, "m": 4,
        "rows": [((7,), 1428.0), ((10,), 1515.0), ((100,), 9237.0),
                 ((1000,), 235115.0)],
    },
    "example2": {
        "d": 7, "m": 4,
        "rows": [((7, 7), 409.0), ((7, 10), 423.0), ((7, 100), 1806.0),
                 ((7, 1000), 39646.0), ((10, 10), 434.0), ((10, 100), 1705.0),
                 ((10, 1000), 36724.0), ((100, 100), 1755.0),
                 ((100, 1000), 19587.0), ((1000, 1000), 18270.0)],
    },
    "example3": {
        "d": 5, "m": 6,
        "rows": [((100, 10), 11732.0)],
    },
}


def table_polynomial(name: str, params) -> MultiPoly:
    if name == "example1":
        (alpha,) = params
        terms = {tuple(4 if i == j else 0 for i in range(5)): 1.0 for j in range(5)}
        terms[(2, 2, 0, 0, 0)] = float(alpha)
        return MultiPoly(5, terms)
    if name == "example2":
        alpha, beta = params
        terms = {tuple(4 if i == j else 0 for i in range(7)): 1.0 for j in range(7)}
        terms[(2, 2, 0, 0, 0, 0, 0)] = float(alpha)
        terms[(0, 0, 2, 2, 0, 0, 0)] = float(beta)
        return MultiPoly(7, terms)
    if name == "example3":
        alpha, beta = params
        terms = {tuple(6 if i == j else 0 for i in range(5)): 1.0 for j in range(5)}
        terms[(2, 4, 0, 0, 0)] = float(alpha)
        terms[(0, 0, 2, 4, 0)] = float(beta)
        return MultiPoly(5, terms)
    raise ValueError(name)


def run_report(command: str, config: dict, results: dict, ok: bool,
               warnings=()) -> dict:
    return {
        "command": command,
        "config": config,
        "results": results,
        "ok": bool(ok),
        "warnings": list(warnings),
        "provenance": {"package": "penciltrace", "version": __version__,
                       "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S")},
    }


def emit(report: dict, args) -> int:
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if report["ok"] else 1


def _json_default(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _load_poly(spec: str, dim=None) -> MultiPoly:
    if spec.endswith(".json"):
        with open(spec) as fh:
            return poly_from_json(json.load(fh))
    if spec.lstrip().startswith("{"):
        return poly_from_json(spec)
    return parse_poly(spec, dim=dim)


def _make_f(args, d: int, m: int) -> InversePowerF:
    mu = args.mu if args.mu is not None else default_mu(d, m)
    f = InversePowerF(t=args.t, mu=mu)
    if not decay_admissible(f, d, m):
        thr = d * (m + 1) / m
        raise SystemExit(f"error: mu = {f.mu} is inadmissible; decay requires "
                         f"mu > d(m+1)/m = {thr}")
    return f


# ---------------------------------------------------------------------------
# subcommands


def cmd_bcoef(args) -> int:
    tb = BTable(args.d)
    val = tb.b(args.j, args.k, args.l)
    oracle = b_radial_oracle(args.j, args.k, args.l, args.d)
    resid = abs(val - oracle) / abs(oracle)
    ok = resid < 1e-10
    rep = run_report("bcoef",
                     {"d": args.d, "j": args.j, "k": args.k, "l": args.l},
                     {"value": val, "oracle": oracle, "residual": resid}, ok)
    return emit(rep, args)


def cmd_coeff(args) -> int:
    P = _load_poly(args.poly, dim=args.d)
    if P.dim != args.d:
        raise SystemExit("error: polynomial dimension does not match --d")
    f = _make_f(args, args.d, max(P.degree, 2))
    results: dict = {}
    warnings = []
    if args.method == "mc":
        R = (cutoff_radius_for(P, f, args.d, args.j, args.tail_tol)
             if args.cutoff == "auto" else float(args.cutoff))
        cfg = MCConfig(n_samples=args.samples, n_replicates=args.replicates,
                       seed=args.seed, cutoff_radius=R, tail_tol=args.tail_tol)
        integrator = cfg
        results["mc_config"] = dataclasses.asdict(cfg)
    else:
        if args.d > 3:
            raise SystemExit("error: tensor quadrature is refused for d > 3 "
                             "(cost nodes^d); use --method mc")
        integrator = {"method": "quad", "mapped": True, "nodes": args.nodes,
                      "half_width": 2.0}
    routes = ["pipeline", "printed"] if args.route == "both" else [args.route]
    for route in routes:
        try:
            res = c_total(args.j, args.d, P, f, integrator, route=route)
            results[route] = dataclasses.asdict(res)
        except ValueError as exc:
            results[route] = {"error": str(exc)}
            warnings.append(f"route {route}: {exc}")
    if len(routes) == 2 and all("value" in results[r] for r in routes):
        a, b = results["pipeline"]["value"], results["printed"]["value"]
        results["route_diff"] = {"abs": abs(a - b),
                                 "rel": abs(a - b) / max(abs(a), abs(b), 1e-300)}
    form = get_density_form(args.j, args.d)
    results["max_f_derivative_order"] = form.max_f_order
    summary: dict = {}
    for (q, pat), entry in sorted(form.pattern_coefficients().items(),
                                  key=lambda kv: (kv[0][0], str(kv[0][1]))):
        summary.setdefault(f"f^({q})", []).append(
            {"pattern": shape_name(pat), "multiplicity": entry["count"],
             "coefficient": str(entry["coef"])})
    results["parts_summary"] = summary
    ok = all("error" not in results.get(r, {}) for r in routes)
    rep = run_report("coeff",
                     {"j": args.j, "d": args.d, "poly": poly_to_json(P),
                      "t": f.t, "mu": f.mu, "route": args.route,
                      "method": args.method, "seed": args.seed},
                     results, ok, warnings)
    return emit(rep, args)


def cmd_tables(args) -> int:
    results = {}
    ok = True
    names = args.only.split(",") if args.only else list(REFERENCE_TABLES)
    for name in names:
        spec = REFERENCE_TABLES[name]
        d, m = spec["d"], spec["m"]
        f = _make_f(args, d, m)
        rows = []
        for params, ref_value in spec["rows"]:
            P = table_polynomial(name, params)
            R = cutoff_radius_for(P, f, d, 2, args.tail_tol)
            cfg = MCConfig(n_samples=args.samples, n_replicates=args.replicates,
                           seed=args.seed, cutoff_radius=R,
                           tail_tol=args.tail_tol)
            row = {"params": list(params), "reference": ref_value,
                   "cutoff_radius": R}
            for route in ("printed", "pipeline"):
                res = c_total(2, d, P, f, cfg, route=route)
                row[route] = {"value": res.value, "stderr": res.stderr}
                row[f"{route}_ratio_to_reference"] = res.value / ref_value
            rows.append(row)
        results[name] = {
            "d": d, "m": m, "t": f.t, "mu": f.mu,
            "events_interpretation": "samples per replicate",
            "rows": rows,
        }
    rep = run_report("tables",
                     {"samples": args.samples, "replicates": args.replicates,
                      "seed": args.seed, "tail_tol": args.tail_tol,
                      "only": args.only},
                     results, ok)
    if args.csv:
        import csv as _csv
        with open(args.csv, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["table", "params", "reference", "pipeline", "pipeline_stderr",
                        "printed", "printed_stderr", "pipeline_ratio_to_reference",
                        "printed_ratio_to_reference", "cutoff_radius"])
            for name, tbl in results.items():
                for row in tbl["rows"]:
                    w.writerow([name, " ".join(map(str, row["params"])),
                                row["reference"], row["pipeline"]["value"],
                                row["pipeline"]["stderr"],
                                row["printed"]["value"],
                                row["printed"]["stderr"],
                                row["pipeline_ratio_to_reference"],
                                row["printed_ratio_to_reference"],
                                row["cutoff_radius"]])
    return emit(rep, args)


def cmd_verify(args) -> int:
    checks = {}
    # moment table against radial quadrature
    worst = 0.0
    for d in (5, 7):
        tb = BTable(d)
        for (j, k, l) in [(4, 0, 0), (5, 0, 0), (6, 0, 0), (7, 0, 0),
                          (5, 1, 0), (6, 1, 0), (7, 1, 0), (6, 2, 0),
                          (7, 2, 0), (6, 1, 1), (7, 1, 1)]:
            v = tb.b(j, k, l)
            o = b_radial_oracle(j, k, l, d)
            worst = max(worst, abs(v - o) / abs(o))
    checks["b_table_vs_quadrature"] = {"worst_rel": worst, "ok": worst < 1e-10}
    # residue calculus
    f = InversePowerF(t=2.5, mu=8)
    worst_j = 0.0
    for k in range(4):
        for nu in (0, 1, 4):
            for u, v in ((0.1, 0.0), (1.0, 1.0), (10.0, 5.0)):
                jv = J(k, nu, f, u, v)
                spec = ContourSpec(r0=min(0.5, 0.4 * math.hypot(v, math.sqrt(u))),
                                   R_max=800.0, n_nodes=96)
                cv = contour_integrate(
                    lambda z, k=k, nu=nu, u=u, v=v:
                    (v - z) ** nu / (u + (v - z) ** 2) ** (k + 1) * f(z),
                    spec).value
                worst_j = max(worst_j, abs(jv - cv) / max(abs(cv), 1e-300))
    f4 = InversePowerF(t=1.0, mu=4)
    worst_rec = max(i_recursion_residual(k, nu, f4, u, v)
                    for k in (1, 2, 3) for nu in (1, 2)
                    for (u, v) in ((0.5, 1.0), (2.0, 0.3)))
    checks["residue_vs_contour"] = {"worst_rel": worst_j, "ok": worst_j < 1e-8}
    checks["ibp_recursion"] = {"worst": worst_rec, "ok": worst_rec < 1e-9}
    # symbol structure
    lem = check_lemma_val(args.jmax, mode="generic")
    chain = symbol_chain(args.jmax, mode="generic")
    idx_ok = all(check_index_range(chain[j])["ok"]
                 for j in range(1, args.jmax + 1))
    deg_sharp = all(check_degree(chain[j], "sharp")["ok"]
                    for j in range(1, args.jmax + 1))
    checks["valuation_lemma"] = {"ok": lem["ok"], "rows": lem["rows"]}
    checks["index_range"] = {"ok": idx_ok}
    checks["degree_sharp_bound"] = {"ok": deg_sharp}
    checks["printed_k2_reproduced"] = compare_with_printed_k2(3)
    # vanishing suite (pointwise)
    P1 = parse_poly("x1^2", dim=1)
    van = {}
    van["d1_j0"] = c0_odd_check(1, P1, f4,
                                xs=[np.array([0.3]), np.array([1.1])])
    P5 = parse_poly("x1^4+x2^4+x3^4+x4^4+x5^4", dim=5)
    f7 = InversePowerF(t=1.0, mu=7)
    van["d5_j1"] = vanishing_check(1, 5, P5, f7,
                                   xs=[np.full(5, 0.4), np.zeros(5)])
    worst_v = max(van["d1_j0"]["worst_ratio"], van["d5_j1"]["worst_ratio"])
    checks["vanishing"] = {"ok": worst_v < 1e-6, "worst_ratio": worst_v,
                           "detail": van}
    # trace identities
    rng = np.random.default_rng(args.seed)
    worst_t = worst_l = 0.0
    for _ in range(args.pencils):
        n = int(rng.integers(2, 9))
        M = rng.standard_normal((n, n))
        L0 = M @ M.T + n * np.eye(n)
        S = rng.standard_normal((n, n))
        pen = QuadPencil(L0=L0, L1=(S + S.T) / 2)
        z = 10 * np.exp(1j * rng.uniform(math.pi / 2 + 0.3,
                                         3 * math.pi / 2 - 0.3))
        k = int(rng.integers(1, 5))
        worst_t = max(worst_t, trace_identity_residual(pen, z, k))
        worst_l = max(worst_l, lidskii_residual(pen, z, k))
    checks["trace_identity"] = {"worst": worst_t, "ok": worst_t < 1e-9}
    checks["lidskii"] = {"worst": worst_l, "ok": worst_l < 1e-8}
    ok = all(c.get("ok", c.get("equal", False)) for c in checks.values())
    rep = run_report("verify", {"jmax": args.jmax, "pencils": args.pencils,
                                "seed": args.seed}, checks, ok)
    return emit(rep, args)


def cmd_symbols(args) -> int:
    results: dict = {}
    ok = True
    if args.check_lemma:
        lem = check_lemma_val(args.jmax, mode="generic")
        results["lemma"] = lem
        ok = lem["ok"]
    else:
        chain = symbol_chain(args.j, d=args.d, mode="concrete")
        S = chain[args.j]
        results["j"] = args.j
        results["d"] = args.d
        results["n_terms"] = len(S)
        results["k_values"] = sorted(S.k_values())
        if args.print_terms:
            results["terms"] = S.pretty().splitlines()
        qd = q_decomposition(S)
        results["q_decomposition_sizes"] = {k: len(v) for k, v in qd.items()}
        if args.j == 1:
            results["printed_k2_diff"] = compare_with_printed_k2(args.d)
            ok = results["printed_k2_diff"]["equal"]
        if args.route_diff and args.d in (5, 7):
            P = table_polynomial("example1" if args.d == 5 else "example2",
                                 (7,) if args.d == 5 else (7, 7))
            f = _make_f(args, args.d, 4)
            results["route_report"] = dual_route_report(args.d, P, f)
    rep = run_report("symbols",
                     {"j": args.j, "d": args.d, "jmax": args.jmax,
                      "check_lemma": args.check_lemma}, results, ok)
    return emit(rep, args)


def cmd_qep(args) -> int:
    results: dict = {}
    ok = True
    if args.trace_check:
        rng = np.random.default_rng(args.seed)
        worst_t = worst_l = 0.0
        for _ in range(50):
            n = int(rng.integers(2, 9))
            M = rng.standard_normal((n, n))
            L0 = M @ M.T + n * np.eye(n)
            S = rng.standard_normal((n, n))
            pen = QuadPencil(L0=L0, L1=(S + S.T) / 2)
            z = 10 * np.exp(1j * rng.uniform(math.pi / 2 + 0.3,
                                             3 * math.pi / 2 - 0.3))
            k = int(rng.integers(1, 5))
            worst_t = max(worst_t, trace_identity_residual(pen, z, k))
            worst_l = max(worst_l, lidskii_residual(pen, z, k))
        results["trace_worst"] = worst_t
        results["lidskii_worst"] = worst_l
        ok = worst_t < 1e-9 and worst_l < 1e-8
    elif args.lmg:
        m, g = int(args.lmg[0]), float(args.lmg[1])
        levels = ((args.X * 0.6, args.n // 3), (args.X * 0.8, args.n // 2),
                  (args.X, args.n))
        rep_s = refined_spectrum((m, g), levels=levels, g=g, box=args.box)
        results["spectrum"] = [
            {"re": l.real, "im": l.imag,
             "converged": l in rep_s.converged}
            for l in rep_s.eigenvalues]
        results["n_converged"] = len(rep_s.converged)
        results["location_violations"] = [
            {"re": l.real, "im": l.imag} for l in rep_s.location_violations]
        results["counting"] = counting_profile(
            rep_s, [2.0 * 1.5**i for i in range(6)])
    else:
        P = _load_poly(args.poly, dim=1)
        levels = ((args.X * 0.6, args.n // 3), (args.X * 0.8, args.n // 2),
                  (args.X, args.n))
        rep_s = refined_spectrum(P, levels=levels, box=args.box)
        results["n_converged"] = len(rep_s.converged)
        results["spectrum"] = [
            {"re": l.real, "im": l.imag, "converged": l in rep_s.converged}
            for l in rep_s.eigenvalues]
        results["location_violations"] = [
            {"re": l.real, "im": l.imag} for l in rep_s.location_violations]
        ok = not rep_s.location_violations
    rep = run_report("qep", {"trace_check": args.trace_check, "lmg": args.lmg,
                             "X": args.X, "n": args.n, "seed": args.seed},
                     results, ok)
    return emit(rep, args)


def cmd_residue_check(args) -> int:
    f = InversePowerF(t=2.5, mu=8)
    rows = []
    worst = 0.0
    for k in range(4):
        for nu in (0, 1, 4):
            for u, v in ((0.1, 0.0), (1.0, 1.0), (10.0, 5.0)):
                jv = J(k, nu, f, u, v)
                spec = ContourSpec(r0=min(0.5, 0.4 * math.hypot(v, math.sqrt(u))),
                                   R_max=800.0, n_nodes=96)
                cv = contour_integrate(
                    lambda z, k=k, nu=nu, u=u, v=v:
                    (v - z) ** nu / (u + (v - z) ** 2) ** (k + 1) * f(z),
                    spec).value
                rel = abs(jv - cv) / max(abs(cv), 1e-300)
                worst = max(worst, rel)
                rows.append({"k": k, "nu": nu, "u": u, "v": v, "rel": rel})
    ok = worst < 1e-8
    rep = run_report("residue-check", {"t": f.t, "mu": f.mu},
                     {"worst_rel": worst, "rows": rows, "n_combos": len(rows)},
                     ok)
    return emit(rep, args)


# ---------------------------------------------------------------------------


GLOBAL_DEFAULTS = {"seed": 20240901, "json": False, "out": None,
                   "t": 1.0, "mu": None}


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand; SUPPRESS
    # keeps the subparser from clobbering values parsed at the root
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--json", action="store_true",
                        default=argparse.SUPPRESS, help="JSON output (default)")
    common.add_argument("--out", type=str, default=argparse.SUPPRESS)
    common.add_argument("--t", type=float, default=argparse.SUPPRESS)
    common.add_argument("--mu", type=float, default=argparse.SUPPRESS)

    ap = argparse.ArgumentParser(prog="penciltrace", parents=[common],
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add_parser("bcoef", help="moment value with quadrature residual")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--l", type=int, default=0)
    p.set_defaults(func=cmd_bcoef)

    p = add_parser("coeff", help="trace-expansion coefficient")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--poly", type=str, required=True)
    p.add_argument("--route", choices=["pipeline", "printed", "both"],
                   default="pipeline")
    p.add_argument("--method", choices=["mc", "quad"], default="quad")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--cutoff", type=str, default="auto")
    p.add_argument("--tail-tol", type=float, default=1e-6)
    p.add_argument("--nodes", type=int, default=48)
    p.set_defaults(func=cmd_coeff)

    p = add_parser("tables", help="reproduce the numerical tables")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--tail-tol", type=float, default=1e-3,
                   help="relative tail mass allowed outside the cutoff ball")
    p.add_argument("--only", type=str, default=None)
    p.add_argument("--csv", type=str, default=None,
                   help="also write the rows as CSV to this path")
    p.set_defaults(func=cmd_tables)

    p = add_parser("verify", help="full property suite")
    p.add_argument("--jmax", type=int, default=3)
    p.add_argument("--pencils", type=int, default=50)
    p.set_defaults(func=cmd_verify)

    p = add_parser("symbols", help="symbol decompositions and checks")
    p.add_argument("--j", type=int, default=2)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--print", dest="print_terms", action="store_true")
    p.add_argument("--check-lemma", action="store_true")
    p.add_argument("--jmax", type=int, default=4)
    p.add_argument("--route-diff", action="store_true")
    p.set_defaults(func=cmd_symbols)

    p = add_parser("qep", help="pencil verification and 1-d spectra")
    p.add_argument("--trace-check", action="store_true")
    p.add_argument("--lmg", nargs=2, metavar=("m", "g"), default=None)
    p.add_argument("--poly", type=str, default="x1^2")
    p.add_argument("--X", type=float, default=12.0)
    p.add_argument("--n", type=int, default=800)
    p.add_argument("--box", type=float, default=30.0)
    p.set_defaults(func=cmd_qep)

    p = add_parser("residue-check", help="J closed form vs contour")
    p.set_defaults(func=cmd_residue_check)
    return ap


def _load_config(argv):
    argv = list(sys.argv[1:] if argv is None else argv)
    config = {}
    if "--config" in argv:
        i = argv.index("--config")
        path = argv[i + 1]
        del argv[i:i + 2]
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, val = line.partition("=")
                key = key.strip().replace("-", "_")
                val = val.strip()
                try:
                    config[key] = json.loads(val)
                except json.JSONDecodeError:
                    config[key] = val
    return argv, config


def main(argv=None) -> int:
    argv, config = _load_config(argv)
    ap = build_parser()
    if config:
        ap.set_defaults(**config)
        for action in ap._subparsers._group_actions[0].choices.values():
            action.set_defaults(**config)
    args = ap.parse_args(argv)
    for key, val in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, val)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
