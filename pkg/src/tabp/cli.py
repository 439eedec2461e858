"""Command line interface.

Subcommands:

* simulate   Monte Carlo verification of a model against closed forms
* classify   long-run regime of a model
* analytics  the closed-form quantities themselves
* scan       classify a one-parameter grid of models into a CSV
* verify     reproducibility self-check (seeded reports must be
             byte-identical across repeat runs and worker counts)

Exit codes: 0 success, 1 a statistical check or self-check failed,
2 bad usage, 3 the requested run is infeasible.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import __version__
from . import montecarlo as mc
from .analytics import ClosedForms
from .classifier import Method, classify
from .distributions import DistributionError, parse_distribution
from .process import InfeasibleError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


def _fmt(x, digits=6):
    if x is None:
        return "-"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.{digits}g}"
    return str(x)


def _floats_csv(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _emit_json(text: str, dest: str) -> None:
    if dest == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(dest, "w") as fh:
            fh.write(text + "\n")


def _add_model_args(p: argparse.ArgumentParser, need_dist=True):
    p.add_argument("--lambda", dest="lam", type=float, required=True, metavar="RATE",
                   help="germ intensity")
    p.add_argument("--dist", required=need_dist,
                   help="grain length law, e.g. 'constant:c=1', 'exponential:mean=2', "
                        "'pareto:alpha=0.5', 'table:path=tail.csv'")


def _parse_dist(spec: str):
    return parse_distribution(spec)


# -- simulate ----------------------------------------------------------------

def _cmd_simulate(args) -> int:
    dist = _parse_dist(args.dist)
    sections = tuple(s.strip() for s in args.sections.split(",") if s.strip())
    cfg = mc.McConfig(
        lam=args.lam,
        dist=dist,
        line=args.line,
        T=args.T,
        replicates=args.reps,
        master_seed=args.seed,
        probes=tuple(args.probe or ()),
        sections=sections,
        sigma=args.sigma,
        p_threshold=args.p_threshold,
        buffer_eps=args.buffer_eps,
        growth_factors=tuple(args.growth_factors),
        growth_rel_tol=args.growth_rel_tol,
    )
    report = mc.run(cfg, workers=args.workers, csv_path=args.csv, gaps_csv_path=args.gaps_csv)
    if args.json:
        _emit_json(mc.report_json(report), args.json)
    if not (args.quiet or args.json == "-"):
        _print_simulate_report(report)
    return EXIT_OK if report["overall_pass"] else EXIT_CHECK_FAILED


def _print_simulate_report(report: dict) -> None:
    c = report["config"]
    print(f"model: lam={_fmt(c['lam'])} dist={c['dist']} line={c['line']} "
          f"T={_fmt(c['T'])} replicates={c['replicates']} seed={c['master_seed']}")
    from . import _kernels
    print(f"backend: {_kernels.BACKEND}")
    if report["n_clamped_total"]:
        print(f"note: {report['n_clamped_total']} grain lengths clamped to the float maximum")
    for name, s in report["sections"].items():
        if s.get("skipped"):
            print(f"{name}: SKIP ({s['note']})")
            continue
        if name == "vacancy":
            for pr in s["probes"]:
                print(f"vacancy t={_fmt(pr['t'])}: estimate {_fmt(pr['estimate'])} "
                      f"target {_fmt(pr['target'])} z={pr['z']:+.2f} "
                      f"{'PASS' if pr['pass'] else 'FAIL'}")
        elif name == "gaps":
            note = f" ({s['note']})" if "note" in s else ""
            print(f"gaps: n={s['n_pooled']} KS D={_fmt(s['ks_d'])} p={_fmt(s['pvalue'])} "
                  f"{'PASS' if s['pass'] else 'FAIL'}{note}")
        elif name == "nv":
            print(f"nv mean: estimate {_fmt(s['estimate'])} target {_fmt(s['target'])} "
                  f"z={s['z']:+.2f} {'PASS' if abs(s['z']) <= report['config']['sigma'] else 'FAIL'}")
            g = s["geometric"]
            if g.get("skipped"):
                print(f"nv geometric: SKIP ({g['note']})")
            else:
                print(f"nv geometric: chi2={_fmt(g['statistic'])} df={g['df']} "
                      f"p={_fmt(g['pvalue'])} {'PASS' if g['pass'] else 'FAIL'}")
        elif name == "growth_curve":
            for pt in s["points"]:
                print(f"growth T={_fmt(pt['T'])}: mean_nv {_fmt(pt['mean_nv'])} "
                      f"target {_fmt(pt['target'])} rel_err {_fmt(pt['rel_err'], 3)} "
                      f"{'PASS' if pt['pass'] else 'FAIL'}")
            print(f"growth strictly increasing: {s['strictly_increasing']}")
        else:
            print(f"{name}: estimate {_fmt(s['estimate'])} target {_fmt(s['target'])} "
                  f"z={s['z']:+.2f} {'PASS' if s['pass'] else 'FAIL'}")
    print(f"overall: {'PASS' if report['overall_pass'] else 'FAIL'}")


# -- classify ----------------------------------------------------------------

def _cmd_classify(args) -> int:
    dist = _parse_dist(args.dist)
    verdict = classify(args.lam, dist, method=args.method,
                       trust_extrapolation=args.trust_extrapolation,
                       horizon=args.horizon, delta=args.delta)
    if args.json:
        payload = {
            "regime": verdict.regime_label(),
            "method": verdict.method.value,
            "lam": verdict.lam,
            "dist": dist.spec_string(),
            "mean_grain": verdict.mean_grain,
            "vacancy_integral": verdict.vacancy_integral,
            "covered_fraction_limit": verdict.covered_fraction_limit,
            "unbounded_component": verdict.unbounded_component,
            "notes": verdict.notes,
        }
        import json as _json
        _emit_json(_json.dumps(mc.to_jsonable(payload), sort_keys=True, indent=2), args.json)
    if not (args.quiet or args.json == "-"):
        desc = {
            "I": "partial coverage, all components bounded",
            "II": "full coverage, unbounded occupied component",
            "III": "full coverage, fragmented occupied set",
            "inconclusive": "could not be decided at this horizon",
        }[verdict.regime_label()]
        print(f"regime: {verdict.regime_label()} ({desc})")
        print(f"method: {verdict.method.value}")
        print(f"mean grain length: {_fmt(verdict.mean_grain)}")
        print(f"vacancy integral: {_fmt(verdict.vacancy_integral)}")
        print(f"covered fraction limit: {_fmt(verdict.covered_fraction_limit)}")
        print(f"unbounded occupied component: {verdict.unbounded_component}")
        for note in verdict.notes:
            print(f"note: {note}")
    return EXIT_OK


# -- analytics ---------------------------------------------------------------

def _cmd_analytics(args) -> int:
    dist = _parse_dist(args.dist)
    cf = ClosedForms(args.lam, dist)
    evl = cf.vacant_length_result()
    verdict = classify(args.lam, dist)
    payload = {
        "lam": args.lam,
        "dist": dist.spec_string(),
        "mean_grain": dist.mean(),
        "regime": verdict.regime_label(),
        "covered_volume_fraction": cf.covered_volume_fraction(),
        "stationary_vacancy": cf.stationary_vacancy(),
        "expected_vacant_length_total": evl.value if evl.is_finite else math.inf,
        "expected_total_gaps": cf.expected_num_vacant(None),
        "nv_geometric_parameter": cf.nv_geometric_parameter(),
    }
    if args.T is not None:
        payload["T"] = args.T
        payload["expected_vacant_length_T"] = cf.expected_vacant_length(args.T)
        payload["expected_gaps_T"] = cf.expected_num_vacant(args.T)
        payload["mean_covered_fraction_T"] = cf.mean_covered_fraction(args.T)
    if args.probe:
        payload["vacancy"] = [
            {"t": t, "probability": cf.vacancy_probability(t)} for t in args.probe
        ]
    if args.json:
        import json as _json
        _emit_json(_json.dumps(mc.to_jsonable(payload), sort_keys=True, indent=2), args.json)
    if not (args.quiet or args.json == "-"):
        for key, val in payload.items():
            if key == "vacancy":
                for row in val:
                    print(f"vacancy probability at t={_fmt(row['t'])}: {_fmt(row['probability'], 10)}")
            else:
                print(f"{key}: {_fmt(val, 10)}")
    return EXIT_OK


# -- scan --------------------------------------------------------------------

def _cmd_scan(args) -> int:
    if (args.lambdas is None) == (args.alphas is None):
        raise UsageError("scan needs exactly one of --lambdas or --alphas")
    rows = []
    if args.lambdas is not None:
        dist = _parse_dist(args.dist)
        for lam in args.lambdas:
            rows.append(("lambda", lam, lam, dist))
    else:
        for alpha in args.alphas:
            rows.append(("alpha", alpha, args.lam, _parse_dist(f"pareto:alpha={alpha}")))

    lines = ["param,value,regime,covered_volume_fraction,expected_total_gaps"]
    for name, value, lam, dist in rows:
        verdict = classify(lam, dist)
        cf = ClosedForms(lam, dist)
        cvf = cf.covered_volume_fraction()
        total = cf.expected_num_vacant(None)
        lines.append(f"{name},{_fmt(value, 12)},{verdict.regime_label()},"
                     f"{_fmt(cvf, 12)},{_fmt(total, 12)}")
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return EXIT_OK


# -- verify ------------------------------------------------------------------

def _cmd_verify(args) -> int:
    dist = _parse_dist(args.dist)
    cfg = mc.McConfig(
        lam=args.lam, dist=dist, line=args.line, T=args.T,
        replicates=args.reps, master_seed=args.seed,
        probes=(args.T / 4.0, args.T / 2.0),
    )
    texts = {
        "run 1, workers=1": mc.report_json(mc.run(cfg, workers=1)),
        "run 2, workers=1": mc.report_json(mc.run(cfg, workers=1)),
        f"run 3, workers={args.workers}": mc.report_json(mc.run(cfg, workers=args.workers)),
    }
    base = next(iter(texts.values()))
    ok = all(t == base for t in texts.values())
    for label in texts:
        print(f"{label}: {len(texts[label])} bytes")
    print(f"reproducibility: {'PASS (all reports byte-identical)' if ok else 'FAIL (reports differ)'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# -- wiring ------------------------------------------------------------------

class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tabp",
        description="Simulation and analytics for one-dimensional coverage by "
                    "randomly placed rightward grains.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="Monte Carlo verification against closed forms")
    _add_model_args(ps)
    ps.add_argument("--line", choices=("half", "full"), default="half")
    ps.add_argument("--T", type=float, default=100.0, help="window length")
    ps.add_argument("--reps", type=int, default=200, help="number of replicates")
    ps.add_argument("--seed", type=int, default=0, help="master seed")
    ps.add_argument("--probe", type=float, action="append", metavar="T",
                    help="vacancy probe location; repeatable")
    ps.add_argument("--sections", default=",".join(mc.DEFAULT_SECTIONS),
                    help=f"comma list from {','.join(mc.ALL_SECTIONS)}")
    ps.add_argument("--sigma", type=float, default=4.0, help="pass band half-width in SEs")
    ps.add_argument("--p-threshold", type=float, default=0.01,
                    help="minimum p-value for distributional checks")
    ps.add_argument("--buffer-eps", type=float, default=1e-4,
                    help="full-line boundary truncation tolerance")
    ps.add_argument("--growth-factors", type=_floats_csv, default=[1e-3, 1e-2, 1e-1, 1.0],
                    metavar="F1,F2,...", help="window factors for the growth_curve section")
    ps.add_argument("--growth-rel-tol", type=float, default=0.10)
    ps.add_argument("--workers", type=int, default=1, help="thread count (never affects results)")
    ps.add_argument("--json", metavar="PATH", help="write the report as JSON ('-' for stdout)")
    ps.add_argument("--csv", metavar="PATH", help="write per-replicate rows as CSV")
    ps.add_argument("--gaps-csv", metavar="PATH", help="write per-gap rows as CSV")
    ps.add_argument("--quiet", action="store_true")
    ps.set_defaults(func=_cmd_simulate)

    pc = sub.add_parser("classify", help="long-run regime of a model")
    _add_model_args(pc)
    pc.add_argument("--method", choices=[m.value for m in Method] + ["auto"], default="auto")
    pc.add_argument("--trust-extrapolation", action="store_true",
                    help="treat a tabulated tail's fitted extrapolation as exact")
    pc.add_argument("--horizon", type=float, default=1e12)
    pc.add_argument("--delta", type=float, default=0.05)
    pc.add_argument("--json", metavar="PATH")
    pc.add_argument("--quiet", action="store_true")
    pc.set_defaults(func=_cmd_classify)

    pa = sub.add_parser("analytics", help="closed-form quantities of a model")
    _add_model_args(pa)
    pa.add_argument("--T", type=float, help="also report finite-window expectations")
    pa.add_argument("--probe", type=float, action="append", metavar="T",
                    help="vacancy probability at t; repeatable")
    pa.add_argument("--json", metavar="PATH")
    pa.add_argument("--quiet", action="store_true")
    pa.set_defaults(func=_cmd_analytics)

    pg = sub.add_parser("scan", help="classify a one-parameter grid into CSV")
    pg.add_argument("--lambda", dest="lam", type=float, default=1.0, metavar="RATE",
                    help="fixed intensity for an --alphas scan")
    pg.add_argument("--dist", help="fixed grain law for a --lambdas scan")
    pg.add_argument("--lambdas", type=_floats_csv, metavar="L1,L2,...")
    pg.add_argument("--alphas", type=_floats_csv, metavar="A1,A2,...",
                    help="scan pareto tail exponents at fixed --lambda")
    pg.add_argument("--out", default="-", metavar="PATH", help="CSV destination ('-' for stdout)")
    pg.set_defaults(func=_cmd_scan)

    pv = sub.add_parser("verify", help="seeded-reproducibility self-check")
    _add_model_args(pv)
    pv.add_argument("--line", choices=("half", "full"), default="half")
    pv.add_argument("--T", type=float, default=100.0)
    pv.add_argument("--reps", type=int, default=100)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--workers", type=int, default=8)
    pv.set_defaults(func=_cmd_verify)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if getattr(args, "func", None) is _cmd_scan:
            if args.lambdas is not None and not args.dist:
                raise UsageError("a --lambdas scan needs --dist")
        return args.func(args)
    except DistributionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
