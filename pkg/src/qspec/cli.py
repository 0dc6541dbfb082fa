"""Command-line interface: ``qspec {audit,bound,optimize,constants}``.

Exit codes: 0 success, 2 input error, 3 precondition error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .energy_optimizer import OptimizerConfig, default_time, gradient_norm, optimize_points
from .errors import InvalidInputError, PreconditionError, QSpecError
from .manifold import ManifoldSpec, unit_ball_volume, weyl_lambda
from .quadrature_audit import QuadratureRule, audit_exactness
from .rulefile import read_rule, write_rule
from .spectral_bound import bound_curve, c_d, default_t_range, lambda_ceiling_coefficient

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRECONDITION = 3


def default_lambda_max(rule: QuadratureRule) -> float:
    """Eigenvalue of the Weyl-predicted index 2 c_d n: past anything the rule
    can integrate exactly."""
    m = rule.manifold
    return float(math.ceil(weyl_lambda(m.dim, 2.0 * c_d(m.dim) * rule.n, m.volume)))


def _load(args) -> QuadratureRule:
    try:
        rule = read_rule(args.rule)
    except OSError as exc:
        raise InvalidInputError(f"cannot read {args.rule}: {exc.strerror}") from None
    if args.manifold is not None and ManifoldSpec.parse(args.manifold) != rule.manifold:
        raise InvalidInputError(f"rule file is on {rule.manifold}, but --manifold {args.manifold} was given")
    return rule


def _fmt(x) -> str:
    if x is None:
        return "none"
    return f"{x:.10g}"


def _label(e) -> str:
    if e is None:
        return "none"
    lab = e.label
    if isinstance(lab[0], tuple):
        return f"#{e.ordinal} lambda={e.eigenvalue:g} k={lab[0]} {lab[1]}"
    return f"#{e.ordinal} lambda={e.eigenvalue:g} (l={lab[0]}, m={lab[1]})"


def cmd_audit(args) -> int:
    rule = _load(args)
    lam = args.lambda_max if args.lambda_max is not None else default_lambda_max(rule)
    report = audit_exactness(rule, lam, args.tol)
    if args.json:
        print(json.dumps(dict(report.to_dict(), manifold=str(rule.manifold), n=rule.n)))
        return EXIT_OK
    print(f"manifold      {rule.manifold}  (n = {rule.n}, sum of weights = {rule.total_weight:.17g})")
    if not report.normalized:
        print("WARNING       weights do not sum to vol(M); constants are not integrated exactly")
    print(f"k_star        {report.k_star}  ({report.exact_count} exact eigenfunctions)")
    print(f"lambda_star   {_fmt(report.lambda_star)}")
    print(f"first failure {_label(report.first_failure)}")
    print(f"tolerance     {report.tol:.3g}  (scanned lambda <= {report.lambda_max:g})")
    print()
    print(f"{'ordinal':>7}  {'lambda':>8}  {'residual':>12}  label")
    rows = report.residuals if args.rows is None else report.residuals[: args.rows]
    for e, r in rows:
        mark = "" if r <= report.tol else "  FAIL"
        lab = e.label
        text = f"{lab[0]} {lab[1]}" if isinstance(lab[0], tuple) else f"l={lab[0]} m={lab[1]}"
        print(f"{e.ordinal:>7}  {e.eigenvalue:>8g}  {r:>12.3e}  {text}{mark}")
    return EXIT_OK


def cmd_bound(args) -> int:
    rule = _load(args)
    if not rule.normalized:
        print(
            f"error: weights sum to {rule.total_weight:.17g}, expected vol(M) = {rule.manifold.volume:.17g}",
            file=sys.stderr,
        )
        return EXIT_PRECONDITION
    lo, hi = default_t_range(rule)
    curve = bound_curve(
        rule,
        args.t_min if args.t_min is not None else lo,
        args.t_max if args.t_max is not None else hi,
        args.t_num,
    )
    report = audit_exactness(rule, default_lambda_max(rule))
    lam_star = report.lambda_star
    ratio = None
    if curve.finite and lam_star:
        ratio = curve.best_bound / lam_star
    if args.out:
        Path(args.out).write_text(curve.to_csv())
    violated = curve.finite and lam_star is not None and curve.best_bound < lam_star
    if violated:
        print(
            f"WARNING: best bound {curve.best_bound!r} is below lambda_star {lam_star!r}; this is a bug",
            file=sys.stderr,
        )
    if args.json:
        print(json.dumps({
            "manifold": str(rule.manifold),
            "n": rule.n,
            "samples": [[t, b if math.isfinite(b) else None] for t, b in curve.samples],
            "best_t": curve.best_t,
            "best_bound": curve.best_bound if curve.finite else None,
            "lambda_star": lam_star,
            "first_failure_eigenvalue": None if report.first_failure is None else report.first_failure.eigenvalue,
            "ratio": ratio,
        }))
        return EXIT_OK
    if not args.out:
        sys.stdout.write(curve.to_csv())
        print()
    if curve.finite:
        print(f"best_t        {curve.best_t:.10g}")
        print(f"best_bound    {curve.best_bound:.10g}")
    else:
        print("no finite bound on this t-grid")
    print(f"lambda_star   {_fmt(lam_star)}")
    if report.first_failure is not None:
        print(f"first failing eigenvalue {report.first_failure.eigenvalue:g}")
    if ratio is not None:
        print(f"ratio best_bound/lambda_star {ratio:.6g}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    m = ManifoldSpec.parse(args.manifold)
    if args.n < 1:
        raise InvalidInputError("--n must be >= 1")
    t = args.t if args.t is not None else default_time(m, args.n)
    cfg = OptimizerConfig(t=t, max_iters=args.max_iters, seed=args.seed)
    rule, trace = optimize_points(m, args.n, cfg)
    out = Path(args.out)
    write_rule(rule, out)
    trace_path = Path(args.trace) if args.trace else out.with_name(out.name + ".trace.csv")
    lines = ["iter,energy"] + [f"{i},{e:.17g}" for i, e in enumerate(trace)]
    trace_path.write_text("\n".join(lines) + "\n")
    report = audit_exactness(rule, default_lambda_max(rule))
    summary = {
        "manifold": str(m),
        "n": args.n,
        "t": t,
        "seed": args.seed,
        "iterations": len(trace) - 1,
        "initial_energy": trace[0],
        "final_energy": trace[-1],
        "gradient_norm": gradient_norm(rule, t),
        "k_star": report.k_star,
        "lambda_star": report.lambda_star,
        "rule_file": str(out),
        "trace_file": str(trace_path),
    }
    if args.json:
        print(json.dumps(summary))
    else:
        for k, v in summary.items():
            print(f"{k:15s} {v}")
    return EXIT_OK


def constants_table(d_max: int) -> list[dict]:
    rows = []
    for d in range(1, d_max + 1):
        weyl = ((2 * math.pi) ** d / unit_ball_volume(d)) ** (2.0 / d)
        rows.append({
            "d": d,
            "c_d": c_d(d),
            "lambda_coefficient": lambda_ceiling_coefficient(d),
            "weyl_coefficient": weyl,
        })
    return rows


def cmd_constants(args) -> int:
    if args.d_max < 1:
        raise InvalidInputError("--d-max must be >= 1")
    rows = constants_table(args.d_max)
    if args.json:
        print(json.dumps(rows))
        return EXIT_OK
    print(f"{'d':>3}  {'c_d':>12}  {'lambda_coef':>14}  {'weyl_coef':>14}")
    for r in rows:
        print(f"{r['d']:>3}  {r['c_d']:>12.4f}  {r['lambda_coefficient']:>14.6g}  {r['weyl_coefficient']:>14.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qspec", description="Spectral exactness audits and bounds for quadrature rules.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("audit", help="which Laplacian eigenfunctions a rule integrates exactly")
    a.add_argument("rule")
    a.add_argument("--manifold")
    a.add_argument("--lambda-max", type=float)
    a.add_argument("--tol", type=float)
    a.add_argument("--rows", type=int, default=None, help="limit residual table rows")
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=cmd_audit)

    b = sub.add_parser("bound", help="Rayleigh-quotient ceiling over a geometric t-grid")
    b.add_argument("rule")
    b.add_argument("--manifold")
    b.add_argument("--t-min", type=float)
    b.add_argument("--t-max", type=float)
    b.add_argument("--t-num", type=int, default=64)
    b.add_argument("--out", help="write the (t, bound) curve as CSV")
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=cmd_bound)

    o = sub.add_parser("optimize", help="gradient descent on the simplified energy")
    o.add_argument("--manifold", required=True)
    o.add_argument("--n", type=int, required=True)
    o.add_argument("--t", type=float)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--max-iters", type=int, default=5000)
    o.add_argument("--out", required=True, help="rule file to write (.json for JSON)")
    o.add_argument("--trace", help="trace CSV path (default: OUT.trace.csv)")
    o.add_argument("--json", action="store_true")
    o.set_defaults(func=cmd_optimize)

    c = sub.add_parser("constants", help="table of c_d and related coefficients")
    c.add_argument("--d-max", type=int, default=5)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_constants)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (InvalidInputError, QSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
