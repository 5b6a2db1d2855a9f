"""Command-line entry point.

Exit codes: 0 when every executed check passes, 1 on any failure (including
invalid datasets), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .builtin import BUILTIN_NAMES, get_form
from .cusps import adapted_scaling_matrix, enumerate_cusps, extended_width, parse_cusp, scaling_matrix, width
from .modform import InsufficientTerms, NewformError, load_newform, validate
from .report import Check, VerificationReport, dumps

__all__ = ["main", "build_parser"]


class UsageError(ValueError):
    pass


def _twist(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split("/"))
    except ValueError as e:
        raise UsageError(f"twist must look like a/b, got {text!r}") from e
    if b < 1:
        raise UsageError("twist denominator must be positive")
    return a, b


def _pair(text: str) -> tuple[float, float]:
    try:
        A, B = (float(x) for x in text.split(","))
    except ValueError as e:
        raise UsageError(f"expected A,B, got {text!r}") from e
    return A, B


def _primes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x)
    except ValueError as e:
        raise UsageError(f"expected p1,p2,..., got {text!r}") from e


def _cusp(text: str, N: int):
    try:
        return parse_cusp(text, N)
    except ValueError as e:
        raise UsageError(str(e)) from e


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cuspcoeffs", description="Fourier coefficients of newforms at cusps.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--json", action="store_true", help="deterministic JSON output")
        return sp

    sp = add("cusps", "list the cusps of Gamma_0(N)")
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--conductor", type=int, default=1, help="character conductor M for the extended width")

    sp = sub.add_parser("modform", help="newform datasets")
    msub = sp.add_subparsers(dest="modform_command", required=True)
    chk = msub.add_parser("check", help="validate a dataset (builtin name or JSON path)")
    chk.add_argument("source")
    chk.add_argument("--json", action="store_true")

    sp = add("coeffs", "coefficients at a cusp")
    sp.add_argument("--form", required=True, help=f"builtin ({', '.join(BUILTIN_NAMES)}) or JSON path")
    sp.add_argument("--cusp", required=True)
    sp.add_argument("--nmax", type=int, default=20)
    sp.add_argument("--provenance", choices=["oracle", "product_formula", "both"], default="both")

    sp = add("formula", "product formula against the oracle at one cusp")
    sp.add_argument("--form", required=True)
    sp.add_argument("--cusp", required=True)
    sp.add_argument("--nmax", type=int, default=30)
    sp.add_argument("--fit-from", type=int, default=1, help="fit unknown constants from n >= this only")
    sp.add_argument("--plot", help="write a comparison figure to this file")

    sp = add("al", "Atkin-Lehner relation at a cusp")
    sp.add_argument("--form", required=True)
    sp.add_argument("--set", required=True, help="primes p1,p2 dividing the level")
    sp.add_argument("--cusp", help="default: every cusp")
    sp.add_argument("--nmax", type=int, default=30)

    sp = add("voronoi", "twisted Voronoi summation check")
    sp.add_argument("--form", required=True)
    sp.add_argument("--twist", required=True, help="a/b")
    sp.add_argument("--cusp", help="cusp of the left side (default oo)")
    sp.add_argument("--bump", default="1,100", help="support A,B of the smooth bump")

    sp = add("identity", "closed-form identity f(a/b + iy) through the dual cusp")
    sp.add_argument("--form", required=True)
    sp.add_argument("--twist", required=True)
    sp.add_argument("--y", type=float, required=True)

    sp = add("bounds", "average-bound experiment at a cusp")
    sp.add_argument("--form", required=True)
    sp.add_argument("--cusp", required=True)
    sp.add_argument("--xmax", type=int, default=5000)
    sp.add_argument("--plot", help="write the S(X) figure to this file")

    sp = add("suite", "run the verification suite")
    lvl = sp.add_mutually_exclusive_group()
    lvl.add_argument("--quick", action="store_true", help="small subset (default)")
    lvl.add_argument("--full", action="store_true", help="the whole acceptance grid")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--report", help="directory for report.json and figures")
    return p


# ---------------------------------------------------------------------------
# commands


def _emit(args, payload, text_lines) -> None:
    if getattr(args, "json", False):
        print(dumps(payload))
    else:
        print("\n".join(text_lines))


def _report_lines(report: VerificationReport) -> list[str]:
    lines = []
    for c in report.sorted().checks:
        res = "" if c.residual is None else f" residual={c.residual:.3e}"
        tol = "" if c.tolerance is None else f" tol={c.tolerance:.0e}"
        why = f" ({c.skipped})" if c.skipped else ""
        took = "" if c.seconds is None else f" [{c.seconds:.1f}s]"
        if "slope" in c.values:
            lo, hi = c.values["window"]
            tol = f" slope={c.values['slope']:.3f} window=[{lo}, {hi}]"
        lines.append(f"{c.status.upper():4s} {c.id}{res}{tol}{why}{took}")
        if "error" in c.values:
            lines.append(f"     error: {c.values['error']}")
        for problem in c.values.get("problems", []) if not c.passed else []:
            lines.append(f"     problem: {problem}")
    s = report.summary
    lines.append(f"{report.suite}: {s['pass']} pass, {s['fail']} fail, {s['skip']} skip")
    return lines


def _finish(args, report: VerificationReport) -> int:
    _emit(args, report, _report_lines(report))
    return 0 if report.passed else 1


def cmd_cusps(args) -> int:
    if args.level < 1 or args.conductor < 1 or args.level % args.conductor:
        raise UsageError("need level >= 1 and a conductor dividing the level")
    N, M = args.level, args.conductor
    records = []
    for c in enumerate_cusps(N):
        s = scaling_matrix(c)
        records.append(
            {
                "cusp": str(c),
                "q": c.q,
                "d_class": c.d_class,
                "class_modulus": c.class_modulus,
                "width": width(N, c.q),
                "extended_width": extended_width(N, M, c.q).delta,
                "scaling_matrix_inverse": list(s.sigma_inv),
            }
        )
    lines = [f"Gamma_0({N}): {len(records)} cusps"]
    lines += [
        f"  {r['cusp']:>6s}  q={r['q']:<4d} width={r['width']:<4d} delta={r['extended_width']:<4d} "
        f"sigma^-1={r['scaling_matrix_inverse']}"
        for r in records
    ]
    _emit(args, {"level": N, "conductor": M, "count": len(records), "cusps": records}, lines)
    return 0


def cmd_modform_check(args) -> int:
    try:
        f = get_form(args.source) if args.source in BUILTIN_NAMES else load_newform(args.source, check=False)
        problems = validate(f)
    except (NewformError, OSError) as e:
        problems = [str(e)]
        f = None
    info = {} if f is None else {"level": f.level, "weight": f.weight, "conductor": f.conductor, "n_max": f.n_max}
    check = Check(
        "modform.check",
        "dataset satisfies the load-time invariants",
        not problems,
        inputs={"source": args.source},
        provenance={"coefficients": "input"},
        values={**info, "problems": problems},
    )
    return _finish(args, VerificationReport("modform-check", [check]))


def cmd_coeffs(args) -> int:
    from .voronoi import coefficients_at

    f = get_form(args.form)
    c = _cusp(args.cusp, f.level)
    s = adapted_scaling_matrix(c, f.conductor)
    delta = extended_width(f.level, f.conductor, c.q).delta
    kinds = ["oracle", "product_formula"] if args.provenance == "both" else [args.provenance]
    cols = {k: coefficients_at(f, s, args.nmax, k) for k in kinds}
    rows = []
    for n in range(1, args.nmax + 1):
        row = {"n": n}
        for k in kinds:
            v = cols[k][n]
            row[k] = None if np.isnan(v) else complex(v)
        rows.append(row)
    payload = {
        "form": args.form,
        "cusp": str(c),
        "delta": delta,
        "scaling_matrix_inverse": list(s.sigma_inv),
        "provenance": kinds,
        "coefficients": rows,
    }
    lines = [f"{args.form} at {c} (delta = {delta}, sigma^-1 = {list(s.sigma_inv)})", "  n  " + "  ".join(kinds)]
    for r in rows:
        vals = ["unavailable" if r[k] is None else f"{r[k].real:+.12e}{r[k].imag:+.12e}i" for k in kinds]
        lines.append(f"{r['n']:4d}  " + "  ".join(vals))
    _emit(args, payload, lines)
    return 0


def cmd_formula(args) -> int:
    from .suite import check_product_formula, oracle_table

    f = get_form(args.form)
    c = _cusp(args.cusp, f.level)
    checks = [ch for ch in check_product_formula(args.form, args.nmax, fit_from=args.fit_from) if ch.inputs["cusp"] == str(c)]
    if args.plot:
        from .plotting import plot_coefficients
        from .voronoi import coefficients_at

        s = adapted_scaling_matrix(c, f.conductor)
        orc = oracle_table(f, args.nmax)[c][1]
        pf = coefficients_at(f, s, args.nmax, "product_formula")
        n = np.arange(1, args.nmax + 1)
        plot_coefficients(n, [orc[m] for m in n], pf[1:], args.plot, title=f"{args.form} at {c}")
    return _finish(args, VerificationReport("formula", checks))


def cmd_al(args) -> int:
    from .suite import check_atkin_lehner

    f = get_form(args.form)
    S = _primes(args.set)
    if not S or any(f.level % p for p in S):
        raise UsageError("every prime in --set must divide the level")
    checks = check_atkin_lehner(args.form, S, n_max=args.nmax)
    if args.cusp:
        c = _cusp(args.cusp, f.level)
        checks = [ch for ch in checks if ch.inputs["cusp"] == str(c)]
    return _finish(args, VerificationReport("atkin-lehner", checks))


def cmd_voronoi(args) -> int:
    from .suite import check_voronoi

    a, b = _twist(args.twist)
    A, B = _pair(args.bump)
    if not 0 < A < B:
        raise UsageError("bump support must satisfy 0 < A < B")
    if args.cusp:
        _cusp(args.cusp, get_form(args.form).level)
    return _finish(args, VerificationReport("voronoi", check_voronoi(args.form, b, a, args.cusp, (A, B))))


def cmd_identity(args) -> int:
    from .suite import check_identity

    a, b = _twist(args.twist)
    if args.y <= 0:
        raise UsageError("--y must be positive")
    return _finish(args, VerificationReport("identity", check_identity(args.form, b, args.y, a)))


def cmd_bounds(args) -> int:
    from .voronoi import average_bound_experiment

    f = get_form(args.form)
    c = _cusp(args.cusp, f.level)
    if args.xmax < 20:
        raise UsageError("--xmax must be at least 20")
    grid = np.unique(np.geomspace(args.xmax / 10, args.xmax, 12).astype(int))
    t = average_bound_experiment(f, c, grid)
    if args.plot:
        from .plotting import plot_bounds

        plot_bounds([t], args.plot)
    check = Check(
        f"bounds.{args.form}.{c}",
        "log-log slope of S(X) in [k-0.75, k+0.25]; the bound is informational",
        t.passed,
        residual=max(0.0, t.window[0] - t.slope, t.slope - t.window[1]),
        tolerance=0.0,
        inputs={"form": args.form, "cusp": str(c), "xmax": args.xmax},
        provenance={"coefficients": t.provenance},
        values={"slope": t.slope, "window": list(t.window), "X": t.X, "S": t.S, "bound": t.bound, "ratio": t.ratio},
    )
    return _finish(args, VerificationReport("bounds", [check]))


def cmd_suite(args) -> int:
    from .suite import run_suite

    report = run_suite("full" if args.full else "quick", workers=args.workers)
    if args.report:
        from .plotting import plot_suite_residuals

        out = Path(args.report)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(dumps(report) + "\n")
        plot_suite_residuals(report, out / "residuals.png")
        _bound_figure(report, out / "bounds.png")
    return _finish(args, report)


def _bound_figure(report, path) -> None:
    from types import SimpleNamespace

    from .plotting import plot_bounds

    tables = [
        SimpleNamespace(form=c.inputs["form"], cusp=c.inputs["cusp"], slope=c.values["slope"], **{
            k: c.values[k] for k in ("X", "S", "bound")
        })
        for c in report.checks
        if c.id.startswith("c09.") and not c.skipped
    ]
    if tables:
        plot_bounds(tables, path)


COMMANDS = {
    "cusps": cmd_cusps,
    "coeffs": cmd_coeffs,
    "formula": cmd_formula,
    "al": cmd_al,
    "voronoi": cmd_voronoi,
    "identity": cmd_identity,
    "bounds": cmd_bounds,
    "suite": cmd_suite,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.command == "modform":
            return cmd_modform_check(args)
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except KeyError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except (NewformError, InsufficientTerms, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
