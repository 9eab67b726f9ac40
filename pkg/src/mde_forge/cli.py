"""Command-line front end.

Exit codes: 0 all checks pass, 1 a check failed its tolerance, 2 invalid
parameters (including D_k = 0), 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from mpmath import mpc, mpf

from . import __version__
from . import verify as V
from .electro import AnsatzParams, solve_system
from .errors import MdeForgeError, NumericFailure, ParameterError
from .orthopoly import FuchsianParams, ode_polynomial
from .qmod import (
    EvalConfig,
    delta_series,
    eisenstein_series,
    eta_power_series,
    j_normalized_series,
)
from .report import DEFAULT_DIGITS, SCHEMA_VERSION, dec, frac_str, render_report, to_jsonable

EXIT_OK, EXIT_CHECK_FAILED, EXIT_BAD_PARAMS, EXIT_NUMERIC = 0, 1, 2, 3

SERIES_FORMS = {
    "e4": lambda n: eisenstein_series(4, n),
    "e6": lambda n: eisenstein_series(6, n),
    "eta4": lambda n: eta_power_series(4, n),
    "delta": delta_series,
    "jnorm": j_normalized_series,
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which matches the contract
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_PARAMS, f"{self.prog}: error: {message}\n")


def _abc(text: str):
    try:
        parts = [Fraction(p.strip()) for p in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected three rationals a,b,c, got {text!r}")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three rationals a,b,c, got {text!r}")
    return tuple(parts)


def parse_point(text: str) -> mpc:
    """'1/4+2i', '2i', '0.2+1.5i' -> mpc (rationals allowed in both parts)."""
    t = text.replace(" ", "")
    try:
        if not t.endswith("i"):
            raise ValueError
        t = t[:-1]
        cut = max(t.rfind("+"), t.rfind("-"))
        re_s, im_s = (t[:cut], t[cut:]) if cut > 0 else ("0", t)
        im = Fraction(im_s + "1" if im_s in ("", "+", "-") else im_s)
        re_ = Fraction(re_s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"cannot parse point {text!r}; use forms like 1/4+2i")
    if im <= 0:
        raise argparse.ArgumentTypeError(f"point {text!r} is not in the upper half-plane")
    return mpc(mpf(re_.numerator) / re_.denominator, mpf(im.numerator) / im.denominator)


def _points(text: str) -> list:
    return [parse_point(p) for p in text.split(";") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mde-forge", description="Modular forms, Fuchsian polynomials and Schwarzian verification.")
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision-bits", type=int, default=None,
                        help="working precision in bits (default 256, or $MDE_FORGE_PRECISION_BITS)")
    common.add_argument("--truncation-order", type=int, default=64, help="q-series terms used for evaluation (default 64)")
    common.add_argument("--contour-radius", type=float, default=0.05, help="Cauchy contour radius (default 0.05)")
    common.add_argument("--contour-points", type=int, default=256, help="contour samples (default 256)")
    common.add_argument("--digits", type=int, default=DEFAULT_DIGITS, help="decimal digits in output (default 30)")
    common.add_argument("--out", default=None, help="write the report to this file instead of stdout")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("series", parents=[common], help="exact q-expansion coefficients")
    s.add_argument("--form", choices=sorted(SERIES_FORMS), required=True)
    s.add_argument("--terms", type=int, required=True, help="number of coefficients")
    s.add_argument("--format", choices=("json", "csv", "text"), default="json")

    s = sub.add_parser("poly", parents=[common], help="monic degree-k Fuchsian polynomial (ascending coefficients)")
    s.add_argument("--abc", type=_abc, required=True, metavar="a,b,c")
    s.add_argument("--k", type=int, required=True)

    s = sub.add_parser("solve", parents=[common], help="solve and certify the residue system")
    s.add_argument("--e4exp", type=int, choices=(0, 2), required=True)
    s.add_argument("--e6exp", type=int, choices=(0, 2), required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--abc", type=_abc, default=None, metavar="a,b,c", help="override the tabulated (a,b,c)")
    s.add_argument("--format", choices=("json", "text"), default="json")

    v = sub.add_parser("verify", help="run a verification suite")
    vs = v.add_subparsers(dest="suite", required=True, parser_class=_Parser)
    s = vs.add_parser("schwarzian", parents=[common], help="{h,z} = 2 pi^2 r^2 E4 at test points")
    s.add_argument("--e4exp", type=int, choices=(0, 2), required=True)
    s.add_argument("--e6exp", type=int, choices=(0, 2), required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--points", type=_points, default=None,
                   help="semicolon-separated points such as '2i;1/3+i' (default: the four standard points)")
    s = vs.add_parser("orthogonality", parents=[common], help="orthogonality, interlacing, norms, recurrence")
    s.add_argument("--abc", type=_abc, required=True, metavar="a,b,c")
    s.add_argument("--nmax", type=int, default=12)
    s.add_argument("--interlace-max", type=int, default=20)
    vs.add_parser("identities", parents=[common], help="elliptic-point vanishing and derivative identities")
    vs.add_parser("hurwitz", parents=[common], help="eta^-2 solves y'' + (pi^2/36) E4 y = 0")
    for name, helptext in (("series", "exact coefficient identities through q^64"), ("all", "full acceptance suite")):
        s = vs.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--inject-fault", choices=V.FAULTS, default=None,
                       help="deliberately corrupt an input to exercise failure reporting")
    return p


def _config(args) -> EvalConfig:
    overrides = dict(truncation_order=args.truncation_order, contour_radius=args.contour_radius,
                     contour_points=args.contour_points)
    if args.precision_bits is not None:
        overrides["precision_bits"] = args.precision_bits
    return EvalConfig.from_env(**overrides)


def _emit(text: str, args) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_series(args, cfg) -> int:
    if args.terms < 1:
        raise ParameterError("--terms must be >= 1")
    f = SERIES_FORMS[args.form](args.terms)
    coeffs = [frac_str(c) for c in f.coeffs[: args.terms]]
    exp = frac_str(f.leading_exponent)
    if args.format == "csv":
        text = f"leading_exponent,{exp}\n" + ",".join(coeffs)
    elif args.format == "text":
        terms = [f"({c})*q^({frac_str(f.leading_exponent + n)})" for n, c in enumerate(coeffs) if c != "0"]
        text = " + ".join(terms) + f" + O(q^({frac_str(f.leading_exponent + args.terms)}))"
    else:
        text = json.dumps({"schema": SCHEMA_VERSION, "form": args.form, "leading_exponent": exp,
                           "terms": args.terms, "coefficients": coeffs}, indent=2)
    _emit(text, args)
    return EXIT_OK


def cmd_poly(args, cfg) -> int:
    a, b, c = args.abc
    if args.k < 0:
        raise ParameterError("--k must be >= 0")
    poly = ode_polynomial(FuchsianParams(a, b, c, args.k))
    _emit(json.dumps(poly.to_strings()), args)
    return EXIT_OK


def cmd_solve(args, cfg) -> int:
    if args.k < 1:
        raise ParameterError(f"k = {args.k}: the residue system and D_k are only defined for k >= 1")
    extra = dict(zip("abc", args.abc)) if args.abc else {}
    p = AnsatzParams(args.e4exp, args.e6exp, args.k, **extra)
    sol = solve_system(p, cfg, strict=False)
    if args.format == "text":
        lines = [f"params: {p.as_dict()}", f"certified: {sol.certified}",
                 f"residual_max: {dec(sol.residual_max, 6)}"]
        lines += [f"x_{i + 1} = {dec(x, args.digits)}" for i, x in enumerate(sol.roots)]
        text = "\n".join(lines)
    else:
        payload = {
            "schema": SCHEMA_VERSION,
            "params": p.as_dict(),
            "roots": [dec(x, args.digits) for x in sol.roots],
            "residual_max": dec(sol.residual_max, args.digits),
            "certified": sol.certified,
            "min_root_gap": None if sol.min_gap is None else dec(sol.min_gap, args.digits),
            "polynomial": sol.polynomial.to_strings(),
            "precision_decimal_digits": args.digits,
        }
        text = json.dumps(payload, indent=2)
    _emit(text, args)
    if not sol.certified:
        print("solution not certified (see report)", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_verify(args, cfg) -> int:
    extra = None
    suite = args.suite
    if suite == "schwarzian":
        checks = V.check_schwarzian([(args.e4exp, args.e6exp, args.k)], args.points, cfg)
    elif suite == "orthogonality":
        checks, recon = V.check_orthogonality(args.abc, args.nmax, args.interlace_max, cfg)
        extra = {"reconciliation": recon}
    elif suite == "identities":
        checks = V.check_elliptic_vanishing(cfg) + V.check_identities(cfg)
    elif suite == "hurwitz":
        checks = V.check_hurwitz(cfg)
    elif suite == "series":
        checks = V.check_series_identities(64, args.inject_fault)
    else:
        checks, extra = V.run_all(cfg, args.inject_fault)
    if getattr(args, "inject_fault", None):
        extra = dict(extra or {}, injected_fault=args.inject_fault)
    _emit(render_report(suite, checks, extra, args.digits), args)
    failed = sorted(c.name for c in checks if not c.passed)
    if failed:
        print(f"{len(failed)} check(s) failed:", file=sys.stderr)
        for name in failed:
            print(f"  FAIL {name}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


COMMANDS = {"series": cmd_series, "poly": cmd_poly, "solve": cmd_solve, "verify": cmd_verify}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS
    except NumericFailure as exc:
        diag = getattr(exc, "diagnostics", None)
        print(f"numeric failure: {exc}", file=sys.stderr)
        if diag:
            print(json.dumps(to_jsonable(diag, 12), indent=2), file=sys.stderr)
        return EXIT_NUMERIC
    except MdeForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # e.g. a malformed precision environment variable
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
