"""Command-line interface: generation, roots, error charts, verification, thresholds.

Output is deterministic: fixed column order, no timestamps, big integers in
full decimal.  Formats: aligned table (default), CSV (header row, LF), or
JSON with one object per line (a metadata object followed by row objects).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field

from gmpy2 import mpfr, mpq

from . import analysis, binet, charpoly, exact
from .enclosure import RealEnclosure
from .errors import KbonacciError

_DEFAULT_DECIMALS = 3


@dataclass
class OutputRecord:
    command: str
    parameters: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    certification: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------


def _fmt_fixed(x, decimals: int) -> str:
    return f"{mpfr(x):.{decimals}f}"


def _fmt_sci(x) -> str:
    return f"{mpfr(x):.2e}"


def _fmt_enclosure(enc: RealEnclosure, decimals: int) -> str:
    return f"{_fmt_fixed(enc.midpoint(), decimals)}±{_fmt_sci(enc.radius())}"


def _render_table(rec: OutputRecord, stream) -> None:
    for key, value in rec.parameters.items():
        stream.write(f"# {key}: {value}\n")
    for key, value in rec.certification.items():
        stream.write(f"# {key}: {value}\n")
    if not rec.rows:
        return
    headers = list(rec.rows[0].keys())
    widths = [len(h) for h in headers]
    for row in rec.rows:
        for i, h in enumerate(headers):
            widths[i] = max(widths[i], len(row[h]))
    stream.write("  ".join(h.rjust(w) for h, w in zip(headers, widths)) + "\n")
    for row in rec.rows:
        stream.write("  ".join(row[h].rjust(w) for h, w in zip(headers, widths)) + "\n")


def _render_csv(rec: OutputRecord, stream) -> None:
    if not rec.rows:
        return
    headers = list(rec.rows[0].keys())
    writer = csv.DictWriter(stream, fieldnames=headers, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rec.rows)


def _render_json(rec: OutputRecord, stream) -> None:
    meta = {
        "command": rec.command,
        "parameters": rec.parameters,
        "certification": rec.certification,
    }
    stream.write(json.dumps(meta) + "\n")
    for row in rec.rows:
        stream.write(json.dumps(row) + "\n")


_RENDERERS = {"table": _render_table, "csv": _render_csv, "json": _render_json}


def _emit(rec: OutputRecord, fmt: str, stream=None) -> None:
    _RENDERERS[fmt](rec, stream or sys.stdout)


# --------------------------------------------------------------------------
# argument helpers
# --------------------------------------------------------------------------


def _order_type(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"order must be an integer, got {text!r}")
    if k < 2:
        raise argparse.ArgumentTypeError(f"order must be >= 2, got {k}")
    return k


def _min2_type(text: str) -> int:
    return _order_type(text)


def _positive_type(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _parse_span(text: str) -> tuple[int, int]:
    """Parse 'n' or 'n_lo..n_hi' (use -- before spans starting with a minus)."""
    if ".." in text:
        lo_text, hi_text = text.split("..", 1)
        lo, hi = int(lo_text), int(hi_text)
    else:
        lo = hi = int(text)
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty index span {text!r}")
    return lo, hi


def _default_precision() -> int:
    env = os.environ.get("KBONACCI_PRECISION")
    if env:
        try:
            return max(32, int(env))
        except ValueError:
            pass
    return 96


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("table", "csv", "json"), default="table")
    parser.add_argument("--precision", type=_positive_type, default=None,
                        help="working precision in bits (default: KBONACCI_PRECISION or 96)")
    parser.add_argument("--decimals", type=_positive_type, default=_DEFAULT_DECIMALS,
                        help="decimal places for displayed real values")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _cmd_gen(args) -> int:
    n_lo, n_hi = args.span
    rec = OutputRecord(
        command="gen",
        parameters={"k": str(args.k), "n_lo": str(n_lo), "n_hi": str(n_hi),
                    "method": args.method},
    )
    if args.method == "iter":
        values = exact.kbonacci_range(args.k, n_lo, n_hi)
        rec.rows = [{"n": str(n), "value": str(v)} for n, v in zip(range(n_lo, n_hi + 1), values)]
    elif args.method == "matrix":
        rec.rows = [
            {"n": str(n), "value": str(exact.kbonacci_matrix(args.k, n))}
            for n in range(n_lo, n_hi + 1)
        ]
    else:  # round
        results = [binet.binet_round(args.k, n) for n in range(n_lo, n_hi + 1)]
        rec.rows = [
            {"n": str(n), "value": str(r.value)}
            for n, r in zip(range(n_lo, n_hi + 1), results)
        ]
        rec.certification = {
            "precision_used": str(max(r.precision_used for r in results)),
            "proof_gap": _fmt_sci(min(r.proof_gap for r in results)),
        }
    _emit(rec, args.format)
    return 0


def _cmd_roots(args) -> int:
    bits = args.precision or _default_precision()
    enc = charpoly.dominant_root(args.k, bits)
    lower, upper, tight = charpoly.root_bounds(args.k)
    rec = OutputRecord(
        command="roots",
        parameters={"k": str(args.k), "precision": str(bits)},
        certification={
            "alpha": _fmt_enclosure(enc, args.decimals),
            "lower_bound": str(lower),
            "upper_bound": str(upper),
            "tight_lower_bound": str(tight),
            "precision_used": str(enc.precision_bits),
        },
    )
    rows = [{
        "root": "dominant",
        "re": _fmt_fixed(enc.midpoint(), args.decimals),
        "im": _fmt_fixed(0, args.decimals),
        "modulus": _fmt_fixed(enc.midpoint(), args.decimals),
        "residual_bound": "",
    }]
    if args.all:
        root_set = charpoly.all_roots(args.k, bits)
        for r in root_set.others:
            rows.append({
                "root": "interior",
                "re": _fmt_fixed(r.re, args.decimals),
                "im": _fmt_fixed(r.im, args.decimals),
                "modulus": _fmt_fixed(r.modulus(), args.decimals),
                "residual_bound": _fmt_sci(r.residual_bound),
            })
    rec.rows = rows
    _emit(rec, args.format)
    return 0


def _cmd_errors(args) -> int:
    n_lo, n_hi = args.span
    bits = args.precision or _default_precision()
    rows = analysis.error_table(args.k, n_lo, n_hi, bits)
    rec = OutputRecord(
        command="errors",
        parameters={"k": str(args.k), "n_lo": str(n_lo), "n_hi": str(n_hi),
                    "precision": str(bits)},
        rows=[{
            "n": str(r.n),
            "exact": str(r.exact),
            "dominant_term": _fmt_fixed(r.approx.midpoint(), args.decimals),
            "abs_error": _fmt_fixed(abs(r.error).midpoint(), args.decimals),
        } for r in rows],
        certification={
            "precision_used": str(max(r.approx.precision_bits for r in rows)),
            "max_error_radius": _fmt_sci(max(r.error.radius() for r in rows)),
        },
    )
    _emit(rec, args.format)
    return 0


def _verify_one_k(k: int, n_max: int, failures: list) -> dict:
    exact_vals = exact.kbonacci_range(k, 2 - k, n_max)
    round_ok = matrix_ok = True
    for i, n in enumerate(range(2 - k, n_max + 1)):
        if binet.binet_round(k, n).value != exact_vals[i]:
            round_ok = False
            failures.append(f"round mismatch at (k={k}, n={n})")
        if exact.kbonacci_matrix(k, n) != exact_vals[i]:
            matrix_ok = False
            failures.append(f"matrix mismatch at (k={k}, n={n})")

    bits = 128
    root_set = charpoly.all_roots(k, bits)
    tol = mpfr(10) ** -20
    identity_tol = mpfr(2) ** -64
    coeff_diff = mpfr(0)
    for z in root_set.all_values():
        sj = binet.coefficient_sj(k, z, bits).value
        m = binet._m_value_mpc(k, z)
        coeff_diff = max(coeff_diff, abs(sj - m))
        if not abs((z - 2) + z**-k) < identity_tol:
            failures.append(f"root identity violated at (k={k}, root={complex(z)})")
    if not coeff_diff < tol:
        failures.append(f"coefficient forms disagree for k={k} (max diff {float(coeff_diff):.3e})")

    enc = root_set.dominant
    lower, upper, tight = charpoly.root_bounds(k)
    bounds_ok = enc.strictly_inside(lower, upper) and enc.strictly_gt(tight)
    if not bounds_ok:
        failures.append(f"alpha enclosure escaped its bounds for k={k}")
    if not charpoly.sign_change_certificate(k, enc):
        failures.append(f"sign-change certificate failed for k={k}")
    m_alpha = binet.coefficient_m(k, enc)
    if not m_alpha.strictly_inside(mpq(1, 2), 1):
        failures.append(f"dominant coefficient escaped (1/2, 1) for k={k}")

    return {
        "k": str(k),
        "n_range": f"{2 - k}..{n_max}",
        "round_ok": str(round_ok).lower(),
        "matrix_ok": str(matrix_ok).lower(),
        "coeff_max_diff": _fmt_sci(coeff_diff),
        "bounds_ok": str(bounds_ok).lower(),
    }


def _cmd_verify(args) -> int:
    failures: list[str] = []
    rec = OutputRecord(
        command="verify",
        parameters={"k_max": str(args.k_max), "n_max": str(args.n_max)},
    )
    rec.rows = [_verify_one_k(k, args.n_max, failures) for k in range(2, args.k_max + 1)]
    checks = sum(2 * (args.n_max - (2 - k) + 1) + k + 4 for k in range(2, args.k_max + 1))
    rec.certification = {"checks": str(checks), "failures": str(len(failures))}
    _emit(rec, args.format)
    stream = sys.stdout if not failures else sys.stderr
    for failure in failures:
        stream.write(f"FAIL: {failure}\n")
    summary = "all checks passed" if not failures else f"{len(failures)} check(s) failed"
    stream.write(f"verify: {summary} ({checks} checks, k<=: {args.k_max}, n<=: {args.n_max})\n")
    return 0 if not failures else 1


def _read_sequence_file(path: str) -> list[int]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line.strip() for line in fh]
    except OSError as e:
        raise KbonacciError(f"cannot read sequence file {path!r}: {e}")
    values = []
    for idx, line in enumerate(lines):
        if not line:
            continue
        try:
            values.append(int(line))
        except ValueError:
            raise KbonacciError(f"sequence file {path!r} line {idx + 1} is not an integer: {line!r}")
    if not values:
        raise KbonacciError(f"sequence file {path!r} contains no integers")
    return values


def _cmd_threshold(args) -> int:
    n_terms = args.n_max
    if args.preset == "scaled-fib":
        coeff, base, target, n_start = analysis.preset_scaled_fib(n_terms)
        shown = {"preset": "scaled-fib"}
    elif args.preset == "gn":
        coeff, base, target, n_start = analysis.preset_gn(n_terms)
        shown = {"preset": "gn"}
    else:
        if args.coeff is None or args.base is None or args.seq is None:
            raise KbonacciError("threshold needs --preset or all of --coeff, --base, --seq")
        coeff, base = args.coeff, args.base
        target = _read_sequence_file(args.seq)[:n_terms]
        n_start = args.n_start
        shown = {"coeff": args.coeff, "base": args.base, "seq": args.seq}

    report = analysis.rounding_threshold(coeff, base, target, n_start)
    rec = OutputRecord(
        command="threshold",
        parameters={**shown, "n_start": str(n_start), "terms": str(len(target))},
        rows=[{
            "n": str(n_start + i),
            "target": str(t),
            "match": "yes" if ok else "no",
        } for i, (t, ok) in enumerate(zip(report.target, report.matches))],
        certification={
            "threshold": "none" if report.threshold is None else str(report.threshold),
            "verified_up_to": str(report.verified_up_to),
        },
    )
    _emit(rec, args.format)
    return 0


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kbonacci",
        description="k-step Fibonacci numbers: exact values, root data, and certified rounding",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate sequence terms")
    p_gen.add_argument("k", type=_order_type)
    p_gen.add_argument("span", type=_parse_span, help="index n or span n_lo..n_hi")
    p_gen.add_argument("--method", choices=("iter", "matrix", "round"), default="iter")
    _add_common(p_gen)
    p_gen.set_defaults(func=_cmd_gen)

    p_roots = sub.add_parser("roots", help="dominant root enclosure and bounds")
    p_roots.add_argument("k", type=_order_type)
    p_roots.add_argument("--all", action="store_true", help="include interior roots")
    _add_common(p_roots)
    p_roots.set_defaults(func=_cmd_roots)

    p_err = sub.add_parser("errors", help="error table of the single-term approximation")
    p_err.add_argument("k", type=_order_type)
    p_err.add_argument("span", type=_parse_span, help="index span n_lo..n_hi")
    _add_common(p_err)
    p_err.set_defaults(func=_cmd_errors)

    p_verify = sub.add_parser("verify", help="full cross-check sweep")
    p_verify.add_argument("--k-max", type=_min2_type, default=10)
    p_verify.add_argument("--n-max", type=_positive_type, default=300)
    _add_common(p_verify)
    p_verify.set_defaults(func=_cmd_verify)

    p_thr = sub.add_parser("threshold", help="rounding-threshold scan for c * b^n")
    p_thr.add_argument("--preset", choices=("scaled-fib", "gn"))
    p_thr.add_argument("--coeff", help="coefficient as a decimal literal (treated exactly)")
    p_thr.add_argument("--base", help="base as a decimal literal (treated exactly)")
    p_thr.add_argument("--seq", help="target sequence file, one integer per line")
    p_thr.add_argument("--n-start", type=int, default=0,
                       help="index of the sequence file's first line")
    p_thr.add_argument("--n-max", type=_positive_type, default=40,
                       help="number of terms to test")
    _add_common(p_thr)
    p_thr.set_defaults(func=_cmd_threshold)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except KbonacciError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    except ZeroDivisionError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
