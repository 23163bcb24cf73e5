"""Command-line front end: ``privsum audit | sweep | fixtures``.

Exit codes: 0 when every applicable check passes, 1 when a check fails,
2 on usage or validation errors (including an exceeded enumeration budget).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .auditor import AuditReport, audit
from .entropy import DEFAULT_MAX_SEED_BITS, BudgetExceeded
from .fixtures import check_fixture, default_fixtures
from .protocol import CustomProtocolError, ProtocolConfig, build_achievability, dump_custom, load_custom

log = logging.getLogger("privsum")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CSV_COLUMNS = [
    "L", "n", "n1", "T", "alpha_num", "alpha_den", "R_X", "R_K", "R_K_sum", "R_U",
    "max_leak_bits", "delta_bits_required", "correct", "private", "symmetric", "thm1", "thm2", "ramp",
]


class UsageError(Exception):
    pass


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _summary(report: AuditReport) -> str:
    lines = [f"{report.name}: L={report.config.L} n={report.config.n} n1={report.config.n1} T={report.config.T}"]
    for name, status in report.checks().items():
        lines.append(f"  {name:<12} {status}")
    p = report.privacy
    lines.append(f"  leakage {p.measured:.12g} bits (allowed {p.required}), witness {list(p.subset or ())}")
    return "\n".join(lines)


def cmd_audit(args) -> int:
    if args.custom:
        try:
            doc = json.loads(Path(args.custom).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read {args.custom}: {exc}") from None
        for flag in ("L", "n"):
            given = getattr(args, flag)
            if given is not None and given != doc.get(flag):
                raise UsageError(f"--{flag} {given} does not match the protocol file ({doc.get(flag)})")
        inst = load_custom(doc, n1=args.n1, T=args.T)
    else:
        missing = [f"--{f}" for f in ("L", "n", "n1") if getattr(args, f) is None]
        if missing:
            raise UsageError(f"missing {', '.join(missing)} (or pass --custom)")
        inst = build_achievability(ProtocolConfig(args.L, args.n, args.n1, args.T or 0))
    report = audit(inst, max_seed_bits=args.max_seed_bits)
    _write(report.to_json(), args.out)
    print(_summary(report), file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def _parse_alpha(text: str) -> Fraction:
    try:
        a = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"invalid alpha {text!r}; use p/q") from None
    if not 0 <= a <= 1:
        raise UsageError(f"alpha {text} outside [0, 1]")
    return a


def sweep_grid(Ls, ns, n1s=None, alphas=None, Ts=None) -> list[ProtocolConfig]:
    """Every (L, n, n1, T) combination, in sorted order; any invalid combination is an error."""
    if not Ls or not ns or (n1s is not None and not n1s) or (alphas is not None and not alphas):
        raise UsageError("empty grid")
    configs = []
    for L in sorted(set(Ls)):
        for n in sorted(set(ns)):
            if alphas is not None:
                n1_values = []
                for a in alphas:
                    if (a * n).denominator != 1:
                        raise UsageError(f"alpha {a} is not a multiple of 1/{n}")
                    n1_values.append(int(a * n))
            else:
                n1_values = list(range(n + 1)) if n1s is None else n1s
            for n1 in sorted(set(n1_values)):
                for T in sorted(set(Ts)) if Ts is not None else [L - 2]:
                    try:
                        configs.append(ProtocolConfig(L, n, n1, T))
                    except ValueError as exc:
                        raise UsageError(f"invalid grid point L={L} n={n} n1={n1} T={T}: {exc}") from None
    return configs


def _rate(values) -> str:
    values = [str(v) for v in values]
    return values[0] if len(set(values)) == 1 else ";".join(values)


def sweep_row(report: AuditReport) -> dict:
    c, r, checks = report.config, report.rates, report.checks()
    return {
        "L": c.L, "n": c.n, "n1": c.n1, "T": c.T,
        "alpha_num": c.alpha.numerator, "alpha_den": c.alpha.denominator,
        "R_X": _rate(r.R_X), "R_K": _rate(r.R_K), "R_K_sum": str(r.R_K_sum), "R_U": str(r.R_U),
        "max_leak_bits": f"{report.max_leak_bits:.12g}" if abs(report.max_leak_bits) >= 1e-12 else "0",
        "delta_bits_required": c.leak_cap_bits,
        "correct": str(report.correctness.passed).lower(),
        "private": str(report.privacy.passed).lower(),
        "symmetric": str(report.profile.symmetric).lower(),
        "thm1": checks["theorem1"], "thm2": checks["theorem2"], "ramp": checks["ramp"],
    }


def cmd_sweep(args) -> int:
    alphas = [_parse_alpha(a) for a in args.alpha] if args.alpha is not None else None
    configs = sweep_grid(args.L, args.n, args.n1, alphas, args.T)
    rows, ok = [], True
    for config in configs:
        report = audit(build_achievability(config), max_seed_bits=args.max_seed_bits)
        ok &= report.ok
        rows.append(sweep_row(report))
        log.info("L=%d n=%d n1=%d T=%d: %s", config.L, config.n, config.n1, config.T,
                 "ok" if report.ok else ",".join(report.failed()))
    if args.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    _write(text, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_fixtures(args) -> int:
    if args.export:
        target = Path(args.export)
        target.mkdir(parents=True, exist_ok=True)
        for fx in default_fixtures():
            path = target / f"{fx.name.replace('-', '_')}.json"
            path.write_text(json.dumps(dump_custom(fx.instance)) + "\n")
            print(f"wrote {path}", file=sys.stderr)
    results, all_ok = [], True
    for fx in default_fixtures():
        report, ok = check_fixture(fx, max_seed_bits=args.max_seed_bits)
        all_ok &= ok
        failed = report.failed()
        witness = list(report.privacy.subset or ())
        print(f"{fx.name:<14} designated={fx.designated:<12} failed={','.join(failed) or '-':<20} "
              f"witness={witness} {'OK' if ok else 'UNEXPECTED'}")
        results.append({"fixture": fx.name, "designated": fx.designated, "failed": failed,
                        "expected": ok, "report": report.to_dict()})
    if args.out:
        Path(args.out).write_text(json.dumps(results, indent=2) + "\n")
    return EXIT_OK if all_ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privsum", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def budget(p):
        p.add_argument("--max-seed-bits", type=int, default=DEFAULT_MAX_SEED_BITS,
                       help="refuse enumerations larger than this many seed bits (default %(default)s)")

    p = sub.add_parser("audit", help="audit one protocol instance")
    p.add_argument("--L", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--n1", type=int, help="clear bits per sequence; alpha = n1/n")
    p.add_argument("--T", type=int, help="collusion bound (default 0)")
    p.add_argument("--custom", help="JSON truth tables of a custom protocol")
    p.add_argument("--out", help="report path (default stdout)")
    budget(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("sweep", help="audit the time-sharing scheme over a parameter grid")
    p.add_argument("--L", type=int, nargs="+", required=True)
    p.add_argument("--n", type=int, nargs="+", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--n1", type=int, nargs="+", help="clear-bit counts (default 0..n)")
    g.add_argument("--alpha", nargs="+", help="alpha values as p/q; q must divide n")
    p.add_argument("--T", type=int, nargs="+", help="collusion bounds (default L-2)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="table path (default stdout)")
    budget(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fixtures", help="run the negative fixtures")
    p.add_argument("--export", metavar="DIR", help="also write each fixture's truth tables as JSON")
    p.add_argument("--out", help="write full fixture reports as JSON")
    budget(p)
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"privsum: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, CustomProtocolError, ValueError) as exc:
        print(f"privsum: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
