"""Command-line interface.

Exit codes: 0 success (``test``: normality retained), 1 ``test`` rejected
normality, 2 usage, input or runtime error. Reports go to stdout,
diagnostics to stderr. Output files are written atomically.

Environment: ``MVNPROJ_REPS`` sets the default replication count,
``MVNPROJ_WORKERS`` the default number of worker processes.
"""

import argparse
import os
import sys

from . import harness
from .dataio import CsvFormatError, format_matrix, read_matrix
from .linalg import InsufficientDataError, SingularMatrixError
from .neyman import PENALTY_MODES, SelectionRule
from .projtest import decide, mc_pvalue, proj_statistic
from .rng import RngStream
from .samplers import DESIGN_NAMES, null_bivariate, parse_design, sample_design

EXIT_RETAIN, EXIT_REJECT, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _name_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _env_int(name, default):
    value = os.environ.get(name)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        raise CliError(f"environment variable {name} must be an integer, got {value!r}")


def _add_rule_flags(sub):
    sub.add_argument("--dmax", type=int, default=10, help="maximum smooth-test order")
    sub.add_argument("--mode", choices=PENALTY_MODES, default="switching",
                     help="penalty for the uniformity part")
    sub.add_argument("--c", dest="switch_const", type=float, default=2.4,
                     help="switching threshold constant")
    sub.add_argument("--rank-mode", choices=PENALTY_MODES, default="schwarz",
                     help="penalty for the rank parts")
    sub.add_argument("--df", type=int, default=None,
                     help="chi-square degrees of freedom of the projection (default p)")


def _add_run_flags(sub, default_reps):
    sub.add_argument("--reps", type=int, default=default_reps)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--workers", type=int, default=None)
    sub.add_argument("--out", help="output CSV path")


def build_parser(default_reps=20000):
    parser = _Parser(prog="mvnproj", description="Mahalanobis-projection tests for multivariate normality")
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = subs.add_parser("test", help="test a CSV data matrix")
    t.add_argument("input")
    t.add_argument("--table", default="published",
                   help="critical table CSV, or 'published' for the built-in values")
    t.add_argument("--mc-pvalue", type=int, metavar="REPS",
                   help="decide by a Monte Carlo p-value instead of a table")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--workers", type=int, default=None)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--interpolate", action="store_true",
                   help="interpolate the table in log n between tabulated sizes")
    t.add_argument("--format", choices=("text", "kv"), default="text")
    _add_rule_flags(t)

    tab = subs.add_parser("tabulate", help="tabulate null critical values")
    tab.add_argument("--p", type=int, default=2)
    tab.add_argument("--n", type=_int_list, required=True)
    tab.add_argument("--alpha", type=_float_list, default=list(harness.PUBLISHED_ALPHAS))
    _add_run_flags(tab, default_reps)
    _add_rule_flags(tab)

    ty = subs.add_parser("type1", help="Type I error study under bivariate normal nulls")
    ty.add_argument("--rho", type=_float_list, required=True)
    ty.add_argument("--n", type=_int_list, required=True)
    ty.add_argument("--table", default="published")
    ty.add_argument("--alpha", type=float, default=0.05)
    ty.add_argument("--interpolate", action="store_true")
    _add_run_flags(ty, default_reps)
    _add_rule_flags(ty)

    pw = subs.add_parser("power", help="power study on alternative designs")
    pw.add_argument("--designs", type=_name_list, required=True)
    pw.add_argument("--n", type=_int_list, required=True)
    pw.add_argument("--tests", type=_name_list, default=list(harness.TESTS))
    pw.add_argument("--table", default="published")
    pw.add_argument("--alpha", type=float, default=0.05)
    pw.add_argument("--interpolate", action="store_true")
    pw.add_argument("--hz-calibration", choices=("lognormal", "mc"), default="lognormal")
    pw.add_argument("--mardia-combine", choices=("either", "bonferroni"), default="either")
    pw.add_argument("--mardia-divisor", choices=("n-1", "n"), default="n-1")
    _add_run_flags(pw, default_reps)
    _add_rule_flags(pw)

    sm = subs.add_parser("sample", help="draw a dataset from a design")
    sm.add_argument("--design", required=True,
                    help=f"one of {', '.join(DESIGN_NAMES)} or N2 (with --rho)")
    sm.add_argument("--rho", type=float, default=0.0)
    sm.add_argument("--n", type=int, required=True)
    sm.add_argument("--seed", type=int, default=0)
    sm.add_argument("--stream", type=int, default=0)
    sm.add_argument("--out", help="output CSV path (default stdout)")
    return parser


def _rule(args):
    return SelectionRule(args.dmax, args.mode, args.switch_const, args.rank_mode)


def _validate(args):
    def positive(name):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            raise CliError(f"--{name.replace('_', '-')} must be positive, got {value}")

    for name in ("reps", "workers", "n", "p", "dmax", "df", "mc_pvalue"):
        if isinstance(getattr(args, name, None), int):
            positive(name)
    if getattr(args, "switch_const", 1.0) <= 0:
        raise CliError("--c must be positive")
    alphas = args.alpha if isinstance(getattr(args, "alpha", None), list) else [getattr(args, "alpha", 0.05)]
    for a in alphas:
        if not 0.0 < a < 1.0:
            raise CliError(f"--alpha must lie in (0, 1), got {a}")
    for n in (args.n if isinstance(getattr(args, "n", None), list) else []):
        if n < 1:
            raise CliError(f"--n entries must be positive, got {n}")
    rhos = getattr(args, "rho", None)
    for rho in rhos if isinstance(rhos, list) else [] if rhos is None else [rhos]:
        if not -1.0 < rho < 1.0:
            raise CliError(f"--rho entries must lie in (-1, 1), got {rho}")
    if getattr(args, "reps", None) is not None and args.command == "tabulate" and args.reps < 1000:
        raise CliError(f"--reps must be at least 1000 for tabulation, got {args.reps}")
    if args.command == "test" and args.mc_pvalue is not None and args.mc_pvalue < 100:
        raise CliError("--mc-pvalue needs at least 100 replications")
    if args.command == "power":
        bad = [t for t in args.tests if t not in harness.TESTS]
        if bad:
            raise CliError(f"unknown tests {', '.join(bad)}; valid: {', '.join(harness.TESTS)}")
        for d in args.designs:
            parse_design(d)


def _load_table(spec):
    if spec == "published":
        return harness.published_table()
    try:
        return harness.CriticalTable.load(spec)
    except OSError as exc:
        raise CliError(f"cannot read critical table {spec}: {exc.strerror}")


def _emit(text, out):
    if out:
        harness.atomic_write(out, text)
    else:
        sys.stdout.write(text)


def cmd_test(args):
    matrix = read_matrix(args.input)
    n, p = matrix.shape
    if p < 2:
        raise CliError(f"need at least 2 columns, found {p}")
    if n <= p:
        raise CliError(f"need more rows than columns (n > p), found n={n}, p={p}")
    rule = _rule(args)
    report = proj_statistic(matrix.values, rule, args.df)
    report.extra["rows_read"] = n
    if matrix.blank_lines:
        report.extra["blank_lines_skipped"] = matrix.blank_lines
    if args.mc_pvalue:
        report.pvalue = mc_pvalue(matrix.values, args.mc_pvalue, RngStream(args.seed), rule,
                                  args.df, args.workers)
        report.decision = "reject" if report.pvalue <= args.alpha else "retain"
    else:
        decide(report, _load_table(args.table), args.alpha, args.interpolate)
    print(report.to_text() if args.format == "text" else report.to_keyvalue())
    return EXIT_REJECT if report.decision == "reject" else EXIT_RETAIN


def _grid(title, row_label, rows, cols, cell):
    lines = [title, f"{row_label:>8} " + " ".join(f"{c:>10}" for c in cols)]
    for r in rows:
        lines.append(f"{r:>8} " + " ".join(f"{cell(r, c):>10}" for c in cols))
    return "\n".join(lines)


def cmd_tabulate(args):
    table = harness.tabulate_critical(args.p, args.n, args.alpha, args.reps, args.seed,
                                      _rule(args), args.df, args.workers)
    if args.out:
        table.save(args.out)
    else:
        sys.stdout.write(table.to_csv())
    alphas = sorted(args.alpha, reverse=True)
    print(_grid(f"Critical values (p={args.p}, reps={args.reps}, seed={args.seed})", "n",
                args.n, [f"{a:g}" for a in alphas],
                lambda n, a: f"{table.get(args.p, n, float(a)).critical:.4f}"),
          file=sys.stdout if args.out else sys.stderr)
    return EXIT_RETAIN


def cmd_type1(args):
    results = harness.type1_study(args.rho, args.n, args.reps, _load_table(args.table),
                                  args.seed, _rule(args), args.df, args.alpha,
                                  args.interpolate, args.workers)
    _emit(harness.studies_to_csv(results), args.out)
    rates = {(r.design, r.n): r.rate for r in results}
    print(_grid(f"Type I error at alpha={args.alpha:g} (reps={args.reps})", "rho", args.rho,
                args.n, lambda rho, n: f"{rates[(null_bivariate(rho).name, n)]:.4f}"),
          file=sys.stdout if args.out else sys.stderr)
    return EXIT_RETAIN


def cmd_power(args):
    designs = [parse_design(d) for d in args.designs]
    results = harness.power_study(
        designs, args.n, args.reps, args.tests, _load_table(args.table), args.seed,
        _rule(args), args.df, args.alpha, args.interpolate, args.hz_calibration,
        mardia_opts={"combine": args.mardia_combine, "divisor": args.mardia_divisor},
        workers=args.workers)
    _emit(harness.studies_to_csv(results), args.out)
    rates = {(r.design, r.n, r.test): r.rate for r in results}
    blocks = [
        _grid(f"Design {d.name}: power at alpha={args.alpha:g} (reps={args.reps})", "test",
              args.tests, args.n, lambda t, n, d=d: f"{rates[(d.name, n, t)]:.3f}")
        for d in designs
    ]
    print("\n".join(blocks), file=sys.stdout if args.out else sys.stderr)
    return EXIT_RETAIN


def cmd_sample(args):
    name = args.design.strip().upper()
    design = null_bivariate(args.rho) if name == "N2" else parse_design(name)
    data = sample_design(design, args.n, RngStream(args.seed, args.stream))
    header = [f"x{j + 1}" for j in range(data.shape[1])]
    _emit(format_matrix(data, header), args.out)
    return EXIT_RETAIN


COMMANDS = {"test": cmd_test, "tabulate": cmd_tabulate, "type1": cmd_type1,
            "power": cmd_power, "sample": cmd_sample}


def main(argv=None):
    try:
        parser = build_parser(_env_int("MVNPROJ_REPS", 20000))
        args = parser.parse_args(argv)
        if getattr(args, "workers", None) is None and hasattr(args, "workers"):
            args.workers = _env_int("MVNPROJ_WORKERS", 1)
        _validate(args)
        return COMMANDS[args.command](args)
    except (CliError, CsvFormatError, InsufficientDataError, SingularMatrixError,
            harness.MissingEntryError, ValueError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        print(f"mvnproj: error: {message}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"mvnproj: error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
