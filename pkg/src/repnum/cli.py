"""Command-line front end: evaluation, bulk moments, verification, calibration.

Output is CSV (comma separator, '.' decimal, header row, LF line ends,
reals printed with 12 significant digits) to stdout or --out.  Exit codes:
0 success, 1 verification failure, 2 usage error, 3 capacity exceeded.
"""

import argparse
import csv
import io
import math
import os
import sys

import numpy as np

from . import acceptance, arith, asymp, moments, repfun, selberg
from .errors import CapacityError
from .repfun import RepFamily

DEFAULT_CONSTANTS = "./repnum-constants.txt"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _emit(header, rows, out_path):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    data = buf.getvalue()
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data)


def _parse_grid(spec):
    try:
        lo, hi, factor = (int(part) for part in spec.split(":"))
    except ValueError:
        raise ValueError(f"--grid wants lo:hi:factor, got {spec!r}")
    if lo < 1 or hi < lo or factor < 2:
        raise ValueError("--grid needs 1 <= lo <= hi and factor >= 2")
    xs, x = [], lo
    while x <= hi:
        xs.append(x)
        x *= factor
    return xs


def _xs_from(args):
    if args.grid:
        return _parse_grid(args.grid)
    if args.x is None:
        raise ValueError("need --x or --grid")
    return [args.x]


def _table_for(xmax, spf=False):
    limit = max(math.isqrt(xmax) + 1, 100)
    return arith.prime_table(limit, spf_cap=limit if spf else 0)


def _add_common(p):
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.add_argument("--segment-size", type=int,
                   default=moments.DEFAULT_SEGMENT_SIZE)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--constants", default=DEFAULT_CONSTANTS)
    p.add_argument("--cutoff", type=int, default=asymp.DEFAULT_LANDAU_CUTOFF,
                   help="prime cutoff for truncated products")


def _build_parser():
    top = argparse.ArgumentParser(
        prog="repnum",
        description="representation-number moments, sieve bounds, and "
                    "asymptotic verification")
    sub = top.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("eval", help="evaluate one representation function")
    p.add_argument("--family", required=True)
    p.add_argument("--n", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("table", help="build (and optionally cache) a prime table")
    p.add_argument("--limit", type=int, required=True)
    p.add_argument("--cache", action="store_true",
                   help="store/reuse the bitset cache under REPNUM_CACHE_DIR")
    _add_common(p)

    p = sub.add_parser("moments", help="bulk power/binomial moments")
    p.add_argument("--family", required=True)
    p.add_argument("--x", type=int)
    p.add_argument("--grid", help="geometric grid lo:hi:factor")
    p.add_argument("--power", type=int)
    p.add_argument("--binomial", type=int)
    p.add_argument("--omega", type=int,
                   help="restrict to omega(n) = K")
    p.add_argument("--omega-star", type=int, dest="omega_star",
                   help="restrict to omega_star(n) = K")
    _add_common(p)

    p = sub.add_parser("zeroth", help="zeroth moments (positivity counts)")
    p.add_argument("--family", required=True)
    p.add_argument("--x", type=int)
    p.add_argument("--grid")
    _add_common(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", required=True,
                   choices=acceptance.SUITES + ("all",))
    p.add_argument("--x", type=int, help="scale override for oracle/identities")
    _add_common(p)

    p = sub.add_parser("sieve-demo", help="bound vs exact count on random problems")
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--seed", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("constants", help="print the constants file")
    _add_common(p)

    p = sub.add_parser("calibrate", help="fit and store the tuned constants")
    p.add_argument("--grid-max", type=int, default=10**7)
    _add_common(p)
    return top


def _cmd_eval(args):
    fam = RepFamily.from_name(args.family)
    table = _table_for(args.n, spf=True)
    if fam is RepFamily.R0:
        value = repfun.r0_formula(arith.factor(args.n, table))
    elif fam is RepFamily.R0_STAR:
        value = repfun.r0_star(arith.factor(args.n, table))
    else:
        value = repfun.rep_enumerate(fam, args.n, table)
    _emit(["family", "n", "value"], [[fam.value, args.n, value]], args.out)
    return 0


def _cmd_table(args):
    if args.cache:
        table = arith.cached_prime_table(args.limit)
        path = arith.cache_path(args.limit)
    else:
        table = arith.prime_table(args.limit)
        path = ""
    _emit(["limit", "primes", "spf_limit", "cache_path"],
          [[table.limit, len(table.primes), table.spf_limit, path]], args.out)
    return 0


def _cmd_moments(args):
    fam = RepFamily.from_name(args.family)
    xs = _xs_from(args)
    if args.power is not None and args.binomial is not None:
        raise ValueError("choose one of --power / --binomial")
    if args.omega is not None and args.omega_star is not None:
        raise ValueError("choose one of --omega / --omega-star")
    omega_filter = None
    filt_label = ""
    if args.omega is not None:
        omega_filter = ("omega", args.omega)
        filt_label = f"omega={args.omega}"
    elif args.omega_star is not None:
        omega_filter = ("omega_star", args.omega_star)
        filt_label = f"omega_star={args.omega_star}"
    table = _table_for(max(xs))
    kw = dict(omega_filter=omega_filter, segment_size=args.segment_size,
              workers=args.workers)
    if args.binomial is not None:
        mode, idx = "binomial", args.binomial
        vals = moments.binomial_moment_grid(fam, xs, idx, table, **kw)
    else:
        mode, idx = "power", 1 if args.power is None else args.power
        vals = moments.power_moment_grid(fam, xs, idx, table, **kw)
    rows = [[fam.value, x, mode, idx, filt_label, v]
            for x, v in zip(xs, vals)]
    _emit(["family", "x", "mode", "index", "filter", "value"], rows, args.out)
    return 0


def _cmd_zeroth(args):
    fam = RepFamily.from_name(args.family)
    xs = _xs_from(args)
    table = _table_for(max(xs))
    vals = moments.zeroth_moment_grid(fam, xs, table,
                                      segment_size=args.segment_size,
                                      workers=args.workers)
    _emit(["family", "x", "value"],
          [[fam.value, x, v] for x, v in zip(xs, vals)], args.out)
    return 0


def _cmd_verify(args):
    suites = acceptance.SUITES if args.suite == "all" else (args.suite,)
    constants = None
    if "calibrated" in suites:
        if not os.path.exists(args.constants):
            sys.stderr.write(
                f"constants file {args.constants!r} not found; run "
                f"`repnum calibrate` first\n")
            return 2
        constants = asymp.read_constants(args.constants)
    table = arith.prime_table(10**4, spf_cap=10**4)
    rows, ok = [], True
    for suite in suites:
        for res in acceptance.run_suite(suite, table, constants=constants,
                                        workers=args.workers, x=args.x):
            ok &= res.passed
            rows.append([suite, res.name,
                         "pass" if res.passed else "FAIL", res.detail])
    _emit(["suite", "check", "status", "detail"], rows, args.out)
    return 0 if ok else 1


def _cmd_sieve_demo(args):
    problems = selberg.random_problems(args.count, seed=args.seed,
                                       box_max=500, z_max=40)
    rows = []
    for pr in problems:
        bound = selberg.sieve_upper_bound(pr)
        exact = selberg.sifted_count_exact(pr)
        forms = "|".join(f"{f.u}:{f.v}" for f in pr.forms)
        rows.append([pr.variant, pr.box, pr.z, float(pr.xi), pr.m, pr.ell,
                     forms, bound, exact, bound >= exact])
    _emit(["variant", "box", "z", "xi", "m", "ell", "forms",
           "upper_bound", "exact", "dominates"], rows, args.out)
    return 0


def _cmd_constants(args):
    if not os.path.exists(args.constants):
        sys.stderr.write(f"constants file {args.constants!r} not found; run "
                         f"`repnum calibrate` first\n")
        return 2
    values = asymp.read_constants(args.constants)
    _emit(["key", "value"], [[k, v] for k, v in sorted(values.items())],
          args.out)
    return 0


def _cmd_calibrate(args):
    table = arith.prime_table(10**4, spf_cap=10**4)
    values, notes = asymp.calibrate(table, grid_max=args.grid_max,
                                    segment_size=args.segment_size,
                                    workers=args.workers, cutoff=args.cutoff)
    asymp.write_constants(args.constants, values, notes)
    _emit(["key", "value"], [[k, values[k]] for k in sorted(values)],
          args.out)
    return 0


_COMMANDS = {
    "eval": _cmd_eval,
    "table": _cmd_table,
    "moments": _cmd_moments,
    "zeroth": _cmd_zeroth,
    "verify": _cmd_verify,
    "sieve-demo": _cmd_sieve_demo,
    "constants": _cmd_constants,
    "calibrate": _cmd_calibrate,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return _COMMANDS[args.verb](args)
    except CapacityError as exc:
        sys.stderr.write(f"capacity: {exc}\n")
        return 3
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
