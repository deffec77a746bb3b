#!/usr/bin/env python3
"""
projcoh - Main entry point

Integral Čech cohomology and K-theory of rational cut-and-project tilings,
computed exactly from a lattice and a finite list of singular families.
Schemes come from the builtin catalog, from PROJCOH_SCHEME_DIR, or from a
JSON file given by path.
"""

import argparse
import json
import sys
from pathlib import Path

import pandas as pd
from dotenv import load_dotenv

from src.arrangement import arrangement_to_dict, close_arrangement, counts
from src.catalog import builtin_scheme, scheme_names
from src.cohomology import (
    fhk_cohomology, k_theory, low_degree_check, rank_check, torsion_bounds_check,
)
from src.scheme import load_scheme, save_scheme
from src.torus_mv import merge_routes, mv_cohomology, route_crosscheck
from src.utils import (
    EXIT_INFINITE_ORBITS, EXIT_INPUT_ERROR, EXIT_ROUTE_DISAGREEMENT, EXIT_UNSUPPORTED_CODIM,
    ConsistencyError, DepthExceeded, InfiniteOrbits, RationalityError, RouteDisagreement,
    SchemeError, UnsupportedCodim, parse_rational, print_ts,
)


TABLE_1 = [
    "ammann_beenker", "ammann_beenker_coloured", "ammann_beenker_decorated", "penrose",
    "generalized_penrose", "ttt", "socolar", "socolar_decorated", "heptagonal_b",
]
TABLE_3 = ["danzer", "ammann_kramer", "canonical_d6", "dual_canonical_d6"]


def log(args, message: str) -> None:
    """Progress goes to stderr when stdout carries JSON."""
    print_ts(message, file=sys.stderr if args.format == "json" else sys.stdout)


def emit(args, payload, table: pd.DataFrame) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, ensure_ascii=False))
    else:
        print(table.fillna("").to_string(index=False))


def resolve_scheme(args, name=None):
    """Builtin name, user-directory name, or path to a scheme JSON file."""
    name = name or args.scheme
    if not name:
        raise SchemeError("No scheme given; use --scheme NAME or --scheme PATH")
    gamma = parse_rational(args.gamma) if getattr(args, "gamma", None) else None
    path = Path(name)
    if path.suffix == ".json" or path.is_file():
        log(args, f"📁 Scheme file: {path}")
        return load_scheme(path)
    return builtin_scheme(name, gamma)


def compute(args, scheme, method: str):
    """Run the requested route(s) and the mandatory checks."""
    arr = close_arrangement(scheme, verbose=args.verbose)
    if method != "fhk" and arr.codim == 1:
        raise UnsupportedCodim("The torus arrangement route runs in codimension 2 and 3")
    report = None
    if method == "fhk":
        result = fhk_cohomology(arr, scheme.name)
        checked = result
    elif method == "mv":
        result = mv_cohomology(arr, scheme.name, verbose=args.verbose)
        checked = result
    else:
        checked = fhk_cohomology(arr, scheme.name)
        mv = mv_cohomology(arr, scheme.name, verbose=args.verbose)
        report = route_crosscheck(checked, mv)
        result = merge_routes(checked, mv, report)
        log(args, f"✅ Routes agree on {scheme.name}")

    checks = {
        "rank_formula": rank_check(arr, checked) if checked.method == "fhk" else None,
        "low_degree": low_degree_check(result, scheme.ambient_rank, scheme.nu),
        "torsion_bounds": torsion_bounds_check(result, scheme.nu, scheme.codim),
    }
    for label, check in checks.items():
        if check is not None and not check["ok"]:
            log(args, f"⚠️ {label} check failed: {'; '.join(check['failures'])}")
    return arr, result, checks, report


def cmd_list_schemes(args):
    rows = []
    for name in scheme_names():
        scheme = builtin_scheme(name)
        rows.append({"scheme": name, "N": scheme.ambient_rank, "n": scheme.codim,
                     "ν": scheme.nu, "families": len(scheme.families)})
    emit(args, rows, pd.DataFrame(rows))


def cmd_arrangement(args):
    scheme = resolve_scheme(args)
    log(args, f"🚀 Closing the arrangement of {scheme.summary()}")
    arr = close_arrangement(scheme, verbose=args.verbose)
    table = counts(arr)
    rows = []
    for r, level in enumerate(arr.levels):
        for i, cls in enumerate(level):
            row = {"r": r, "class": i, "stabilizer_rank": cls.dir.rank,
                   "offset": "(" + ",".join(str(x) for x in cls.offset) + ")"}
            for below, found in table["L_theta"].get((r, i), {}).items():
                row[f"L{below}^Θ"] = found
            rows.append(row)
    log(args, "📊 " + ", ".join(f"L{r}={c}" for r, c in enumerate(table["L"])))
    emit(args, arrangement_to_dict(arr), pd.DataFrame(rows))


def cmd_cohomology(args):
    scheme = resolve_scheme(args)
    log(args, f"🚀 Cohomology of {scheme.summary()} ({args.method})")
    arr, result, checks, report = compute(args, scheme, args.method)
    payload = result.to_dict()
    payload["checks"] = checks
    if report is not None:
        payload["crosscheck"] = report
    if args.verbose and args.method != "fhk":
        payload["arrangement"] = {"L": counts(arr)["L"]}
    emit(args, payload, pd.DataFrame([result.table_row()]))
    if args.format != "json":
        for s, text in sorted(result.annotations.items()):
            print(f"H^{s}: {text}")
        for key in ("t1_prime", "t1_double_prime", "t0_prime", "extension_quotient"):
            if key in result.diagnostics:
                print(f"{key}: {result.diagnostics[key]}")


def cmd_ktheory(args):
    scheme = resolve_scheme(args)
    log(args, f"🚀 K-theory of {scheme.summary()}")
    _, result, _, _ = compute(args, scheme, args.method)
    k = k_theory(result)
    payload = {"scheme": scheme.name, "K0": k.render(0), "K1": k.render(1), "annotation": k.annotation}
    emit(args, payload, pd.DataFrame([{"scheme": scheme.name, "K^0": k.render(0), "K^1": k.render(1)}]))
    if args.format != "json" and k.annotation:
        print(k.annotation)


def cmd_reproduce(args):
    names = TABLE_1 if args.table == 1 else TABLE_3
    rows, payload = [], []
    for name in names:
        log(args, f"🔗 {name}")
        scheme = resolve_scheme(args, name)
        _, result, _, _ = compute(args, scheme, args.method)
        row = result.table_row()
        if args.table == 3:
            for key, column in (("t1_prime", "t1'"), ("t1_double_prime", "t1''"), ("t0_prime", "t0'")):
                row[column] = str(result.diagnostics.get(key, ""))
            row["H^3 status"] = result.status[3]
        rows.append(row)
        payload.append(result.to_dict())
    df = pd.DataFrame(rows)
    columns = ["scheme"] + sorted((c for c in df.columns if c.startswith("H^") and c[2:].isdigit()),
                                  key=lambda c: -int(c[2:]))
    df = df[columns + [c for c in df.columns if c not in columns]]
    emit(args, payload, df)
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        df.fillna("").to_csv(args.output, index=False)
        log(args, f"📄 Table written to {args.output}")
    log(args, f"✅ Reproduced {len(rows)} rows")


def cmd_export_scheme(args):
    scheme = resolve_scheme(args)
    save_scheme(scheme, args.output)
    log(args, f"✅ {scheme.name} written to {args.output}")


COMMANDS = {
    "list-schemes": cmd_list_schemes,
    "arrangement": cmd_arrangement,
    "cohomology": cmd_cohomology,
    "ktheory": cmd_ktheory,
    "reproduce": cmd_reproduce,
    "export-scheme": cmd_export_scheme,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scheme", help="Builtin scheme name or path to a scheme JSON file")
    common.add_argument("--format", choices=["table", "json"], default="table", help="Output format")
    common.add_argument("--gamma", help="γ as p/q for generalized_penrose (default from PROJCOH_GAMMA or 1/3)")
    common.add_argument("--verbose", action="store_true", help="Log intermediate counts")

    parser = argparse.ArgumentParser(description="Integral cohomology of rational cut-and-project tilings")
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    subparsers.add_parser("list-schemes", parents=[common], help="List catalog schemes")
    subparsers.add_parser("arrangement", parents=[common], help="Dump the intersection arrangement")
    for name, text in (("cohomology", "Compute H^*(Ω)"), ("ktheory", "Compute K^0 and K^1")):
        sub = subparsers.add_parser(name, parents=[common], help=text)
        sub.add_argument("--method", choices=["fhk", "mv", "both"], default="fhk", help="Computation route")
    reproduce = subparsers.add_parser("reproduce", parents=[common], help="Recompute a reference table")
    reproduce.add_argument("--table", type=int, choices=[1, 3], required=True, help="Table number")
    reproduce.add_argument("--method", choices=["fhk", "mv", "both"], default="fhk", help="Computation route")
    reproduce.add_argument("--output", help="CSV file for the table")
    export = subparsers.add_parser("export-scheme", parents=[common], help="Write a scheme as JSON")
    export.add_argument("--output", required=True, help="Destination JSON file")
    return parser


def main():
    """Main entry point for the cohomology engine."""
    load_dotenv()

    parser = build_parser()
    args = parser.parse_args()

    if not args.command:
        parser.print_help()
        return

    try:
        COMMANDS[args.command](args)
    except KeyboardInterrupt:
        print_ts("❌ Interrupted by user", file=sys.stderr)
        sys.exit(EXIT_INPUT_ERROR)
    except (InfiniteOrbits, DepthExceeded) as e:
        print_ts(f"❌ Arrangement is not finite: {e}", file=sys.stderr)
        sys.exit(EXIT_INFINITE_ORBITS)
    except RouteDisagreement as e:
        print_ts(f"❌ Routes disagree: {e}", file=sys.stderr)
        sys.exit(EXIT_ROUTE_DISAGREEMENT)
    except UnsupportedCodim as e:
        print_ts(f"❌ Unsupported: {e}", file=sys.stderr)
        sys.exit(EXIT_UNSUPPORTED_CODIM)
    except (SchemeError, RationalityError) as e:
        print_ts(f"❌ Invalid scheme: {e}", file=sys.stderr)
        sys.exit(EXIT_INPUT_ERROR)
    except ConsistencyError as e:
        print_ts(f"❌ Internal consistency check failed: {e}", file=sys.stderr)
        sys.exit(EXIT_INPUT_ERROR)


if __name__ == "__main__":
    main()
