"""Command-line front end: ``tdesc compute|enumerate|verify|table``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from .cache import (
    CacheEntry,
    TableProvider,
    ValueTable,
    default_cache_path,
    format_value,
)
from .curves import DEFAULT_MAX_DEGREE, HARD_MAX_DEGREE
from .errors import (
    BaseUnavailable,
    CacheConflict,
    DegreeTooLarge,
    DimensionError,
    InvariantSyntaxError,
    NonGeneralConfig,
    UnsupportedShape,
)
from .invariant import Invariant, format_invariant, parse_invariant
from .oracle import OracleProvider, evaluate_seeded, solved_curves
from .recursion import Reducer, ValueCache
from .sweep import family_invariants, sweep_invariants

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_UNSUPPORTED = 4
EXIT_BASE = 5
EXIT_MISMATCH = 6


class Mismatch(Exception):
    pass


def _err(msg: str) -> None:
    print(f"tdesc: {msg}", file=sys.stderr)


def _make_base(spec: str, seed: int):
    if spec == "oracle":
        return OracleProvider(seed)
    if spec == "table" or spec.startswith("table:"):
        path = spec.partition(":")[2] or default_cache_path()
        if not path:
            raise ValueError("--base table needs a file (table:FILE or $TDESC_CACHE)")
        return TableProvider.from_file(path)
    raise ValueError(f"unknown base provider {spec!r}")


def _record(entries: list[CacheEntry]) -> None:
    """Merge results into the cache named by $TDESC_CACHE, if any."""
    path = default_cache_path()
    if path is None:
        return
    table = ValueTable.load(path) if path.exists() else ValueTable()
    for entry in entries:
        table.add(entry)
    table.dump(path)


def cmd_compute(args) -> int:
    inv = parse_invariant(args.expr)
    base = _make_base(args.base, args.seed)
    value, trace = Reducer(base, ValueCache()).reduce(inv)
    seeds = (args.seed,) if args.base == "oracle" else ()
    if args.check:
        direct, _ = evaluate_seeded(inv, args.seed)
        if direct != value:
            raise Mismatch(
                f"{format_invariant(inv)}: recursion gives {format_value(value)}, "
                f"curve count gives {format_value(direct)}"
            )
    if args.json:
        out = {
            "invariant": format_invariant(inv),
            "value": format_value(value),
            "engine": "recursion",
            "base": base.name,
            "seeds": list(seeds),
        }
        if args.trace:
            out["trace"] = trace.to_dict()
        print(json.dumps(out, indent=2))
    else:
        if args.trace:
            print("\n".join(trace.render()))
        print(format_value(value))
    _record([CacheEntry(inv, value, "recursion", seeds)])
    return EXIT_OK


def cmd_enumerate(args) -> int:
    inv = parse_invariant(args.expr)
    value, config = evaluate_seeded(inv, args.seed, max_degree=args.max_degree)
    if args.dump_curves:
        curves = solved_curves(inv, config, max_degree=args.max_degree)
        dump = {
            "invariant": format_invariant(inv),
            "seed": args.seed,
            "points": {str(k): [str(x), str(y)] for k, (x, y) in config.points.items()},
            "lines": {str(k): [str(v) for v in ln.root] for k, ln in config.lines.items()},
            "curves": [c.as_dict() for c in curves],
        }
        Path(args.dump_curves).write_text(json.dumps(dump, indent=2) + "\n", encoding="utf-8")
    if args.json:
        print(json.dumps({"invariant": format_invariant(inv), "value": format_value(value),
                          "engine": "oracle", "seeds": [args.seed]}, indent=2))
    else:
        print(format_value(value))
    _record([CacheEntry(inv, value, "oracle", (args.seed,))])
    return EXIT_OK


def cmd_verify(args) -> int:
    seeds = list(range(args.seeds))
    reducer = Reducer(OracleProvider(seeds[0], max_degree=args.max_degree), ValueCache())
    failures = 0
    checked = 0
    start = time.perf_counter()
    for inv in sweep_invariants(args.max_degree, args.max_insertions):
        values = [evaluate_seeded(inv, s, max_degree=args.max_degree)[0] for s in seeds]
        expected, _ = reducer.reduce(inv)
        checked += 1
        if any(v != values[0] for v in values) or values[0] != expected:
            failures += 1
            shown = ", ".join(format_value(v) for v in values)
            print(f"MISMATCH {format_invariant(inv)}: recursion {format_value(expected)}, "
                  f"curve counts [{shown}]")
        elif args.verbose:
            print(f"ok {format_invariant(inv)} = {format_value(expected)}")
    if args.table:
        for entry in ValueTable.load(args.table):
            try:
                direct, _ = evaluate_seeded(entry.invariant, seeds[0], max_degree=args.max_degree)
            except (UnsupportedShape, DegreeTooLarge):
                continue
            checked += 1
            if direct != entry.value:
                failures += 1
                print(f"MISMATCH {format_invariant(entry.invariant)}: table "
                      f"{format_value(entry.value)}, curve count {format_value(direct)}")
    elapsed = time.perf_counter() - start
    print(f"{checked} checked, {failures} mismatches over seeds {seeds} ({elapsed:.1f}s)")
    return EXIT_MISMATCH if failures else EXIT_OK


def _select(args) -> list[Invariant]:
    invs = family_invariants(args.family, max_degree=args.degree if args.degree is not None else DEFAULT_MAX_DEGREE)
    if args.degree is not None:
        invs = (i for i in invs if i.degree == args.degree)
    return list(invs)


def cmd_table(args) -> int:
    reducer = Reducer(OracleProvider(args.seed), ValueCache())
    rows = []
    for inv in _select(args):
        value, _ = reducer.reduce(inv)
        rows.append(CacheEntry(inv, value, "recursion", (args.seed,)))
    fmt = args.format or _format_from_suffix(args.out)
    out = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        if fmt == "json":
            json.dump([_row_dict(e) for e in rows], out, indent=2)
            out.write("\n")
        elif fmt == "cache":
            if args.out:
                out.close()
                ValueTable(rows).dump(args.out)
            else:
                print("\n".join(e.to_line() for e in ValueTable(rows)))
        else:
            writer = csv.DictWriter(out, fieldnames=["invariant", "degree", "value", "engine", "seeds"])
            writer.writeheader()
            writer.writerows(_row_dict(e) for e in rows)
    finally:
        if args.out and not out.closed:
            out.close()
    return EXIT_OK


def _row_dict(entry: CacheEntry) -> dict:
    return {
        "invariant": format_invariant(entry.invariant),
        "degree": entry.invariant.degree,
        "value": format_value(entry.value),
        "engine": entry.engine,
        "seeds": ",".join(map(str, entry.seeds)),
    }


def _format_from_suffix(path: str | None) -> str:
    if path and path.endswith(".json"):
        return "json"
    if path and path.endswith((".tdc", ".cache")):
        return "cache"
    return "csv"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tdesc",
        description="Exact planar tropical descendant invariants by recursion and by curve counting.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="evaluate with the recursion engine")
    p.add_argument("expr", help='invariant, e.g. "<tau_1(1) tau_1(2)^2>_2"')
    p.add_argument("--base", default="oracle",
                   help="provider for pure point invariants: oracle, table:FILE or table ($TDESC_CACHE)")
    p.add_argument("--seed", type=int, default=0, help="configuration seed for the oracle provider")
    p.add_argument("--trace", action="store_true", help="show the derivation")
    p.add_argument("--json", action="store_true", help="print JSON")
    p.add_argument("--check", action="store_true",
                   help="also count curves directly and fail on disagreement")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("enumerate", help="evaluate by counting tropical curves")
    p.add_argument("expr")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dump-curves", metavar="FILE", help="write the solved curves as JSON")
    p.add_argument("--max-degree", type=int, default=DEFAULT_MAX_DEGREE, choices=range(HARD_MAX_DEGREE + 1))
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify", help="compare both engines on the sweep of small invariants")
    p.add_argument("--max-degree", type=int, default=DEFAULT_MAX_DEGREE, choices=range(HARD_MAX_DEGREE + 1))
    p.add_argument("--max-insertions", type=int, default=7)
    p.add_argument("--seeds", type=int, default=3, help="number of configurations per invariant")
    p.add_argument("--table", metavar="FILE", help="also check the values stored in a cache file")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table", help="batch values to CSV, JSON or cache format")
    p.add_argument("--degree", type=int, help="only this degree (default: all up to 2)")
    p.add_argument("--family", default="all", help="all, points or trr")
    p.add_argument("--out", metavar="FILE", help="output path (default stdout)")
    p.add_argument("--format", choices=["csv", "json", "cache"], help="default: from the file suffix, else csv")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_table)
    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantSyntaxError as exc:
        _err(f"syntax error: {exc}")
        return EXIT_PARSE
    except DimensionError as exc:
        _err(f"dimension: {exc}")
        return EXIT_DIMENSION
    except (UnsupportedShape, DegreeTooLarge) as exc:
        _err(f"unsupported: {exc}")
        return EXIT_UNSUPPORTED
    except BaseUnavailable as exc:
        _err(str(exc))
        return EXIT_BASE
    except (Mismatch, CacheConflict) as exc:
        _err(f"verification failed: {exc}")
        return EXIT_MISMATCH
    except NonGeneralConfig as exc:
        _err(f"degenerate configuration: {exc}")
        return 1
    except (OSError, ValueError) as exc:
        _err(str(exc))
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
