#!/usr/bin/env python3
"""
Chain-of-Loops Pencil Toolkit - command line

Usage:
  python pencil_cli.py table --d-min 2 --d-max 10
  python pencil_cli.py verify prop2 --g 4
  python pencil_cli.py verify brill-noether --g 2 --r 1 --d 1
  python pencil_cli.py paths --g 6 --symmetric
  python pencil_cli.py chain --g 2 > chain.graph
  python pencil_cli.py pencil --path 1,2,1 > pencil.div
  python pencil_cli.py rank chain.graph pencil.div
  python pencil_cli.py reduce chain.graph pencil.div --base v_0

Defaults come from PENCILS_* environment variables (or a .env file); flags win.
Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

import argparse
import dataclasses
import logging
import sys
from fractions import Fraction
from typing import List, Optional

from chip_firing import format_divisor, parse_divisor, rank, reduce
from config import OUTPUT_FORMATS, SUITES, PencilSettings
from errors import (
    CertificationError,
    InvalidFunctionError,
    InvalidInputError,
    InvalidParameterError,
    InvalidSupportError,
    ParseError,
    PencilError,
    PrecisionError,
    UnsupportedGraphError,
)
from graph_core import (
    ModelGraph,
    build_chain_of_loops,
    format_chain,
    natural_granularity,
    parse_graph,
    parse_rational,
    refine,
)
from lattice_paths import (
    LatticePath,
    brill_noether_count,
    catalan_count,
    enumerate_paths,
    enumerate_symmetric_paths,
    path_to_divisor,
    symmetric_count_closed_form,
)
from verification import run_suite

logger = logging.getLogger(__name__)

USAGE_ERRORS = (ParseError, InvalidParameterError, InvalidInputError, InvalidSupportError,
                InvalidFunctionError, UnsupportedGraphError)


def table_lines(d_min: int, d_max: int, output_format: str = 'text',
                with_formula: bool = False) -> List[str]:
    """Rows d, g = 2d-2, lambda, lambda', lambda'/lambda for d_min..d_max."""
    if not 2 <= d_min <= d_max:
        raise InvalidParameterError(f"need 2 <= d-min <= d-max, got {d_min}..{d_max}")
    header = ["d", "g", "lambda", "lambda'", "ratio"]
    if with_formula:
        header.append("bn-count")
    rows = []
    for d in range(d_min, d_max + 1):
        g = 2 * d - 2
        lam = catalan_count(d)
        lam_sym = symmetric_count_closed_form(d)
        row = [str(d), str(g), str(lam), str(lam_sym), f"{lam_sym / lam:.4f}"]
        if with_formula:
            general = brill_noether_count(g, 1, d)
            if general != lam:
                raise CertificationError(f"general count {general} != Catalan count {lam} at d={d}")
            row.append(str(general))
        rows.append(row)

    if output_format == 'tsv':
        return ["\t".join(header)] + ["\t".join(row) for row in rows]
    widths = [max(len(header[k]), *(len(row[k]) for row in rows)) for k in range(len(header))]
    return [" ".join(cell.rjust(w) for cell, w in zip(line, widths)) for line in [header] + rows]


def _read(path: str) -> str:
    try:
        with open(path, 'r') as f:
            return f.read()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from exc


def _load(graph_file: str, divisor_file: str, granularity: Optional[Fraction]):
    graph = parse_graph(_read(graph_file))
    divisor = parse_divisor(_read(divisor_file), graph)
    if granularity is None:
        q = natural_granularity(graph, divisor.support())
    else:
        q = granularity
    return graph, divisor, refine(graph, q)


def _base_point(graph: ModelGraph, name: Optional[str]):
    vertex = graph.vertices[0] if name is None else name
    return graph.vertex_point(vertex)


def cmd_table(args, settings: PencilSettings) -> int:
    for line in table_lines(args.d_min, args.d_max, settings.output_format, args.with_formula):
        print(line)
    return 0


def cmd_verify(args, settings: PencilSettings) -> int:
    report = run_suite(args.suite, args.g, settings, ell=args.ell,
                       granularity=settings.granularity, r=args.r, d=args.d)
    lines = report.tsv_lines() if settings.output_format == 'tsv' else report.text_lines()
    for line in lines:
        print(line)
    return report.exit_code


def cmd_rank(args, settings: PencilSettings) -> int:
    graph, divisor, refined = _load(args.graph, args.divisor, settings.granularity)
    result = rank(refined, divisor)
    print(f"rank: {result.rank}")
    if result.rank >= 0:
        print(f"# witness E of degree {result.rank + 1} with |D - E| empty")
        print(format_divisor(graph, result.witness), end="")
    return 0


def cmd_reduce(args, settings: PencilSettings) -> int:
    graph, divisor, refined = _load(args.graph, args.divisor, settings.granularity)
    base = _base_point(graph, args.base)
    print(f"# {base}-reduced form")
    print(format_divisor(graph, reduce(refined, divisor, base)), end="")
    return 0


def cmd_paths(args, settings: PencilSettings) -> int:
    paths = enumerate_symmetric_paths(args.g) if args.symmetric else enumerate_paths(args.g)
    if settings.output_format == 'tsv':
        print("path\tsymmetric")
        for p in paths:
            print(f"{p}\t{'yes' if p.is_symmetric() else 'no'}")
    else:
        for p in paths:
            print(p)
        print(f"# {len(paths)} path(s)")
    return 0


def cmd_chain(args, settings: PencilSettings) -> int:
    print(format_chain(build_chain_of_loops(args.g, args.ell, args.m)), end="")
    return 0


def cmd_pencil(args, settings: PencilSettings) -> int:
    path = LatticePath.parse(args.path)
    chain = build_chain_of_loops(path.g, args.ell)
    pencil = path_to_divisor(path, chain, settings.granularity, settings.max_refinements)
    print(f"# D_p for p = {path}, granularity {pencil.granularity}")
    print(format_divisor(chain.graph, pencil.divisor), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pencil_cli.py",
        description="Linear pencils on the chain of loops: counts, divisors, verification suites")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument("--format", choices=OUTPUT_FORMATS, default=None,
                        help="output format (default: PENCILS_FORMAT or text)")
    # also accepted after the subcommand
    format_flag = argparse.ArgumentParser(add_help=False)
    format_flag.add_argument("--format", choices=OUTPUT_FORMATS, default=argparse.SUPPRESS,
                             help="output format (default: PENCILS_FORMAT or text)")
    sub = parser.add_subparsers(dest="command", required=True)

    table = sub.add_parser("table", parents=[format_flag],
                           help="lambda and lambda' for a range of degrees")
    table.add_argument("--d-min", type=int, default=2)
    table.add_argument("--d-max", type=int, default=10)
    table.add_argument("--with-formula", action="store_true",
                       help="also print the general Brill-Noether count")
    table.set_defaults(handler=cmd_table)

    verify = sub.add_parser("verify", parents=[format_flag], help="run a verification suite")
    verify.add_argument("suite", choices=SUITES)
    verify.add_argument("--g", type=int, required=True)
    verify.add_argument("--ell", default=None, help="long edge length, e.g. 6 or 13/2")
    verify.add_argument("--granularity", default=None)
    verify.add_argument("--r", type=int, default=None, help="rank (brill-noether)")
    verify.add_argument("--d", type=int, default=None, help="degree (brill-noether)")
    verify.add_argument("--max-seconds", type=float, default=None)
    verify.add_argument("--jobs", type=int, default=None)
    verify.set_defaults(handler=cmd_verify)

    rank_cmd = sub.add_parser("rank", parents=[format_flag], help="rank of a divisor on a graph file")
    rank_cmd.add_argument("graph")
    rank_cmd.add_argument("divisor")
    rank_cmd.add_argument("--granularity", default=None)
    rank_cmd.set_defaults(handler=cmd_rank)

    reduce_cmd = sub.add_parser("reduce", parents=[format_flag],
                                help="reduced form of a divisor at a vertex")
    reduce_cmd.add_argument("graph")
    reduce_cmd.add_argument("divisor")
    reduce_cmd.add_argument("--base", default=None, help="base vertex (default: first vertex)")
    reduce_cmd.add_argument("--granularity", default=None)
    reduce_cmd.set_defaults(handler=cmd_reduce)

    paths = sub.add_parser("paths", parents=[format_flag], help="list lattice paths of length g")
    paths.add_argument("--g", type=int, required=True)
    paths.add_argument("--symmetric", action="store_true", help="palindromic paths only")
    paths.set_defaults(handler=cmd_paths)

    chain = sub.add_parser("chain", parents=[format_flag], help="write the chain of loops as a graph file")
    chain.add_argument("--g", type=int, required=True)
    chain.add_argument("--ell", default=None)
    chain.add_argument("--m", default="1")
    chain.set_defaults(handler=cmd_chain)

    pencil = sub.add_parser("pencil", parents=[format_flag], help="write D_p as a divisor file")
    pencil.add_argument("--path", required=True, help="comma-separated heights, e.g. 1,2,1")
    pencil.add_argument("--ell", default=None)
    pencil.add_argument("--granularity", default=None)
    pencil.set_defaults(handler=cmd_pencil)
    return parser


def _settings_from(args) -> PencilSettings:
    settings = PencilSettings.from_env()
    overrides = {}
    if args.format is not None:
        overrides['output_format'] = args.format
    if getattr(args, 'jobs', None) is not None:
        overrides['jobs'] = args.jobs
    if getattr(args, 'max_seconds', None) is not None:
        overrides['max_seconds'] = args.max_seconds
    if getattr(args, 'granularity', None) is not None:
        overrides['granularity'] = parse_rational(args.granularity)
    return dataclasses.replace(settings, **overrides)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        settings = _settings_from(args)
        return args.handler(args, settings)
    except USAGE_ERRORS as exc:
        print(f"✗ {exc}", file=sys.stderr)
        return 2
    except (PrecisionError, CertificationError) as exc:
        print(f"✗ {exc}", file=sys.stderr)
        return 1
    except PencilError as exc:
        logger.debug("unexpected toolkit error", exc_info=True)
        print(f"✗ {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
