"""Command-line front end.

Every command prints a table, either as headered TSV or as JSON of the form
``{"meta": {...}, "rows": [...]}``.  Both carry the tool version and seed, and
the output depends only on the inputs and the seed.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import __version__
from .ainfinity import AInfinityAlgebra, builtin, check_master_equation, load_algebra
from .graph_complex import GraphChain, cells_in_range, enumerate_basis, homology_dims
from .partition import (
    VertexData,
    characteristic_class,
    exp_chain,
    homotopy_trial,
    partition_value,
    verify_cycle,
    verify_direct_sum,
    verify_equivalence,
    vertex_data,
)
from .ribbon_graph import format_graph, is_connected
from .super_core import format_rational
from .tcft import correlation, parse_legged

MAX_EDGES_ENUMERATE = 7
MAX_EDGES_PARTITION = 6
SUITES = ("master", "cycle", "exp", "equiv", "dsum", "homotopy", "oddvertex")


class Table:
    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        self.rows: list[list[object]] = []

    def add(self, *values: object) -> None:
        self.rows.append(list(values))


def _cell(value: object) -> object:
    if isinstance(value, Fraction):
        return format_rational(value)
    return value


def render(table: Table, fmt: str, meta: dict) -> str:
    if fmt == "json":
        rows = [{c: _cell(v) for c, v in zip(table.columns, row)} for row in table.rows]
        return json.dumps({"meta": meta, "rows": rows}, indent=2, sort_keys=True) + "\n"
    head = " ".join(f"{k}={meta[k]}" for k in sorted(meta) if k not in ("tool", "version"))
    lines = [f"# {meta['tool']} {meta['version']} {head}".rstrip(), "\t".join(table.columns)]
    for row in table.rows:
        lines.append("\t".join(str(_cell(v)) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- parallel evaluation

_WORKER_DATA: VertexData | None = None


def _init_worker(data: VertexData) -> None:
    global _WORKER_DATA
    _WORKER_DATA = data


def _worker_value(graph) -> Fraction:
    assert _WORKER_DATA is not None
    return partition_value(_WORKER_DATA, graph)


def partition_values(data: VertexData, graphs: Sequence, jobs: int) -> list[Fraction]:
    """``partition_value`` on each graph, in input order, optionally across processes."""
    if jobs <= 1 or len(graphs) < 2:
        return [partition_value(data, g) for g in graphs]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(data,)) as pool:
        return list(pool.map(_worker_value, graphs, chunksize=max(1, len(graphs) // (4 * jobs))))


# ---------------------------------------------------------------- commands


def run_enumerate(args: argparse.Namespace) -> tuple[Table, bool]:
    table = Table(["vertices", "edges", "chi", "dim", "connected", "aut_mass"])
    for j in range(1, args.max_edges + 1):
        for i in range(1, j + 1):
            if args.chi_min is not None and i - j < args.chi_min:
                continue
            if 3 * i > 2 * j:
                table.add(i, j, i - j, 0, 0, Fraction(0))
                continue
            cell = enumerate_basis(i, j)
            mass = sum((Fraction(1, a) for a in cell.aut_orders), Fraction(0))
            table.add(i, j, i - j, cell.dim, enumerate_basis(i, j, True).dim, mass)
    return table, True


def run_homology(args: argparse.Namespace) -> tuple[Table, bool]:
    table = Table(["chi", "vertices", "edges", "dim", "ker", "rank_in", "homology"])
    chis = args.chi if args.chi else list(range(-1, (args.chi_min if args.chi_min is not None else -1) - 1, -1))
    for chi in chis:
        for row in homology_dims(chi, args.max_edges, args.kind):
            table.add(row.chi, row.vertices, row.edges, row.dim, row.dim_ker, row.rank_in, row.dim_h)
    return table, True


def run_partition(args: argparse.Namespace) -> tuple[Table, bool]:
    A = load_algebra(args.algebra)
    data = vertex_data(A)
    graphs = [g for i, j in cells_in_range(args.max_edges, args.chi_min) for g in enumerate_basis(i, j, args.connected).graphs]
    values = partition_values(data, graphs, args.jobs)
    table = Table(["graph_key", "vertices", "edges", "value"])
    for g, v in zip(graphs, values):
        if v or args.all:
            table.add(format_graph(g), g.num_vertices, g.num_edges, v)
    return table, True


def _all_graphs(max_edges: int) -> list:
    return [g for i, j in cells_in_range(max_edges) for g in enumerate_basis(i, j).graphs]


def run_correlate(args: argparse.Namespace) -> tuple[Table, bool]:
    A = load_algebra(args.algebra)
    graph = parse_legged(args.graph)
    tensor = correlation(A, graph)
    labels = A.space.labels
    table = Table(["in", "out", "value"])
    for key in sorted(tensor.coeffs):
        ins = " ".join(labels[x] for x in key[: tensor.num_in])
        outs = " ".join(labels[x] for x in key[tensor.num_in :])
        table.add(ins, outs, tensor.coeffs[key])
    return table, True


def run_characteristic(args: argparse.Namespace) -> tuple[Table, bool]:
    A = load_algebra(args.algebra)
    cls = characteristic_class(A, args.degree_bound)
    letters = cls.hamiltonian.letters
    table = Table(["degree", "coefficient", "monomial"])
    for mono, c in sorted(cls.chain.terms.items(), key=lambda t: (len(t[0]), t[0])):
        body = " ^ ".join(f"[{letters.format_word(w)}]" for w in mono) if mono else "1"
        table.add(len(mono), c, body)
    return table, True


def _suite_rows(name: str, A: AInfinityAlgebra, max_edges: int, seed: int) -> list[tuple[int, int, str]]:
    """(checked, failed, witness) for one suite."""
    if name == "master":
        residual = check_master_equation(A)
        return [(1, 0 if residual.is_zero() else 1, "" if residual.is_zero() else residual.format())]
    if name == "cycle":
        report = verify_cycle(A, max_edges - 1)
        return [_report_row(report)]
    if name == "equiv":
        return [_report_row(verify_equivalence(A, max_edges))]
    if name == "dsum":
        return [_report_row(verify_direct_sum(A, builtin("ground"), max_edges))]
    if name == "exp":
        data = vertex_data(A)
        graphs = _all_graphs(max_edges)
        full = {g: partition_value(data, g) for g in graphs}
        connected = GraphChain({g: v for g, v in full.items() if v and is_connected(g)})
        lhs = exp_chain(connected, max_edges)
        failures = [g for g in graphs if lhs.coefficient(g) != full[g]]
        return [(len(graphs), len(failures), format_graph(failures[0]) if failures else "")]
    if name == "homotopy":
        checked = failed = 0
        witness = ""
        for k in range(5):
            trial = homotopy_trial(A, seed * 5 + k, max_edges)
            checked += len(trial.in_image)
            bad = [cell for cell, ok in trial.in_image.items() if not ok]
            failed += len(bad)
            if bad and not witness:
                witness = f"seed={trial.seed} g={trial.generator.format()} cell={bad[0]}"
        return [(checked, failed, witness)]
    if name == "oddvertex":
        data = vertex_data(A)
        graphs = [g for g in _all_graphs(max_edges) if g.num_vertices % 2]
        failures = [g for g in graphs if partition_value(data, g)]
        return [(len(graphs), len(failures), format_graph(failures[0]) if failures else "")]
    raise ValueError(f"unknown suite {name!r}")


def _report_row(report) -> tuple[int, int, str]:
    witness = ""
    if report.failures:
        g, lhs, rhs = report.failures[0]
        witness = f"{format_graph(g)} lhs={format_rational(lhs)} rhs={format_rational(rhs)}"
    return (report.checked, len(report.failures), witness)


def run_verify(args: argparse.Namespace) -> tuple[Table, bool]:
    A = load_algebra(args.algebra)
    suites = SUITES if args.suite == "all" else (args.suite,)
    table = Table(["suite", "checked", "failed", "status", "witness"])
    ok = True
    for name in suites:
        for checked, failed, witness in _suite_rows(name, A, args.max_edges, args.seed):
            table.add(name, checked, failed, "pass" if not failed else "FAIL", witness)
            ok = ok and not failed
    return table, ok


# ---------------------------------------------------------------- parser


def _bounded(cap: int) -> Callable[[str], int]:
    def parse(text: str) -> int:
        value = int(text)
        if not 1 <= value <= cap:
            raise argparse.ArgumentTypeError(f"must be between 1 and {cap} (size cap)")
        return value

    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("tsv", "json"), default="tsv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--chi-min", type=int, default=None)

    parser = argparse.ArgumentParser(prog="ribbonclass", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ribbonclass {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", parents=[common], help="basis cells with dimensions and automorphism data")
    p.add_argument("--max-edges", type=_bounded(MAX_EDGES_ENUMERATE), default=5)
    p.set_defaults(run=run_enumerate)

    p = sub.add_parser("homology", parents=[common], help="graph homology dimensions per Euler characteristic")
    p.add_argument("--max-edges", type=_bounded(MAX_EDGES_ENUMERATE), default=5)
    p.add_argument("--chi", type=int, action="append", help="Euler characteristic (repeatable)")
    p.add_argument("--kind", choices=("boundary", "coboundary"), default="boundary")
    p.set_defaults(run=run_homology)

    p = sub.add_parser("partition", parents=[common], help="partition function coefficients")
    p.add_argument("--algebra", required=True)
    p.add_argument("--max-edges", type=_bounded(MAX_EDGES_PARTITION), default=4)
    p.add_argument("--connected", action="store_true", help="connected graphs only")
    p.add_argument("--all", action="store_true", help="include zero coefficients")
    p.set_defaults(run=run_partition)

    p = sub.add_parser("correlate", parents=[common], help="correlation tensor of a legged graph")
    p.add_argument("--algebra", required=True)
    p.add_argument("--graph", required=True)
    p.set_defaults(run=run_correlate)

    p = sub.add_parser("characteristic", parents=[common], help="truncated characteristic class")
    p.add_argument("--algebra", required=True)
    p.add_argument("--degree-bound", type=int, default=2)
    p.set_defaults(run=run_characteristic)

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--algebra", default="builtin:ground")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--max-edges", type=_bounded(MAX_EDGES_PARTITION), default=4)
    p.set_defaults(run=run_verify)
    return parser


def main(argv: Iterable[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(None if argv is None else list(argv))
    try:
        table, ok = args.run(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"ribbonclass: error: {exc}", file=sys.stderr)
        return 2
    meta = {"tool": "ribbonclass", "version": __version__, "command": args.command, "seed": args.seed}
    for key in ("algebra", "max_edges", "chi_min", "suite", "kind"):
        value = getattr(args, key, None)
        if value is not None:
            meta[key] = value
    sys.stdout.write(render(table, args.format, meta))
    return 0 if ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
