"""Command-line entry point.

Exit codes: 0 success, 1 verification failed, 2 unparseable input,
3 size cap exceeded, 4 input violates a precondition.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from stabgames import bounds, cluster, game, qsim
from stabgames.anf import NL2_CAP, TABLE_CAP, CapExceeded
from stabgames.parityfn import NonCanonicalError, group_polynomials
from stabgames.pauli import PauliError, PauliOperator, StabilizerGenerators, group_element
from stabgames.states import GraphSpec, ghz_generators, graph_generators, toric_generators

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_CAP, EXIT_PRECONDITION = 0, 1, 2, 3, 4
WORKERS_ENV = "STABGAMES_WORKERS"
SCHEMA_VERSION = 1


class ParseError(ValueError):
    pass


def frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _int_arg(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"bad {what} {text!r}") from None


def builtin_generators(name: str) -> StabilizerGenerators:
    """``ghz:n``, ``cycle:n``, ``path:n`` (alias ``graph:path:n``), ``star:k`` or ``toric:L``."""
    parts = name.strip().split(":")
    if parts[0] == "graph":
        parts = parts[1:]
    if len(parts) != 2:
        raise ParseError(f"unknown builtin {name!r}")
    kind, size = parts[0], _int_arg(parts[1], "size")
    makers = {
        "ghz": ghz_generators,
        "cycle": lambda n: graph_generators(GraphSpec.cycle(n)),
        "path": lambda n: graph_generators(GraphSpec.path(n)),
        "star": lambda k: graph_generators(GraphSpec.star(k)),
        "toric": toric_generators,
    }
    if kind not in makers:
        raise ParseError(f"unknown builtin {name!r}")
    return makers[kind](size)


def load_generators(args) -> StabilizerGenerators:
    given = [a for a in (args.builtin, args.gens, args.graph) if a]
    if len(given) != 1:
        raise ParseError("give exactly one of --builtin, --gens, --graph")
    if args.builtin:
        return builtin_generators(args.builtin)
    path = Path(args.gens or args.graph)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(str(exc)) from None
    if args.graph:
        try:
            spec = GraphSpec.parse(text)
        except ValueError as exc:
            raise ParseError(str(exc)) from None
        return graph_generators(spec)
    ops = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            try:
                ops.append(PauliOperator.from_string(line))
            except PauliError as exc:
                raise ParseError(str(exc)) from None
    if not ops or len({op.n for op in ops}) != 1:
        raise ParseError("generator file needs strings of one common length")
    # sign, commutation and independence checks are preconditions, not syntax
    return StabilizerGenerators(ops)


def load_game(args) -> game.GameInstance:
    gens = load_generators(args)
    try:
        spec = game.QuerySpec.parse(args.queries)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return game.build_game(gens, spec)


def emit(text: str, out: str | None) -> None:
    """Write to ``out`` atomically (temp file then rename), or to stdout."""
    if out is None:
        sys.stdout.write(text)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def dump_json(obj: dict) -> str:
    return json.dumps({"schema": SCHEMA_VERSION, **obj}, indent=2, sort_keys=True) + "\n"


def cmd_value(args) -> int:
    g = load_game(args)
    rep = game.game_report(g, dim_cap=args.dim_cap, workers=args.workers)
    if args.format == "json":
        emit(dump_json(rep), args.out)
    else:
        keys = sorted(rep)
        cell = lambda v: " ".join(map(str, v)) if isinstance(v, list) else str(v)  # noqa: E731
        emit(",".join(keys) + "\n" + ",".join(cell(rep[k]) for k in keys) + "\n", args.out)
    return EXIT_OK


def bound_report(g: game.GameInstance, name: str, *, dim_cap: int, workers: int) -> bounds.BoundReport:
    gens = g.gens
    rep = bounds.BoundReport(name, game.bias_lower_bound(g))
    if g.queries.is_full:
        c = group_polynomials(gens).parity
        rep.upper_candidates["RM78"] = bounds.rm78_bound(c.degree() == 3)
        if c.n_vars <= NL2_CAP:
            rep.upper_candidates["NL2"] = bounds.nl2_bound(c)
        b1, b2 = bounds.derivative_bounds(c, average=c.n_vars <= min(TABLE_CAP, 20))
        rep.upper_candidates["DERIV1"] = b1
        if b2 is not None:
            rep.upper_candidates["DERIV2"] = b2
        if name.startswith("toric:"):
            rep.upper_candidates["TORIC"] = bounds.toric_bound(int(name.split(":")[1])).value
    else:
        res = game.restrict_to_coset(gens, dict(g.queries.fixed))
        m = len(res.free_vars)
        if res.incidence_linear and res.parity_quadratic and bounds.affine_span_full(res.incidence, m):
            rep.upper_candidates["NL1"] = bounds.nl_bounds(res.parity, "PARTIAL")
    try:
        exact = game.classical_value(g, dim_cap=dim_cap, workers=workers).value
        rep.exact = exact
        rep.lower = max(rep.lower, exact)
    except CapExceeded:
        pass
    return rep


def cmd_bounds(args) -> int:
    g = load_game(args)
    name = args.builtin or Path(args.gens or args.graph).name
    rep = bound_report(g, name, dim_cap=args.dim_cap, workers=args.workers)
    if args.format == "csv":
        emit(bounds.reports_csv([rep]), args.out)
    else:
        body = {
            "instance": rep.instance,
            "lower": frac(rep.lower),
            "upper": {k: frac(v) for k, v in rep.upper_candidates.items()},
            "best_upper": frac(rep.best_upper),
            "exact": None if rep.exact is None else frac(rep.exact),
        }
        emit(dump_json(body), args.out)
    return EXIT_OK if rep.consistent() else EXIT_VERIFY


def cmd_refute(args) -> int:
    g = load_game(args)
    ref = game.find_refutation(g)
    body = {"refutation": "NONE" if ref is None else list(ref.support)}
    if ref is not None:
        body["operators"] = [str(_query_operator(g, q)) for q in ref.support]
        if not game.check_refutation(g, ref):
            emit(dump_json(body), args.out)
            return EXIT_VERIFY
    emit(dump_json(body), args.out)
    return EXIT_OK


def _query_operator(g: game.GameInstance, q: int) -> PauliOperator:
    return group_element(g.gens, g.exponent(q))[0]


def cmd_cluster_table(args) -> int:
    rows = cluster.cluster_table(args.n_max, n_min=args.n_min, cap=args.cap, workers=args.workers)
    emit(cluster.table_csv(rows), args.out)
    return EXIT_OK


def cmd_toric(args) -> int:
    tb = bounds.toric_bound(args.L)
    v = tb.value
    if args.format == "json":
        emit(
            dump_json(
                {
                    "L": args.L,
                    "bound": frac(v),
                    "decimal": str(float(v)),
                    "certified_rank": tb.certified_rank,
                    "required_rank": tb.required_rank,
                }
            ),
            args.out,
        )
    else:
        # the bound is dyadic, so a float prints it exactly
        emit(f"{float(v)}\n", args.out)
    return EXIT_OK


def cmd_polytope(args) -> int:
    rep = cluster.verify_invariant_polytope(args.tol, lam=args.lam, scale=args.scale)
    body = {
        "result": "pass" if rep.passed else "fail",
        "max_outside": rep.max_outside,
        "max_uncovered": rep.max_uncovered,
        "tolerance": rep.tolerance,
    }
    emit(dump_json(body) if args.format == "json" else body["result"] + "\n", args.out)
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_qsim(args) -> int:
    g = load_game(args)
    state = qsim.stabilizer_state(g.gens)
    p = qsim.quantum_win_probability(g, state)
    emit(dump_json({"quantum_win_probability": round(p, 12)}), args.out)
    return EXIT_OK


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stabgames", description="Stabilizer-testing game toolkit.")
    p.add_argument("--workers", type=_positive_int, default=default_workers())
    p.add_argument("--out", help="write output to this file instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    def instance(sp, queries: bool = True):
        sp.add_argument("--builtin", help="ghz:n, cycle:n, path:n, star:k or toric:L")
        sp.add_argument("--gens", help="generator file, one signed Pauli string per line")
        sp.add_argument("--graph", help="graph file: n, then one 1-based edge per line")
        if queries:
            sp.add_argument("--queries", default="full", help='"full" or "coset:x1=1,x3=0"')
        sp.add_argument("--dim-cap", type=_positive_int, default=game.DIM_CAP)
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    for name, fn in (("value", cmd_value), ("bounds", cmd_bounds), ("refute", cmd_refute), ("qsim", cmd_qsim)):
        sp = sub.add_parser(name)
        instance(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("cluster-table")
    sp.add_argument("--n-max", type=_positive_int, required=True)
    sp.add_argument("--n-min", type=_positive_int, default=3)
    sp.add_argument("--cap", type=_positive_int, default=cluster.CLUSTER_CAP)
    sp.set_defaults(func=cmd_cluster_table)

    sp = sub.add_parser("toric")
    sp.add_argument("--L", type=_positive_int, required=True)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_toric)

    sp = sub.add_parser("polytope")
    sp.add_argument("--tol", type=_positive_float, default=1e-9)
    sp.add_argument("--lam", type=float, default=None)
    sp.add_argument("--scale", type=_positive_float, default=1.0)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_polytope)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (PauliError, NonCanonicalError, ValueError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
