"""Command line: ``travelgraph {solve,histogram,resources,rigidity,reconstruct,reduce}``.

Structured results go to stdout (or ``--out``) as JSON; timing goes to
stderr so that stdout is reproducible for a fixed seed.

Exit codes: 0 success, 1 verified absence of a solution, 2 usage or parse
error, 3 refused by a size guard.
"""
from __future__ import annotations

import argparse
import json
import secrets
import sys
import time
from pathlib import Path

from . import grover, reduction, rigidity
from .circuits import build_search, problem_from_distance_data, resource_report
from .graph import (AdjacencyVector, brute_force_solutions, load_instance,
                    validate_distance_data)
from .statevector import GuardExceeded

EXIT_OK, EXIT_NO_SOLUTION, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3

# statevector runs above this many qubits need --allow-large
DEFAULT_QUBIT_GUARD = 20
LARGE_QUBIT_GUARD = 26


class UsageError(Exception):
    pass


def _load(ref: str):
    try:
        data = load_instance(ref)
    except FileNotFoundError:
        raise UsageError(f"no built-in instance or file named {ref!r}") from None
    except (ValueError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot parse instance {ref!r}: {exc}") from None
    v = validate_distance_data(data)
    if v is not None:
        raise UsageError(f"invalid distance data ({v.condition}): {v.message}")
    return data


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _guard(data, allow_large: bool) -> int:
    """Statevector qubit limit for this run, refusing early with advice."""
    Q = build_search(problem_from_distance_data(data)).layout.qubit_count
    limit = LARGE_QUBIT_GUARD if allow_large else DEFAULT_QUBIT_GUARD
    if Q > limit:
        hint = "" if allow_large else " Pass --allow-large, or use --mode brute-force."
        raise GuardExceeded(f"simulation needs {Q} qubits ({16 * 2 ** Q / 2 ** 30:.2f} GiB of "
                            f"amplitudes), above the limit of {limit}.{hint}")
    if Q > DEFAULT_QUBIT_GUARD:
        print(f"note: {Q} qubits, about {16 * 2 ** Q / 2 ** 30:.2f} GiB per statevector copy",
              file=sys.stderr)
    return limit


def _edges(e: AdjacencyVector) -> list[list[int]]:
    return [list(p) for p in e.edges()]


def cmd_solve(args) -> int:
    data = _load(args.instance)
    seed = args.seed if args.seed is not None else secrets.randbits(32)
    art = {"command": "solve", "instance": args.instance, "mode": args.mode, "seed": seed}
    if args.mode == "brute-force":
        sols = brute_force_solutions(data)
        art.update(solution_count=len(sols), classical_queries=2 ** data.edge_bits)
        if sols:
            art.update(solution=_edges(sols[0]), bitstring=sols[0].bitstring())
    else:
        limit = _guard(data, args.allow_large)
        cfg = grover.GroverRunConfig(data, seed=seed, max_statevector_qubits=limit)
        out = grover.solve_unknown_count(cfg)
        art.update(schedule=out.schedule_used,
                   quantum_queries=out.oracle_queries_quantum,
                   classical_queries=out.oracle_queries_classical,
                   measured=out.measured_e.bitstring())
        if out.is_solution:
            art.update(solution=_edges(out.measured_e), bitstring=out.measured_e.bitstring())
    found = "solution" in art
    if not found:
        art["result"] = "no solution found"
    _emit(art, args.out)
    return EXIT_OK if found else EXIT_NO_SOLUTION


def histogram_rows(data, L: int, limit: int = LARGE_QUBIT_GUARD) -> list[tuple[str, float]]:
    cfg = grover.GroverRunConfig(data, max_statevector_qubits=limit)
    p = grover.edge_distribution(cfg, L)
    rows = [(AdjacencyVector.from_int(data.n, e).bitstring(), float(p[e])) for e in range(p.size)]
    return sorted(rows)


def cmd_histogram(args) -> int:
    data = _load(args.instance)
    limit = _guard(data, args.allow_large)
    L = args.iterations
    if L is None:
        L = grover.l_of_theta(grover.theta_of(len(brute_force_solutions(data)), data.edge_bits))
    rows = histogram_rows(data, L, limit)
    text = "bitstring,probability\n" + "".join(f"{b},{p:.17g}\n" for b, p in rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def resources_row(name: str) -> dict:
    data = _load(name)
    sols = brute_force_solutions(data)
    N = data.edge_bits
    L = grover.l_of_theta(grover.theta_of(len(sols), N)) if 0 < len(sols) < 2 ** N else None
    sc = build_search(problem_from_distance_data(data))
    Q = sc.layout.qubit_count
    oracle = resource_report(sc.oracle)
    return {"instance": name, "n": data.n, "m": data.m, "N": N, "solutions": len(sols),
            "L": L, "qubits": Q, "dimension": 2 ** Q,
            "oracle_gates": oracle["gate_count"], "oracle_histogram": oracle["gate_histogram"],
            "diffusion_gates": len(sc.diffusion)}


def cmd_resources(args) -> int:
    names = args.instance or ["A", "B", "C", "D"]
    _emit({"command": "resources", "rows": [resources_row(n) for n in names]}, args.out)
    return EXIT_OK


def parse_tree_file(path: str) -> rigidity.Tree:
    """Edge list, one ``u v`` pair per line; ``#`` starts a comment; an optional
    ``n <count>`` line fixes the vertex count."""
    edges, n = [], None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "n" and len(parts) == 2:
                n = int(parts[1])
                continue
            if len(parts) != 2:
                raise ValueError
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise UsageError(f"{path}:{lineno}: expected 'u v' or 'n <count>', got {raw!r}") from None
        edges.append((u, v))
    if n is None:
        n = max((max(e) for e in edges), default=1)
    try:
        return rigidity.Tree.from_edges(n, edges)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_rigidity(args) -> int:
    reports = []
    boundary = [int(x) for x in args.boundary.split(",")] if args.boundary else None
    if args.all_trees is not None:
        if args.all_trees > 7:
            raise GuardExceeded("--all-trees is limited to n <= 7")
        for n in range(2, args.all_trees + 1):
            for t in rigidity.nonisomorphic_trees(n):
                rep = rigidity.verify_boundary_rigidity(t)
                reports.append({"edges": [list(e) for e in t.graph.edges()], **rep.to_dict()})
    if args.tree:
        t = parse_tree_file(args.tree)
        if t.n > 7:
            raise GuardExceeded("rigidity enumeration is limited to n <= 7")
        rep = rigidity.verify_boundary_rigidity(t, boundary=boundary,
                                                require_degree_one=not args.no_degree_one)
        reports.append({"edges": [list(e) for e in t.graph.edges()], **rep.to_dict()})
    if not reports:
        raise UsageError("give --tree FILE and/or --all-trees N")
    _emit({"command": "rigidity", "all_rigid": all(r["rigid"] for r in reports),
           "trees": reports}, args.out)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    try:
        d = rigidity.load_leaf_distances(args.distances)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read leaf distances: {exc}") from None
    try:
        t = rigidity.reconstruct_tree(d)
    except rigidity.NotATreeMetric as exc:
        _emit({"command": "reconstruct", "result": "not a tree metric", "reason": str(exc)},
              args.out)
        return EXIT_NO_SOLUTION
    _emit({"command": "reconstruct", "n": t.n, "leaves": t.leaves(),
           "edges": [list(e) for e in t.graph.edges()]}, args.out)
    return EXIT_OK


def cmd_reduce(args) -> int:
    try:
        F = reduction.load_dimacs(args.cnf)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot parse {args.cnf}: {exc}") from None
    inst = reduction.reduce_cnf(F)
    if args.out:
        reduction.save_restricted(inst, args.out)
    art = {"command": "reduce", "summary": reduction.gadget_summary(F)}
    code = EXIT_OK
    if args.solve:
        res = reduction.solve_via_decision(inst)
        art["decision_calls"] = res.calls
        if res.solution is None:
            art["result"] = "there are no solutions"
            code = EXIT_NO_SOLUTION
        else:
            a = reduction.edges_to_assignment(F, res.solution)
            art["solution"] = [list(e) for e in inst.sorted_edges(res.solution)]
            art["assignment"] = {f"u{j}": v for j, v in enumerate(a, start=1)}
            art["assignment_satisfies"] = F.evaluate(a)
    sys.stdout.write(json.dumps(art, indent=2, sort_keys=True) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="travelgraph",
                                description="Graph reconstruction from travel times.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="find a graph matching boundary distances")
    s.add_argument("--instance", required=True, help="A, B, C, D or a JSON file")
    s.add_argument("--mode", choices=["quantum-sim", "brute-force"], default="quantum-sim")
    s.add_argument("--seed", type=int)
    s.add_argument("--allow-large", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    h = sub.add_parser("histogram", help="measurement distribution after L rounds (CSV)")
    h.add_argument("--instance", required=True)
    h.add_argument("--iterations", type=int, help="L; defaults to the optimal count")
    h.add_argument("--allow-large", action="store_true")
    h.add_argument("--out")
    h.set_defaults(func=cmd_histogram)

    r = sub.add_parser("resources", help="rounds, qubits and gate counts")
    r.add_argument("--instance", action="append", help="repeatable; default A B C D")
    r.add_argument("--out")
    r.set_defaults(func=cmd_resources)

    g = sub.add_parser("rigidity", help="exhaustive boundary rigidity checks")
    g.add_argument("--tree", help="edge-list file")
    g.add_argument("--all-trees", type=int, metavar="N")
    g.add_argument("--boundary", help="comma-separated boundary vertices (default: leaves)")
    g.add_argument("--no-degree-one", action="store_true",
                   help="drop the degree-1 requirement on boundary vertices")
    g.add_argument("--out")
    g.set_defaults(func=cmd_rigidity)

    c = sub.add_parser("reconstruct", help="tree from leaf-to-leaf distances")
    c.add_argument("distances", help='JSON {"m": ..., "d": [[p, q, dist], ...]}')
    c.add_argument("--out")
    c.set_defaults(func=cmd_reconstruct)

    d = sub.add_parser("reduce", help="CNF formula to restricted instance")
    d.add_argument("cnf", help="DIMACS file")
    d.add_argument("--out", help="write the instance JSON here")
    d.add_argument("--solve", action="store_true", help="search via decision calls")
    d.set_defaults(func=cmd_reduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        code = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GuardExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_GUARD
    print(f"elapsed {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
