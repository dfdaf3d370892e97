"""The restricted problem (find E with E0 <= E <= E1 matching distances on V),
the CNF gadget reduction, both witness maps, brute-force decision procedures
and the decision-to-search loop.

Vertex names produced by :func:`reduce_cnf` are ``TRUE``, ``u{j}``, ``a{j}``,
``~a{j}``, ``~u{j}`` and ``C{i}``, in that order.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .circuits import SearchProblem


# --- CNF formulas ---------------------------------------------------------

@dataclass(frozen=True)
class CnfFormula:
    """Clauses of signed DIMACS literals over variables 1..num_vars."""

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be >= 0")
        norm = []
        for c in self.clauses:
            if len(c) == 0:
                raise ValueError("empty clause")
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} outside +-1..{self.num_vars}")
            norm.append(tuple(dict.fromkeys(int(x) for x in c)))
        object.__setattr__(self, "clauses", tuple(norm))

    @classmethod
    def from_clauses(cls, num_vars: int, clauses: Iterable[Iterable[int]]) -> "CnfFormula":
        return cls(num_vars, tuple(tuple(c) for c in clauses))

    def evaluate(self, assignment: Sequence[bool]) -> bool:
        """``assignment[j-1]`` is the value of variable j."""
        return all(any(assignment[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF. Comments start with ``c``; ``%`` ends the clause list."""
    header = None
    clauses: list[list[int]] = []
    cur: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"bad problem line {line!r}")
            header = (int(parts[2]), int(parts[3]))
            continue
        if header is None:
            raise ValueError("clause before 'p cnf' header")
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                if not cur:
                    raise ValueError("empty clause in DIMACS input")
                clauses.append(cur)
                cur = []
            else:
                cur.append(lit)
    if header is None:
        raise ValueError("missing 'p cnf' header")
    if cur:
        clauses.append(cur)
    if len(clauses) != header[1]:
        raise ValueError(f"header declares {header[1]} clauses, found {len(clauses)}")
    return CnfFormula.from_clauses(header[0], clauses)


def load_dimacs(path: str | Path) -> CnfFormula:
    with open(path) as fh:
        return parse_dimacs(fh.read())


def iter_assignments(N: int):
    for bits in itertools.product((False, True), repeat=N):
        yield bits


def satisfying_assignments(F: CnfFormula, max_vars: int = 20) -> list[tuple[bool, ...]]:
    if F.num_vars > max_vars:
        raise ValueError(f"{F.num_vars} variables exceeds the truth-table guard {max_vars}")
    return [a for a in iter_assignments(F.num_vars) if F.evaluate(a)]


def satisfiable_truth_table(F: CnfFormula, max_vars: int = 20) -> int:
    if F.num_vars > max_vars:
        raise ValueError(f"{F.num_vars} variables exceeds the truth-table guard {max_vars}")
    return int(any(F.evaluate(a) for a in iter_assignments(F.num_vars)))


# --- restricted instances -------------------------------------------------

Edge = tuple[str, str]


@dataclass(frozen=True)
class RestrictedInstance:
    """Vertices X, required distances V as (x, y, d), mandatory edges E0 and
    allowed edges E1. Edges are stored with endpoints in vertex order."""

    vertices: tuple[str, ...]
    V: tuple[tuple[str, str, int], ...]
    E0: frozenset
    E1: frozenset

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex names")
        pos = {v: i for i, v in enumerate(self.vertices)}
        object.__setattr__(self, "E0", frozenset(_norm_edge(e, pos) for e in self.E0))
        object.__setattr__(self, "E1", frozenset(_norm_edge(e, pos) for e in self.E1))
        if not self.E0 <= self.E1:
            raise ValueError("E0 must be a subset of E1")
        for x, y, d in self.V:
            if x not in pos or y not in pos:
                raise ValueError(f"V pair ({x},{y}) has an unknown endpoint")
            if d < 0:
                raise ValueError("required distances must be nonnegative")

    @cached_property
    def position(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def edge_key(self, e: Edge) -> tuple[int, int]:
        return (self.position[e[0]], self.position[e[1]])

    def sorted_edges(self, edges: Iterable[Edge]) -> list[Edge]:
        return sorted(edges, key=self.edge_key)

    @property
    def free_edges(self) -> list[Edge]:
        return self.sorted_edges(self.E1 - self.E0)

    def normalize(self, E: Iterable[Sequence[str]]) -> frozenset:
        return frozenset(_norm_edge(e, self.position) for e in E)

    # interface used by the Grover driver
    def register_edges(self) -> list[Edge]:
        return self.sorted_edges(self.E1)

    def search_problem(self) -> SearchProblem:
        pos = self.position
        edges = self.register_edges()
        slot = lambda e: (pos[e[0]] + 1, pos[e[1]] + 1)
        groups: dict[int, list[tuple[int, int]]] = {}
        for x, y, d in self.V:
            if x == y and d == 0:
                continue
            # d = 0 between distinct vertices can never hold; keep it so the oracle is f = 0
            groups.setdefault(pos[x] + 1, []).append((pos[y] + 1, d))
        return SearchProblem(
            n=len(self.vertices),
            edges=tuple(slot(e) for e in edges),
            groups=tuple((o, tuple(ts)) for o, ts in sorted(groups.items())),
            fixed_edges=tuple(slot(e) for e in self.sorted_edges(self.E0)),
        )

    def decode(self, e_int: int) -> frozenset:
        return frozenset(e for i, e in enumerate(self.register_edges()) if e_int >> i & 1)

    def encode(self, E: Iterable[Edge]) -> int:
        E = self.normalize(E)
        return sum(1 << i for i, e in enumerate(self.register_edges()) if e in E)

    def is_solution(self, e_int: int) -> bool:
        return bool(verify_restricted(self, self.decode(e_int)))

    def solution_ints(self) -> list[int]:
        return sorted(self.encode(E) for E in all_solutions(self))


def _norm_edge(e, pos) -> Edge:
    x, y = e
    if x not in pos or y not in pos:
        raise ValueError(f"edge ({x},{y}) has an endpoint outside X")
    if x == y:
        raise ValueError(f"self-loop at {x}")
    return (x, y) if pos[x] < pos[y] else (y, x)


def _adjacency_masks(inst: RestrictedInstance, E: Iterable[Edge]) -> list[int]:
    pos = inst.position
    adj = [0] * len(inst.vertices)
    for x, y in E:
        i, j = pos[x], pos[y]
        adj[i] |= 1 << j
        adj[j] |= 1 << i
    return adj


def _distance(adj: list[int], s: int, t: int, cap: int | None = None) -> float:
    """BFS on bitmask adjacency; inf if unreachable (or farther than cap)."""
    if s == t:
        return 0
    seen = frontier = 1 << s
    d = 0
    while frontier:
        d += 1
        if cap is not None and d > cap:
            return float("inf")
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= adj[low.bit_length() - 1]
            f ^= low
        nxt &= ~seen
        if nxt >> t & 1:
            return d
        seen |= nxt
        frontier = nxt
    return float("inf")


def distances_ok(inst: RestrictedInstance, adj: list[int]) -> bool:
    pos = inst.position
    return all(_distance(adj, pos[x], pos[y]) == d for x, y, d in inst.V)


def verify_restricted(inst: RestrictedInstance, E: Iterable[Sequence[str]]) -> int:
    """1 iff E0 <= E <= E1 and the graph distances of (X, E) agree with V."""
    E = inst.normalize(E)
    if not (inst.E0 <= E <= inst.E1):
        return 0
    return int(distances_ok(inst, _adjacency_masks(inst, E)))


def decision_enumerate(inst: RestrictedInstance, max_free: int = 24) -> frozenset | None:
    """Plain enumeration of every E0 <= E <= E1; returns a solution or None."""
    free = inst.free_edges
    if len(free) > max_free:
        raise ValueError(f"{len(free)} free edges exceeds the enumeration guard {max_free}")
    for mask in range(1 << len(free)):
        E = inst.E0 | {free[i] for i in range(len(free)) if mask >> i & 1}
        if verify_restricted(inst, E):
            return frozenset(E)
    return None


def find_solution(inst: RestrictedInstance, max_free: int = 48) -> frozenset | None:
    """Depth-first search over the free edges with monotone pruning.

    With I the edges already taken and U the undecided ones, any completion E
    satisfies d_{I+U} <= d_E <= d_I, so a branch dies as soon as some pair has
    d_{I+U} > d or d_I < d.
    """
    free = inst.free_edges
    if len(free) > max_free:
        raise ValueError(f"{len(free)} free edges exceeds the search guard {max_free}")
    pos = inst.position
    reqs = [(pos[x], pos[y], d) for x, y, d in inst.V]
    keys = [(pos[x], pos[y]) for x, y in free]

    def add(adj, i, j):
        adj = list(adj)
        adj[i] |= 1 << j
        adj[j] |= 1 << i
        return adj

    def remove(adj, i, j):
        adj = list(adj)
        adj[i] &= ~(1 << j)
        adj[j] &= ~(1 << i)
        return adj

    def viable(lo, hi):
        for s, t, d in reqs:
            if _distance(hi, s, t, cap=d) > d:
                return False
            if _distance(lo, s, t, cap=d) < d:
                return False
        return True

    def dfs(k, lo, hi):
        if not viable(lo, hi):
            return None
        if k == len(free):
            return lo
        i, j = keys[k]
        got = dfs(k + 1, add(lo, i, j), hi)
        if got is not None:
            return got
        return dfs(k + 1, lo, remove(hi, i, j))

    lo = _adjacency_masks(inst, inst.E0)
    hi = _adjacency_masks(inst, inst.E1)
    adj = dfs(0, lo, hi)
    if adj is None:
        return None
    E = frozenset((inst.vertices[i], inst.vertices[j])
                  for i in range(len(adj)) for j in range(i + 1, len(adj)) if adj[i] >> j & 1)
    assert verify_restricted(inst, E)
    return E


def decision_brute_force(inst: RestrictedInstance, max_free: int = 48) -> int:
    """Exhaustive (pruned) decision: 1 iff a solution exists."""
    return int(find_solution(inst, max_free) is not None)


def all_solutions(inst: RestrictedInstance, max_free: int = 24) -> list[frozenset]:
    free = inst.free_edges
    if len(free) > max_free:
        raise ValueError(f"{len(free)} free edges exceeds the enumeration guard {max_free}")
    out = []
    for mask in range(1 << len(free)):
        E = inst.E0 | {free[i] for i in range(len(free)) if mask >> i & 1}
        if verify_restricted(inst, E):
            out.append(frozenset(E))
    return out


class DecisionInconsistencyError(RuntimeError):
    pass


@dataclass
class SearchResult:
    solution: frozenset | None
    calls: int
    bound: int
    trace: list[tuple[Edge, bool]] = field(default_factory=list)


def solve_via_decision(inst: RestrictedInstance,
                       decision: Callable[[RestrictedInstance], int] = decision_brute_force
                       ) -> SearchResult:
    """Turn a decision procedure into a search: commit or discard one allowed
    edge per call, in vertex order. Uses at most |E1 - E0| + 1 calls."""
    bound = len(inst.E1 - inst.E0) + 1
    calls = 1
    if not decision(inst):
        return SearchResult(None, calls, bound)
    E0, E1 = set(inst.E0), set(inst.E1)
    trace = []
    while E0 != E1:
        e = inst.sorted_edges(E1 - E0)[0]
        sub = RestrictedInstance(inst.vertices, inst.V, frozenset(E0 | {e}), frozenset(E1))
        calls += 1
        ok = bool(decision(sub))
        trace.append((e, ok))
        if ok:
            E0.add(e)
        else:
            E1.discard(e)
    if calls > bound:
        raise DecisionInconsistencyError(f"{calls} calls exceeds the bound {bound}")
    if not verify_restricted(inst, E0):
        raise DecisionInconsistencyError(
            "decision accepted the instance but the committed edge set is not a solution")
    return SearchResult(frozenset(E0), calls, bound, trace)


# --- the CNF reduction ----------------------------------------------------

def _lit_vertex(lit: int) -> str:
    return f"u{lit}" if lit > 0 else f"~u{-lit}"


def reduce_cnf(F: CnfFormula) -> RestrictedInstance:
    """Gadget instance: solvable exactly when F is satisfiable."""
    N = F.num_vars
    X = ["TRUE"]
    for j in range(1, N + 1):
        X += [f"u{j}", f"a{j}", f"~a{j}", f"~u{j}"]
    X += [f"C{i}" for i in range(1, len(F.clauses) + 1)]
    V = [(f"u{j}", f"~u{j}", 3) for j in range(1, N + 1)]
    V += [("TRUE", f"C{i}", 3) for i in range(1, len(F.clauses) + 1)]
    E1 = set()
    for bucket in gadget_buckets(F).values():
        E1 |= bucket
    return RestrictedInstance(tuple(X), tuple(V), frozenset(), frozenset(E1))


def gadget_buckets(F: CnfFormula) -> dict[str, set]:
    """E1 split into literal links (E1), variable chains (E2), positive
    (E3) and negative (E4) clause links."""
    N = F.num_vars
    b = {"E1": set(), "E2": set(), "E3": set(), "E4": set()}
    for j in range(1, N + 1):
        b["E1"] |= {("TRUE", f"u{j}"), ("TRUE", f"~u{j}")}
        b["E2"] |= {(f"u{j}", f"a{j}"), (f"a{j}", f"~a{j}"), (f"~a{j}", f"~u{j}")}
    for i, c in enumerate(F.clauses, start=1):
        for lit in c:
            if lit > 0:
                b["E3"].add((f"a{lit}", f"C{i}"))
            else:
                b["E4"].add((f"~a{-lit}", f"C{i}"))
    return b


def gadget_summary(F: CnfFormula) -> dict:
    inst = reduce_cnf(F)
    return {
        "variables": F.num_vars,
        "clauses": len(F.clauses),
        "vertices": len(inst.vertices),
        "V": len(inst.V),
        "E0": len(inst.E0),
        "E1": len(inst.E1),
        "E1_by_bucket": {k: len(v) for k, v in gadget_buckets(F).items()},
        "decision_call_bound": len(inst.E1 - inst.E0) + 1,
    }


def assignment_to_edges(F: CnfFormula, assignment: Sequence[bool]) -> frozenset:
    """Every chain and clause link, plus TRUE joined to each true literal."""
    if len(assignment) != F.num_vars:
        raise ValueError("assignment length differs from the variable count")
    b = gadget_buckets(F)
    E = b["E2"] | b["E3"] | b["E4"]
    for j, val in enumerate(assignment, start=1):
        E.add(("TRUE", f"u{j}") if val else ("TRUE", f"~u{j}"))
    return reduce_cnf(F).normalize(E)


def edges_to_assignment(F: CnfFormula, E: Iterable[Sequence[str]]) -> tuple[bool, ...]:
    """u_j is true iff TRUE is not joined to ~u_j. E must solve the gadget instance."""
    inst = reduce_cnf(F)
    E = inst.normalize(E)
    if not verify_restricted(inst, E):
        raise ValueError("edge set does not solve the gadget instance")
    return tuple(("TRUE", f"~u{j}") not in E for j in range(1, F.num_vars + 1))


def length3_paths(inst: RestrictedInstance, E: Iterable[Edge], s: str, t: str) -> list[tuple[str, ...]]:
    """Every simple path with three edges from s to t in (X, E)."""
    adj: dict[str, set[str]] = {v: set() for v in inst.vertices}
    for x, y in E:
        adj[x].add(y)
        adj[y].add(x)
    return [(s, a, b, t) for a in adj[s] for b in adj[a]
            if b not in (s, t) and a != t and t in adj[b]]


def path_pattern_ok(F: CnfFormula, path: tuple[str, ...], i: int) -> bool:
    """TRUE u_j a_j C_i with u_j in C_i, or TRUE ~u_j ~a_j C_i with ~u_j in C_i."""
    s, x, y, c = path
    if s != "TRUE" or c != f"C{i}":
        return False
    for lit in F.clauses[i - 1]:
        j = abs(lit)
        want = (f"u{j}", f"a{j}") if lit > 0 else (f"~u{j}", f"~a{j}")
        if (x, y) == want:
            return True
    return False


# --- serialisation and fixtures --------------------------------------------

def instance_to_dict(inst: RestrictedInstance) -> dict:
    return {
        "vertices": list(inst.vertices),
        "V": [[x, y, d] for x, y, d in inst.V],
        "E0": [list(e) for e in inst.sorted_edges(inst.E0)],
        "E1": [list(e) for e in inst.sorted_edges(inst.E1)],
    }


def instance_from_dict(obj: dict) -> RestrictedInstance:
    try:
        return RestrictedInstance(
            tuple(obj["vertices"]),
            tuple((x, y, int(d)) for x, y, d in obj["V"]),
            frozenset(tuple(e) for e in obj["E0"]),
            frozenset(tuple(e) for e in obj["E1"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed restricted instance: {exc}") from None


def save_restricted(inst: RestrictedInstance, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=2)
        fh.write("\n")


def load_restricted(path: str | Path) -> RestrictedInstance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


# (u1 or u2) and (~u1 or ~u3) and (u2 or ~u3) and (u3)
FIGURE_FORMULA = CnfFormula.from_clauses(3, [[1, 2], [-1, -3], [2, -3], [3]])

# its drawn solution: u1 false, u2 and u3 true
FIGURE_SOLUTION = frozenset({
    ("TRUE", "~u1"), ("TRUE", "u2"), ("TRUE", "u3"),
    ("u1", "a1"), ("a1", "~a1"), ("~a1", "~u1"),
    ("u2", "a2"), ("a2", "~a2"), ("~a2", "~u2"),
    ("u3", "a3"), ("a3", "~a3"), ("~a3", "~u3"),
    ("a1", "C1"), ("a2", "C1"), ("~a1", "C2"), ("~a3", "C2"),
    ("a2", "C3"), ("~a3", "C3"), ("a3", "C4"),
})
