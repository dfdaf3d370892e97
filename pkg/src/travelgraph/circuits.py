"""Reversible circuits for the path-layer oracle and the Grover diffusion.

Two qubit layouts are provided for the search circuits:

``"full"``
    One dedicated register per symbol: E(j,k), R, P(d,j) for every layer
    d = 1..n-1, A(k), F(k) and T(o). This is the textbook construction and
    the one used for gate-count scaling.

``"compact"``
    E, R and T are dedicated; everything else lives in a pool S(k) used as a
    stack. P(1,j) is read straight from the E(o,j) qubit, layers are only
    built up to the largest distance required from the current source, and
    the last layer only for the vertices that need it. The pool is shared
    with DIFFUSION.

Wires may be ``None``, meaning a constant-0 line (an edge that cannot
occur). Gates that would read such a wire are simplified away.

DIFFUSION implements ``D_N = 2|g><g| - id`` exactly (no extra global phase)
on the free edge qubits.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .graph import BoundaryDistanceData, index_pairs, validate_distance_data
from .statevector import Gate, check_gate


@dataclass(frozen=True)
class QubitLayout:
    """Human-readable label per qubit index plus the edge order of the E register."""

    labels: tuple[str, ...]
    edges: tuple[tuple[int, int], ...] = ()

    @property
    def qubit_count(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def register(self, name: str) -> list[int]:
        return [i for i, lab in enumerate(self.labels) if lab == name or lab.startswith(name + "(")]

    def edge_qubits(self) -> dict[tuple[int, int], int]:
        return {e: self.index(f"E({e[0]},{e[1]})") for e in self.edges}


@dataclass(frozen=True)
class Circuit:
    layout: QubitLayout
    gates: tuple[Gate, ...]
    ancilla_set: tuple[int, ...] = ()

    @property
    def qubit_count(self) -> int:
        return self.layout.qubit_count

    def __len__(self):
        return len(self.gates)

    def validate(self) -> None:
        for g in self.gates:
            check_gate(g, self.qubit_count)


def reverse(c: Circuit) -> Circuit:
    """Inverse circuit. All four gate kinds are self-inverse."""
    return Circuit(c.layout, tuple(reversed(c.gates)), c.ancilla_set)


def resource_report(c: Circuit) -> dict:
    hist = {k: 0 for k in ("NOT", "CNOT", "CCNOT", "H")}
    for g in c.gates:
        hist[g.kind] += 1
    return {"qubit_count": c.qubit_count, "gate_count": len(c.gates), "gate_histogram": hist}


# --- gate-level fragments -------------------------------------------------

def emit_cnot(out: list, c, t) -> None:
    if c is not None:
        out.append(Gate("CNOT", (c, t)))


def emit_ccnot(out: list, c1, c2, t) -> None:
    if c1 is not None and c2 is not None:
        out.append(Gate("CCNOT", (c1, c2, t)))


def emit_or2(out: list, c1, c2, t) -> None:
    """t ^= c1 or c2 using the NOT-sandwiched CCNOT."""
    out += [Gate("NOT", (c1,)), Gate("NOT", (c2,)), Gate("NOT", (t,)),
            Gate("CCNOT", (c1, c2, t)), Gate("NOT", (c1,)), Gate("NOT", (c2,))]


def and_ancillas(m: int) -> int:
    return max(m - 2, 0)


def emit_and(out: list, controls: Sequence, t, F: Sequence[int]) -> None:
    """t ^= AND(controls) with a CCNOT ladder through F(1..m-2), which is uncomputed.

    m=0 is a bare NOT (empty conjunction), m=1 a CNOT, m=2 a CCNOT. A
    constant-0 control makes the conjunction 0, so nothing is emitted.
    """
    if any(c is None for c in controls):
        return
    m = len(controls)
    if m == 0:
        out.append(Gate("NOT", (t,)))
        return
    if m == 1:
        out.append(Gate("CNOT", (controls[0], t)))
        return
    if m == 2:
        out.append(Gate("CCNOT", (controls[0], controls[1], t)))
        return
    if len(F) < m - 2:
        raise ValueError(f"AND of {m} needs {m - 2} ancillas, got {len(F)}")
    ladder = [Gate("CCNOT", (controls[0], controls[1], F[0]))]
    for j in range(2, m - 1):
        ladder.append(Gate("CCNOT", (F[j - 2], controls[j], F[j - 1])))
    out += ladder
    out.append(Gate("CCNOT", (F[m - 3], controls[m - 1], t)))
    out += reversed(ladder)


def emit_or(out: list, controls: Sequence, t, F: Sequence[int]) -> None:
    """t ^= OR(controls). Constant-0 controls are dropped.

    One control is a CNOT, two use :func:`emit_or2`, more use the
    NOT-conjugated AND followed by a NOT on the target.
    """
    cs = [c for c in controls if c is not None]
    if not cs:
        return
    if len(cs) == 1:
        out.append(Gate("CNOT", (cs[0], t)))
    elif len(cs) == 2:
        emit_or2(out, cs[0], cs[1], t)
    else:
        flips = [Gate("NOT", (c,)) for c in cs]
        out += flips
        emit_and(out, cs, t, F)
        out.append(Gate("NOT", (t,)))
        out += flips


def emit_diffusion(out: list, data: Sequence[int], kick: int, F: Sequence[int]) -> None:
    """Exact ``2|g><g| - id`` on ``data``; ``kick`` and ``F`` start and end in |0>.

    The kick qubit is put in |->, so the AND ladder applies -1 to |1..1>.
    Conjugating by NOT moves that to |0..0>, and a NOT on the |-> kick
    supplies the overall -1 that turns ``id - 2|0><0|`` into ``2|0><0| - id``.
    """
    hs = [Gate("H", (q,)) for q in data]
    nots = [Gate("NOT", (q,)) for q in data]
    out += hs + nots
    out += [Gate("NOT", (kick,)), Gate("H", (kick,))]
    emit_and(out, list(data), kick, F)
    out.append(Gate("NOT", (kick,)))
    out += [Gate("H", (kick,)), Gate("NOT", (kick,))]
    out += nots + hs


def diffusion_ancillas(N: int) -> int:
    return 1 + and_ancillas(N)


# --- search problems ------------------------------------------------------

@dataclass(frozen=True)
class SearchProblem:
    """What the oracle checks.

    ``edges`` are the edge slots that get a qubit (in E-register order);
    slots listed in ``fixed_edges`` are forced to 1 during state preparation
    and excluded from the superposition. ``groups`` lists, per source vertex,
    the required (target, distance) pairs.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    groups: tuple[tuple[int, tuple[tuple[int, int], ...]], ...]
    fixed_edges: tuple[tuple[int, int], ...] = ()

    @property
    def free_edges(self) -> tuple[tuple[int, int], ...]:
        fixed = set(self.fixed_edges)
        return tuple(e for e in self.edges if e not in fixed)

    def feasible_distances(self) -> bool:
        return all(1 <= d <= self.n - 1 for _, ts in self.groups for _, d in ts)


def problem_from_distance_data(data: BoundaryDistanceData) -> SearchProblem:
    """All n(n-1)/2 edge slots are free; every boundary vertex is a source."""
    v = validate_distance_data(data)
    if v is not None:
        raise ValueError(f"invalid distance data: {v.message}")
    groups = tuple(
        (o, tuple((j, data.dist(o, j)) for j in range(1, data.m + 1) if j != o))
        for o in range(1, data.m + 1))
    return SearchProblem(data.n, tuple(index_pairs(data.n)), groups)


@dataclass(frozen=True)
class SearchCircuits:
    layout: QubitLayout
    test: Circuit
    oracle: Circuit
    diffusion: Circuit
    prep: Circuit
    result_qubit: int
    edge_qubits: tuple[int, ...]
    free_qubits: tuple[int, ...]


class _Pool:
    def __init__(self, base: int):
        self.base = base
        self.top = 0
        self.peak = 0

    def alloc(self, k: int = 1) -> list[int]:
        qs = [self.base + self.top + i for i in range(k)]
        self.top += k
        self.peak = max(self.peak, self.top)
        return qs

    def free(self, qs: Sequence[int]) -> None:
        for q in reversed(list(qs)):
            if q != self.base + self.top - 1:
                raise RuntimeError("pool freed out of stack order")
            self.top -= 1


def _edge_wire(emap: dict, j: int, k: int):
    return emap.get((j, k) if j < k else (k, j))


def _compact_group(out: list, pool: _Pool, problem: SearchProblem, emap: dict,
                   o: int, targets, t_qubit: int) -> None:
    n = problem.n
    others = [j for j in range(1, n + 1) if j != o]
    D = max(d for _, d in targets)
    layers = {1: {j: _edge_wire(emap, o, j) for j in others}}
    paths: list[Gate] = []
    held: list[int] = []
    for d in range(2, D + 1):
        js = others if d < D else [j for j, dj in targets if dj == D]
        layers[d] = {}
        for j in js:
            (q,) = pool.alloc()
            held.append(q)
            layers[d][j] = q
            _update_vertex(paths, pool, emap, layers[d - 1], o, j, n, q)
    out += paths
    branch: list[Gate] = []
    slots = pool.alloc(len(targets))
    for s, (j, d) in zip(slots, targets):
        _branch(branch, layers, j, d, s)
    out += branch
    F = pool.alloc(and_ancillas(len(slots)))
    emit_and(out, slots, t_qubit, F)
    pool.free(F)
    out += reversed(branch)
    pool.free(slots)
    out += reversed(paths)
    pool.free(held)


def _update_vertex(out: list, pool: _Pool | None, emap: dict, prev: dict, o: int, j: int,
                   n: int, target: int, A: dict | None = None, F: Sequence[int] = ()) -> None:
    """P(d,j) ^= P(d-1,j) or some k: P(d-1,k) and E(k,j), with A(k) computed and uncomputed."""
    compute: list[Gate] = []
    inputs = []
    ks = [k for k in range(1, n + 1) if k not in (o, j)]
    live = [k for k in ks if prev.get(k) is not None and _edge_wire(emap, k, j) is not None]
    a_qubits = pool.alloc(len(live)) if pool is not None else [A[k] for k in live]
    for k, a in zip(live, a_qubits):
        emit_ccnot(compute, prev[k], _edge_wire(emap, k, j), a)
        inputs.append(a)
    inputs.append(prev.get(j))
    out += compute
    n_in = sum(c is not None for c in inputs)
    f = pool.alloc(and_ancillas(n_in)) if pool is not None else F
    emit_or(out, inputs, target, f)
    if pool is not None:
        pool.free(f)
    out += compute
    if pool is not None:
        pool.free(a_qubits)


def _branch(out: list, layers: dict, j: int, d: int, s: int) -> None:
    """s ^= [P(d-1,j) = 0 and P(d,j) = 1], or s ^= P(1,j) when d = 1."""
    if d == 1:
        emit_cnot(out, layers[1][j], s)
        return
    cur, prev = layers[d][j], layers[d - 1][j]
    if prev is None:
        emit_cnot(out, cur, s)
    else:
        out.append(Gate("NOT", (prev,)))
        emit_ccnot(out, cur, prev, s)


def _full_group(out: list, problem: SearchProblem, emap: dict, P: dict, A: dict,
                F: Sequence[int], o: int, targets, t_qubit: int) -> None:
    n = problem.n
    others = [j for j in range(1, n + 1) if j != o]
    paths: list[Gate] = []
    layers = {d: {j: P[d, j] for j in others} for d in range(1, n)}
    for j in others:
        emit_cnot(paths, _edge_wire(emap, j, o), P[1, j])
    for d in range(2, n):
        for j in others:
            _update_vertex(paths, None, emap, layers[d - 1], o, j, n, P[d, j], A, F)
    out += paths
    branch: list[Gate] = []
    for j, d in targets:
        _branch(branch, layers, j, d, A[j])
    out += branch
    emit_and(out, [A[j] for j, _ in targets], t_qubit, F)
    out += reversed(branch)
    out += reversed(paths)


def _build_search(problem: SearchProblem, layout: str) -> SearchCircuits:
    n = problem.n
    edges = problem.edges
    N = len(edges)
    g = len(problem.groups)
    labels = [f"E({j},{k})" for j, k in edges] + ["R"]
    emap = {e: i for i, e in enumerate(edges)}
    R = N
    free = tuple(emap[e] for e in problem.free_edges)
    feasible = problem.feasible_distances()
    test: list[Gate] = []
    oracle: list[Gate] = []
    diffusion: list[Gate] = []

    if layout == "compact":
        T = list(range(N + 1, N + 1 + g))
        labels += [f"T({o})" for o, _ in problem.groups]
        pool = _Pool(len(labels))
        if feasible:
            for (o, targets), t in zip(problem.groups, T):
                _compact_group(test, pool, problem, emap, o, targets, t)
            oracle += test
            F = pool.alloc(and_ancillas(g))
            emit_and(oracle, T, R, F)
            pool.free(F)
            oracle += reversed(test)
        width = max(pool.peak, diffusion_ancillas(len(free)))
        S = list(range(pool.base, pool.base + width))
        labels += [f"S({k})" for k in range(1, width + 1)]
        emit_diffusion(diffusion, free, S[0], S[1:])
    elif layout == "full":
        base = N + 1
        P = {(d, j): base + (d - 1) * n + (j - 1) for d in range(1, n) for j in range(1, n + 1)}
        labels += [f"P({d},{j})" for d in range(1, n) for j in range(1, n + 1)]
        A = {k: len(labels) + k - 1 for k in range(1, n + 1)}
        labels += [f"A({k})" for k in range(1, n + 1)]
        width = max(1, n - 3, and_ancillas(g), diffusion_ancillas(len(free)),
                    *(and_ancillas(len(ts)) for _, ts in problem.groups))
        F = list(range(len(labels), len(labels) + width))
        labels += [f"F({k})" for k in range(1, width + 1)]
        T = list(range(len(labels), len(labels) + g))
        labels += [f"T({o})" for o, _ in problem.groups]
        if feasible:
            for (o, targets), t in zip(problem.groups, T):
                _full_group(test, problem, emap, P, A, F, o, targets, t)
            oracle += test
            emit_and(oracle, T, R, F)
            oracle += reversed(test)
        emit_diffusion(diffusion, free, F[0], F[1:])
    else:
        raise ValueError(f"unknown layout {layout!r}; use 'compact' or 'full'")

    lay = QubitLayout(tuple(labels), tuple(edges))
    anc = tuple(range(N + 1, len(labels)))
    prep: list[Gate] = [Gate("NOT", (emap[e],)) for e in problem.fixed_edges]
    prep += [Gate("NOT", (R,)), Gate("H", (R,))] + [Gate("H", (q,)) for q in free]
    return SearchCircuits(
        layout=lay,
        test=Circuit(lay, tuple(test), anc),
        oracle=Circuit(lay, tuple(oracle), anc),
        diffusion=Circuit(lay, tuple(diffusion), anc),
        prep=Circuit(lay, tuple(prep), anc),
        result_qubit=R,
        edge_qubits=tuple(range(N)),
        free_qubits=free,
    )


@lru_cache(maxsize=64)
def build_search(problem: SearchProblem, layout: str = "compact") -> SearchCircuits:
    """Oracle, diffusion and state preparation sharing one layout (cached)."""
    return _build_search(problem, layout)


def _as_data(n, m, d0) -> BoundaryDistanceData:
    """Accept BoundaryDistanceData, an m x m matrix or a list of (j, k, dist) triples."""
    if isinstance(d0, BoundaryDistanceData):
        if (d0.n, d0.m) != (n, m):
            raise ValueError("n, m disagree with the distance data")
        return d0
    rows = [list(r) for r in d0]
    is_matrix = len(rows) == m and all(len(r) == m for r in rows) and rows[0][0] == 0
    if is_matrix:
        return BoundaryDistanceData.from_matrix(n, rows)
    return BoundaryDistanceData.from_triples(n, m, rows)


def build_oracle(n: int, m: int, d0, layout: str = "compact") -> Circuit:
    """|e>|r>|0> -> |e>|r xor f(e)>|0> with f the layer-comparison test."""
    return build_search(problem_from_distance_data(_as_data(n, m, d0)), layout).oracle


def build_test(n: int, m: int, d0, layout: str = "compact") -> Circuit:
    """TEST alone: T(o) ^= [every required distance from o matches], P/A/F restored."""
    return build_search(problem_from_distance_data(_as_data(n, m, d0)), layout).test


def build_diffusion(N: int) -> Circuit:
    """Standalone DIFFUSION on qubits 0..N-1 with kick qubit N and ladder ancillas after it."""
    if N < 1:
        raise ValueError("N must be >= 1")
    w = and_ancillas(N)
    labels = [f"E({i})" for i in range(N)] + ["K"] + [f"F({k})" for k in range(1, w + 1)]
    out: list[Gate] = []
    emit_diffusion(out, list(range(N)), N, list(range(N + 1, N + 1 + w)))
    return Circuit(QubitLayout(tuple(labels)), tuple(out), tuple(range(N, N + 1 + w)))


def build_or2() -> Circuit:
    """Qubits: C1=0, C2=1, T=2."""
    out: list[Gate] = []
    emit_or2(out, 0, 1, 2)
    return Circuit(QubitLayout(("C(1)", "C(2)", "T")), tuple(out))


def _chain_layout(m: int) -> tuple[QubitLayout, list[int], int, list[int]]:
    w = and_ancillas(m)
    labels = [f"C({i})" for i in range(1, m + 1)] + ["T"] + [f"F({k})" for k in range(1, w + 1)]
    return QubitLayout(tuple(labels)), list(range(m)), m, list(range(m + 1, m + 1 + w))


def build_and_m(m: int) -> Circuit:
    """Qubits: C(1..m) = 0..m-1, T = m, F(1..m-2) after it."""
    if m < 1:
        raise ValueError("m must be >= 1")
    lay, C, T, F = _chain_layout(m)
    out: list[Gate] = []
    emit_and(out, C, T, F)
    return Circuit(lay, tuple(out), tuple(F))


def build_or_m(m: int) -> Circuit:
    """Same layout as :func:`build_and_m`."""
    if m < 1:
        raise ValueError("m must be >= 1")
    lay, C, T, F = _chain_layout(m)
    out: list[Gate] = []
    emit_or(out, C, T, F)
    return Circuit(lay, tuple(out), tuple(F))


def _full_registers(n: int):
    N = n * (n - 1) // 2
    edges = index_pairs(n)
    emap = {e: i for i, e in enumerate(edges)}
    labels = [f"E({j},{k})" for j, k in edges]
    P = {(d, j): N + (d - 1) * n + (j - 1) for d in range(1, n) for j in range(1, n + 1)}
    labels += [f"P({d},{j})" for d in range(1, n) for j in range(1, n + 1)]
    A = {k: len(labels) + k - 1 for k in range(1, n + 1)}
    labels += [f"A({k})" for k in range(1, n + 1)]
    w = max(n - 3, 0)
    F = list(range(len(labels), len(labels) + w))
    labels += [f"F({k})" for k in range(1, w + 1)]
    lay = QubitLayout(tuple(labels), tuple(edges))
    anc = tuple(A.values()) + tuple(F)
    return lay, emap, P, A, F, anc


def build_update(n: int, d: int, o: int) -> Circuit:
    """UPDATE for layer d from source o on the E/P/A/F layout of :func:`build_paths`."""
    if not 2 <= d <= n - 1:
        raise ValueError(f"layer d={d} outside 2..{n - 1}")
    if not 1 <= o <= n:
        raise ValueError(f"source {o} outside 1..{n}")
    lay, emap, P, A, F, anc = _full_registers(n)
    prev = {j: P[d - 1, j] for j in range(1, n + 1) if j != o}
    out: list[Gate] = []
    for j in range(1, n + 1):
        if j != o:
            _update_vertex(out, None, emap, prev, o, j, n, P[d, j], A, F)
    return Circuit(lay, tuple(out), anc)


def build_paths(n: int, o: int) -> Circuit:
    """PATHS from source o: a CNOT layer for P(1,.) then UPDATE for d = 2..n-1."""
    if not 1 <= o <= n:
        raise ValueError(f"source {o} outside 1..{n}")
    lay, emap, P, A, F, anc = _full_registers(n)
    out: list[Gate] = []
    for j in range(1, n + 1):
        if j != o:
            emit_cnot(out, _edge_wire(emap, j, o), P[1, j])
    for d in range(2, n):
        out += build_update(n, d, o).gates
    return Circuit(lay, tuple(out), anc)


# --- text export ----------------------------------------------------------

def to_text(c: Circuit) -> str:
    lines = [f"# qubits {c.qubit_count}"]
    lines += [f"# {i} {lab}" for i, lab in enumerate(c.layout.labels)]
    if c.ancilla_set:
        lines.append("# ancillas " + " ".join(map(str, c.ancilla_set)))
    lines += [str(g) for g in c.gates]
    return "\n".join(lines) + "\n"


_LABEL_RE = re.compile(r"#\s+(\d+)\s+(\S+)$")


def from_text(text: str) -> Circuit:
    labels: dict[int, str] = {}
    anc: tuple[int, ...] = ()
    gates = []
    Q = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts[:1] == ["qubits"]:
                Q = int(parts[1])
            elif parts[:1] == ["ancillas"]:
                anc = tuple(int(x) for x in parts[1:])
            elif (mt := _LABEL_RE.match(line)):
                labels[int(mt.group(1))] = mt.group(2)
            continue
        kind, *qs = line.split()
        gates.append(Gate(kind, tuple(int(q) for q in qs)))
    if Q is None:
        raise ValueError("missing '# qubits Q' header")
    lab = tuple(labels.get(i, f"q{i}") for i in range(Q))
    edges = tuple(tuple(int(x) for x in s[2:-1].split(","))
                  for s in lab if s.startswith("E(") and "," in s)
    c = Circuit(QubitLayout(lab, edges), tuple(gates), anc)
    c.validate()
    return c


def _and_len(k: int) -> int:
    return 1 if k <= 2 else 2 * (k - 2) + 1


def _or_len(k: int) -> int:
    return {0: 0, 1: 1, 2: 6}.get(k, 2 * k + _and_len(k) + 1)


def gate_count_formula(data: BoundaryDistanceData) -> int:
    """Closed-form gate count of the full-layout oracle for valid distance data."""
    n, m = data.n, data.m
    per_vertex = 2 * (n - 2) + _or_len(n - 1)
    paths = (n - 1) + (n - 2) * (n - 1) * per_vertex
    test = 0
    for o in range(1, m + 1):
        branch = sum(1 if data.dist(o, j) == 1 else 2 for j in range(1, m + 1) if j != o)
        test += 2 * paths + 2 * branch + _and_len(m - 1)
    return 2 * test + _and_len(m)
