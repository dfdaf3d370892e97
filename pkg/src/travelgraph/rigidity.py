"""Trees determined by their leaf-to-leaf distances.

Reconstruction peels one leaf trunk at a time: the triple (p, q, z) with the
largest Gromov product ``(p,q)_z`` makes p and q a cherry whose trunks meet
at the branch vertex v, with ``d(p,v) = (d(p,q) + d(p,z) - d(q,z)) / 2``.
After removing p's trunk the rest is rebuilt recursively and p is hung back
at the vertex of the q-z path that lies ``d(q,v)`` from q.
"""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .graph import AdjacencyVector, bfs_distances, edge_count, find_isomorphism, is_connected


class NotATreeMetric(ValueError):
    """No tree with these leaves realises the given distances."""


@dataclass(frozen=True)
class LeafDistanceMatrix:
    m: int
    d: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.d) != self.m or any(len(r) != self.m for r in self.d):
            raise ValueError("distance matrix must be m x m")

    @classmethod
    def from_matrix(cls, matrix) -> "LeafDistanceMatrix":
        rows = [tuple(int(x) for x in r) for r in matrix]
        return cls(len(rows), tuple(rows))

    @classmethod
    def from_triples(cls, m: int, triples) -> "LeafDistanceMatrix":
        d = [[0] * m for _ in range(m)]
        for p, q, dist in triples:
            d[p - 1][q - 1] = d[q - 1][p - 1] = int(dist)
        return cls.from_matrix(d)

    def __call__(self, p: int, q: int) -> int:
        return self.d[p - 1][q - 1]

    def triples(self) -> list[tuple[int, int, int]]:
        return [(p, q, self(p, q)) for p in range(1, self.m + 1) for q in range(p + 1, self.m + 1)]


def load_leaf_distances(path: str | Path) -> LeafDistanceMatrix:
    with open(path) as fh:
        obj = json.load(fh)
    return LeafDistanceMatrix.from_triples(int(obj["m"]), obj["d"])


@dataclass(frozen=True)
class Tree:
    graph: AdjacencyVector

    def __post_init__(self):
        g = self.graph
        if len(g.edges()) != g.n - 1 or not is_connected(g):
            raise ValueError("not a tree: need n-1 edges and connectivity")

    @classmethod
    def from_edges(cls, n: int, edges) -> "Tree":
        return cls(AdjacencyVector.from_edges(n, edges))

    @property
    def n(self) -> int:
        return self.graph.n

    def leaves(self) -> list[int]:
        if self.n == 1:
            return []
        return [v for v in range(1, self.n + 1) if self.graph.degree(v) == 1]

    def leaf_distances(self, leaves: Sequence[int] | None = None) -> LeafDistanceMatrix:
        leaves = list(self.leaves() if leaves is None else leaves)
        rows = []
        for p in leaves:
            dist = bfs_distances(self.graph, p)
            rows.append([dist[q] for q in leaves])
        return LeafDistanceMatrix.from_matrix(rows)


def gromov_product(d: LeafDistanceMatrix, p: int, q: int, z: int) -> int:
    """(p,q)_z = d(p,z) + d(q,z) - d(p,q)."""
    for x in (p, q, z):
        if not 1 <= x <= d.m:
            raise ValueError(f"leaf {x} outside 1..{d.m}")
    if len({p, q, z}) != 3:
        raise ValueError("p, q, z must be distinct")
    return d(p, z) + d(q, z) - d(p, q)


def leaf_trunk(t: Tree, p: int) -> list[int]:
    """Path p, x1, ..., y from leaf p through degree-2 vertices to the first
    vertex of another degree. For the 2-vertex tree it is the single edge."""
    if p not in t.leaves():
        raise ValueError(f"{p} is not a leaf")
    adj = t.graph.adjacency_lists()
    path = [p]
    prev, cur = None, p
    while True:
        nxt = [u for u in adj[cur] if u != prev]
        if not nxt:
            return path
        prev, cur = cur, nxt[0]
        path.append(cur)
        if len(adj[cur]) != 2:
            return path


def _check_matrix(d: LeafDistanceMatrix) -> None:
    m = d.m
    for p in range(1, m + 1):
        if d(p, p) != 0:
            raise NotATreeMetric(f"d({p},{p}) != 0")
    for p, q in itertools.combinations(range(1, m + 1), 2):
        if d(p, q) != d(q, p):
            raise NotATreeMetric(f"d({p},{q}) != d({q},{p})")
        lo = 2 if m >= 3 else 1
        if d(p, q) < lo:
            raise NotATreeMetric(f"d({p},{q}) = {d(p, q)} < {lo}")
    for p, q, z in itertools.permutations(range(1, m + 1), 3):
        g = gromov_product(d, p, q, z)
        if g < 0 or g % 2:
            raise NotATreeMetric(f"Gromov product ({p},{q})_{z} = {g} is odd or negative")


class _Builder:
    def __init__(self, m: int):
        self.adj: dict[int, set[int]] = {v: set() for v in range(1, m + 1)}
        self.next_id = m + 1

    def new_vertex(self) -> int:
        v = self.next_id
        self.next_id += 1
        self.adj[v] = set()
        return v

    def link(self, a: int, b: int) -> None:
        self.adj[a].add(b)
        self.adj[b].add(a)

    def chain(self, start: int, end: int, length: int) -> None:
        """Join start to end by a path with length-1 fresh interior vertices."""
        if length < 1:
            raise NotATreeMetric("non-positive path length")
        prev = start
        for _ in range(length - 1):
            v = self.new_vertex()
            self.link(prev, v)
            prev = v
        self.link(prev, end)

    def path(self, a: int, b: int) -> list[int]:
        parent = {a: None}
        queue = deque([a])
        while queue:
            u = queue.popleft()
            for w in self.adj[u]:
                if w not in parent:
                    parent[w] = u
                    queue.append(w)
        if b not in parent:
            raise NotATreeMetric("partial tree is disconnected")
        out = [b]
        while out[-1] != a:
            out.append(parent[out[-1]])
        return out[::-1]


def _peel(b: _Builder, d: LeafDistanceMatrix, leaves: list[int]) -> None:
    if len(leaves) == 2:
        p, q = leaves
        b.chain(p, q, d(p, q))
        return
    if len(leaves) == 3:
        p, q, z = leaves
        legs = [(d(p, q) + d(p, z) - d(q, z)) // 2,
                (d(p, q) + d(q, z) - d(p, z)) // 2,
                (d(p, z) + d(q, z) - d(p, q)) // 2]
        if min(legs) < 1:
            raise NotATreeMetric("three leaves on one path")
        c = b.new_vertex()
        for leaf, leg in zip(leaves, legs):
            b.chain(c, leaf, leg)
        return
    best = None
    for p, q, z in itertools.permutations(leaves, 3):
        if p > q:
            continue
        g = gromov_product(d, p, q, z)
        if best is None or g > best[0]:
            best = (g, p, q, z)
    _, p, q, z = best
    trunk = (d(p, q) + d(p, z) - d(q, z)) // 2
    to_v = d(p, q) - trunk
    if trunk < 1 or to_v < 1:
        raise NotATreeMetric("degenerate cherry")
    _peel(b, d, [x for x in leaves if x != p])
    qz = b.path(q, z)
    if to_v >= len(qz) - 1:
        raise NotATreeMetric("junction falls outside the q-z path")
    b.chain(qz[to_v], p, trunk)


def reconstruct_tree(d: LeafDistanceMatrix) -> Tree:
    """Tree whose leaves 1..m realise d, internal vertices numbered m+1.. in BFS order.

    Raises NotATreeMetric when no tree fits. The result is always re-checked.
    """
    if d.m < 2:
        raise ValueError("need at least two leaves")
    _check_matrix(d)
    b = _Builder(d.m)
    _peel(b, d, list(range(1, d.m + 1)))
    # renumber internal vertices m+1.. in BFS order from leaf 1
    order, seen, queue = [], {1}, deque([1])
    while queue:
        u = queue.popleft()
        order.append(u)
        for w in sorted(b.adj[u]):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    if len(order) != len(b.adj):
        raise NotATreeMetric("result is disconnected")
    rename = {v: v for v in range(1, d.m + 1)}
    for v in order:
        if v not in rename:
            rename[v] = len(rename) + 1
    n = len(b.adj)
    edges = {tuple(sorted((rename[u], rename[w]))) for u in b.adj for w in b.adj[u]}
    try:
        t = Tree.from_edges(n, edges)
    except ValueError as exc:
        raise NotATreeMetric(str(exc)) from None
    if t.leaves() != list(range(1, d.m + 1)) or t.leaf_distances() != d:
        raise NotATreeMetric("rebuilt tree does not reproduce the distances")
    return t


# --- enumeration of trees -------------------------------------------------

def _rooted_code(adj, v, parent) -> str:
    return "(" + "".join(sorted(_rooted_code(adj, w, v) for w in adj[v] if w != parent)) + ")"


def tree_centers(adj: dict[int, list[int]]) -> list[int]:
    deg = {v: len(ns) for v, ns in adj.items()}
    layer = [v for v, k in deg.items() if k <= 1]
    remaining = len(adj)
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            for w in adj[v]:
                deg[w] -= 1
                if deg[w] == 1:
                    nxt.append(w)
        layer = nxt
    return layer


def canonical_form(t: Tree) -> str:
    """Isomorphism invariant string (AHU encoding rooted at the center)."""
    adj = t.graph.adjacency_lists()
    return min(_rooted_code(adj, c, None) for c in tree_centers(adj))


def nonisomorphic_trees(n: int) -> list[Tree]:
    """One representative per isomorphism class of trees on n vertices."""
    if n < 1:
        return []
    if n == 1:
        return [Tree(AdjacencyVector.empty(1))]
    level = {canonical_form(Tree.from_edges(2, [(1, 2)])): [(1, 2)]}
    for k in range(3, n + 1):
        nxt = {}
        for edges in level.values():
            for v in range(1, k):
                cand = Tree.from_edges(k, edges + [(v, k)])
                key = canonical_form(cand)
                if key not in nxt:
                    nxt[key] = edges + [(v, k)]
        level = nxt
    return [Tree.from_edges(n, e) for _, e in sorted(level.items())]


def tree_from_pruefer(seq: Sequence[int], n: int) -> Tree:
    """Labelled tree on 1..n from a Pruefer sequence of length n-2."""
    if n == 1:
        return Tree(AdjacencyVector.empty(1))
    degree = [1] * (n + 1)
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = next(v for v in range(1, n + 1) if degree[v] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, w = [v for v in range(1, n + 1) if degree[v] == 1]
    edges.append((u, w))
    return Tree.from_edges(n, edges)


def labeled_trees(n: int) -> Iterator[Tree]:
    if n <= 2:
        if n == 2:
            yield Tree.from_edges(2, [(1, 2)])
        elif n == 1:
            yield Tree(AdjacencyVector.empty(1))
        return
    for seq in itertools.product(range(1, n + 1), repeat=n - 2):
        yield tree_from_pruefer(seq, n)


def random_tree(n: int, rng: np.random.Generator) -> Tree:
    seq = [int(x) for x in rng.integers(1, n + 1, size=max(n - 2, 0))]
    return tree_from_pruefer(seq, n)


def leaf_fixing_isomorphic(t: Tree, rebuilt: Tree, leaves: Sequence[int] | None = None) -> bool:
    """True if some isomorphism rebuilt -> t sends leaf i to ``leaves[i-1]``."""
    leaves = list(t.leaves() if leaves is None else leaves)
    if rebuilt.n != t.n:
        return False
    fixed = {i + 1: p for i, p in enumerate(leaves)}
    return find_isomorphism(rebuilt.graph, t.graph, fixed) is not None


# --- rigidity and monotonicity checks -------------------------------------

@dataclass
class RigidityReport:
    n: int
    boundary: tuple[int, ...]
    require_degree_one: bool
    enumerated: int = 0
    connected: int = 0
    matched: int = 0
    non_isomorphic: int = 0
    counterexamples: list[AdjacencyVector] = field(default_factory=list)

    @property
    def rigid(self) -> bool:
        return self.non_isomorphic == 0

    def to_dict(self) -> dict:
        return {"n": self.n, "boundary": list(self.boundary),
                "require_degree_one": self.require_degree_one,
                "enumerated": self.enumerated, "connected": self.connected,
                "matched": self.matched, "non_isomorphic": self.non_isomorphic,
                "rigid": self.rigid,
                "counterexamples": [g.edges() for g in self.counterexamples]}


def _candidate_graphs(n: int, B: Sequence[int], require_degree_one: bool) -> Iterator[AdjacencyVector]:
    if not require_degree_one:
        for value in range(1 << edge_count(n)):
            yield AdjacencyVector.from_int(n, value)
        return
    Bset = set(B)
    inner = [v for v in range(1, n + 1) if v not in Bset]
    inner_pairs = list(itertools.combinations(inner, 2))
    choices = [[u for u in range(1, n + 1) if u != b] for b in B]
    for picks in itertools.product(*choices):
        pick = dict(zip(B, picks))
        # a boundary vertex may only touch another boundary vertex that picked it back
        if any(u in Bset and pick[u] != b for b, u in pick.items()):
            continue
        base = {tuple(sorted((b, u))) for b, u in pick.items()}
        for mask in range(1 << len(inner_pairs)):
            edges = base | {inner_pairs[i] for i in range(len(inner_pairs)) if mask >> i & 1}
            yield AdjacencyVector.from_edges(n, edges)


def verify_boundary_rigidity(t: Tree | AdjacencyVector, boundary: Sequence[int] | None = None,
                             require_degree_one: bool = True, max_n: int = 7,
                             keep: int = 3) -> RigidityReport:
    """Search every connected graph on the same labelled vertex set that
    matches the boundary distances of ``t``; count those not isomorphic to t
    by a boundary-fixing map.

    ``boundary`` defaults to the leaves. ``require_degree_one`` restricts the
    search to graphs where every boundary vertex has degree 1.
    """
    g0 = t.graph if isinstance(t, Tree) else t
    n = g0.n
    if n > max_n:
        raise ValueError(f"n={n} exceeds the enumeration guard {max_n}")
    B = tuple(sorted(t.leaves() if boundary is None else boundary))
    target = {b: bfs_distances(g0, b) for b in B}
    fixed = {b: b for b in B}
    report = RigidityReport(n, B, require_degree_one)
    for g in _candidate_graphs(n, B, require_degree_one):
        report.enumerated += 1
        if not is_connected(g):
            continue
        report.connected += 1
        if any(bfs_distances(g, b)[c] != target[b][c] for b in B for c in B):
            continue
        report.matched += 1
        if find_isomorphism(g, g0, fixed) is None:
            report.non_isomorphic += 1
            if len(report.counterexamples) < keep:
                report.counterexamples.append(g)
    return report


@dataclass
class MonotonicityReport:
    hypothesis: bool
    size1: int
    size2: int
    inequality_holds: bool
    equality_case: bool
    isomorphic: bool | None

    @property
    def consistent(self) -> bool:
        if not self.hypothesis:
            return True
        return self.inequality_holds and (not self.equality_case or bool(self.isomorphic))


def check_monotonicity(t1: Tree, t2: Tree, sigma: dict[int, int]) -> MonotonicityReport:
    """If d1(p,q) >= d2(sigma p, sigma q) on all leaf pairs then |X1| >= |X2|,
    with an isomorphism extending sigma when the sizes agree."""
    L1, L2 = t1.leaves(), t2.leaves()
    if len(L1) != len(L2):
        raise ValueError("trees have different leaf counts")
    if sorted(sigma) != sorted(L1) or sorted(sigma.values()) != sorted(L2):
        raise ValueError("sigma must biject the leaves of t1 onto those of t2")
    d1 = {p: bfs_distances(t1.graph, p) for p in L1}
    d2 = {p: bfs_distances(t2.graph, p) for p in L2}
    hyp = all(d1[p][q] >= d2[sigma[p]][sigma[q]] for p in L1 for q in L1)
    eq = t1.n == t2.n
    iso = None
    if hyp and eq:
        iso = find_isomorphism(t1.graph, t2.graph, sigma) is not None
    return MonotonicityReport(hyp, t1.n, t2.n, t1.n >= t2.n, eq, iso)


def all_leaf_bijections(t1: Tree, t2: Tree) -> Iterator[dict[int, int]]:
    L1, L2 = t1.leaves(), t2.leaves()
    for perm in itertools.permutations(L2):
        yield dict(zip(L1, perm))


def tree_edge_count_from_tripod(d: LeafDistanceMatrix) -> int:
    """With three leaves the edge count is half the sum of leaf distances."""
    if d.m != 3:
        raise ValueError("defined for three leaves")
    return (d(1, 2) + d(1, 3) + d(2, 3)) // 2
