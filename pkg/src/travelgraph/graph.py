"""Graphs as upper-triangular adjacency bit vectors, boundary distance data,
the classical layer-by-layer path computation and solution test, and the
brute-force ground truth used to check everything else.

Vertices are 1-indexed. The pair (j, k), j < k, sits at flat position
``(j-1)*n - j*(j+1)//2 + k - 1``; the same position is the qubit index of
E(j, k) in every circuit layout and bit i of an integer-encoded vector.
"""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence


def edge_count(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(n: int, j: int, k: int) -> int:
    """Flat position of the unordered pair {j, k} (1-indexed vertices)."""
    if j == k:
        raise ValueError(f"self-loop ({j},{j}) is not a valid pair")
    if j > k:
        j, k = k, j
    if j < 1 or k > n:
        raise ValueError(f"pair ({j},{k}) out of range for n={n}")
    return (j - 1) * n - j * (j + 1) // 2 + k - 1


def index_pairs(n: int) -> list[tuple[int, int]]:
    """All pairs in flat order."""
    return [(j, k) for j in range(1, n + 1) for k in range(j + 1, n + 1)]


@dataclass(frozen=True)
class AdjacencyVector:
    """A simple undirected graph on vertices 1..n."""

    n: int
    bits: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if len(self.bits) != edge_count(self.n):
            raise ValueError(
                f"expected {edge_count(self.n)} bits for n={self.n}, got {len(self.bits)}")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0 or 1")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "AdjacencyVector":
        bits = [0] * edge_count(n)
        for j, k in edges:
            bits[pair_index(n, j, k)] = 1
        return cls(n, tuple(bits))

    @classmethod
    def from_int(cls, n: int, value: int) -> "AdjacencyVector":
        N = edge_count(n)
        if value < 0 or value >= 1 << N:
            raise ValueError(f"value {value} out of range for n={n}")
        return cls(n, tuple((value >> i) & 1 for i in range(N)))

    @classmethod
    def empty(cls, n: int) -> "AdjacencyVector":
        return cls(n, (0,) * edge_count(n))

    def to_int(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))

    def lookup(self, j: int, k: int) -> int:
        return self.bits[pair_index(self.n, j, k)]

    def edges(self) -> list[tuple[int, int]]:
        return [p for p, b in zip(index_pairs(self.n), self.bits) if b]

    def neighbors(self, v: int) -> list[int]:
        return [u for u in range(1, self.n + 1) if u != v and self.lookup(u, v)]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def adjacency_lists(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in range(1, self.n + 1)}
        for j, k in self.edges():
            adj[j].append(k)
            adj[k].append(j)
        return adj

    def bitstring(self) -> str:
        """Bits in reverse lexicographic pair order, e.g. e23 e13 e12 for n=3."""
        return "".join(str(b) for b in reversed(self.bits))

    @classmethod
    def from_bitstring(cls, n: int, text: str) -> "AdjacencyVector":
        if len(text) != edge_count(n) or set(text) - {"0", "1"}:
            raise ValueError(f"bad bitstring {text!r} for n={n}")
        return cls(n, tuple(int(c) for c in reversed(text)))


@dataclass(frozen=True)
class BoundaryDistanceData:
    """Required distances ``d0`` between boundary vertices 1..m of an n-vertex graph.

    ``d0`` is stored as an m x m tuple of tuples; ``d0[j-1][k-1]`` is d0(j, k).
    """

    n: int
    m: int
    d0: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 1 or not 1 <= self.m <= self.n:
            raise ValueError(f"need 1 <= m <= n, got n={self.n}, m={self.m}")
        if len(self.d0) != self.m or any(len(row) != self.m for row in self.d0):
            raise ValueError("d0 must be an m x m matrix")

    @classmethod
    def from_triples(cls, n: int, m: int, triples: Iterable[Sequence[int]]) -> "BoundaryDistanceData":
        d = [[0] * m for _ in range(m)]
        for j, k, dist in triples:
            if not (1 <= j <= m and 1 <= k <= m):
                raise ValueError(f"boundary pair ({j},{k}) outside 1..{m}")
            d[j - 1][k - 1] = d[k - 1][j - 1] = int(dist)
        return cls(n, m, tuple(map(tuple, d)))

    @classmethod
    def from_matrix(cls, n: int, matrix: Sequence[Sequence[int]]) -> "BoundaryDistanceData":
        return cls(n, len(matrix), tuple(tuple(int(x) for x in row) for row in matrix))

    def dist(self, j: int, k: int) -> int:
        return self.d0[j - 1][k - 1]

    def triples(self) -> list[tuple[int, int, int]]:
        return [(j, k, self.dist(j, k)) for j in range(1, self.m + 1)
                for k in range(j + 1, self.m + 1)]

    @property
    def edge_bits(self) -> int:
        return edge_count(self.n)


@dataclass(frozen=True)
class Violation:
    condition: str
    indices: tuple[int, ...]
    message: str


def validate_distance_data(data: BoundaryDistanceData) -> Violation | None:
    """Return None when the data is admissible, else the first violated condition.

    Conditions are checked in the order diagonal, symmetry, positivity, range.
    """
    m, d = data.m, data.dist
    for j in range(1, m + 1):
        if d(j, j) != 0:
            return Violation("diagonal", (j, j), f"d0({j},{j}) = {d(j, j)} != 0")
    for j, k in itertools.combinations(range(1, m + 1), 2):
        if d(j, k) != d(k, j):
            return Violation("symmetry", (j, k), f"d0({j},{k}) != d0({k},{j})")
    for j, k in itertools.combinations(range(1, m + 1), 2):
        if d(j, k) < 1:
            return Violation("positivity", (j, k), f"d0({j},{k}) = {d(j, k)} < 1")
    for j, k in itertools.combinations(range(1, m + 1), 2):
        if d(j, k) > data.n - 1:
            return Violation("range", (j, k),
                             f"d0({j},{k}) = {d(j, k)} exceeds n-1 = {data.n - 1}")
    return None


@dataclass(frozen=True)
class PathLayerTable:
    """p(d, j) for d = 1..n-1 and j != o, stored row-major as ``rows[d-1][j-1]``.

    The entry at j = o is unused and always 0.
    """

    n: int
    o: int
    rows: tuple[tuple[int, ...], ...]

    def __call__(self, d: int, j: int) -> int:
        if j == self.o:
            raise ValueError("p(d, o) is not defined")
        return self.rows[d - 1][j - 1]

    def layer(self, d: int) -> dict[int, int]:
        return {j: self(d, j) for j in range(1, self.n + 1) if j != self.o}


def classical_paths(e: AdjacencyVector, o: int) -> PathLayerTable:
    """Layer table of vertices within distance d of ``o``, computed step by step
    from the previous layer exactly as the reversible circuit does it."""
    n = e.n
    if not 1 <= o <= n:
        raise ValueError(f"source {o} out of range 1..{n}")
    others = [j for j in range(1, n + 1) if j != o]
    p = [[0] * n for _ in range(max(n - 1, 0))]
    if n == 1:
        return PathLayerTable(n, o, ())
    for j in others:
        p[0][j - 1] = 1 if e.lookup(o, j) else 0
    for d in range(2, n):
        for j in others:
            a = {}
            for k in others:
                if k == j:
                    continue
                a[k] = 1 if p[d - 2][k - 1] == 1 and e.lookup(k, j) == 1 else 0
            p[d - 1][j - 1] = 1 if p[d - 2][j - 1] == 1 or any(a.values()) else 0
    return PathLayerTable(n, o, tuple(map(tuple, p)))


def classical_test(e: AdjacencyVector, data: BoundaryDistanceData) -> int:
    """1 iff the graph realises the boundary distances (layer comparison form)."""
    if e.n != data.n:
        raise ValueError("graph and data disagree on n")
    t = []
    for o in range(1, data.m + 1):
        p = classical_paths(e, o)
        s = []
        for j in range(1, data.m + 1):
            if j == o:
                continue
            d = data.dist(o, j)
            if d == 1 and p(1, j) == 1:
                s.append(1)
            elif d >= 2 and p(d - 1, j) == 0 and p(d, j) == 1:
                s.append(1)
            else:
                s.append(0)
        t.append(int(all(s)))
    return int(all(t))


def bfs_distances(e: AdjacencyVector, source: int) -> dict[int, int | None]:
    """Plain BFS; unreachable vertices map to None."""
    adj = e.adjacency_lists()
    dist: dict[int, int | None] = {v: None for v in adj}
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] is None:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def is_connected(e: AdjacencyVector) -> bool:
    return all(v is not None for v in bfs_distances(e, 1).values())


def realizes(e: AdjacencyVector, data: BoundaryDistanceData) -> bool:
    """BFS-based check, kept independent of the layer algorithm."""
    for j in range(1, data.m + 1):
        dist = bfs_distances(e, j)
        for k in range(1, data.m + 1):
            if dist[k] != data.dist(j, k):
                return False
    return True


def iter_graphs(n: int) -> Iterator[AdjacencyVector]:
    for value in range(1 << edge_count(n)):
        yield AdjacencyVector.from_int(n, value)


def brute_force_solutions(data: BoundaryDistanceData, max_edge_bits: int = 30) -> list[AdjacencyVector]:
    """Every adjacency vector passing ``classical_test``, ordered by integer value."""
    N = data.edge_bits
    if N > max_edge_bits:
        raise ValueError(f"2^{N} graphs exceeds the enumeration guard 2^{max_edge_bits}")
    return [e for e in iter_graphs(data.n) if classical_test(e, data)]


def find_isomorphism(a: AdjacencyVector, b: AdjacencyVector,
                     fixed: dict[int, int] | None = None) -> dict[int, int] | None:
    """Backtracking search for an edge-preserving bijection a -> b extending ``fixed``."""
    if a.n != b.n:
        raise ValueError("graphs have different vertex counts")
    n = a.n
    adj_a = {v: set(ns) for v, ns in a.adjacency_lists().items()}
    adj_b = {v: set(ns) for v, ns in b.adjacency_lists().items()}
    if sorted(map(len, adj_a.values())) != sorted(map(len, adj_b.values())):
        return None
    mapping: dict[int, int] = {}
    used: set[int] = set()
    for u, v in (fixed or {}).items():
        if len(adj_a[u]) != len(adj_b[v]) or v in used:
            return None
        mapping[u] = v
        used.add(v)
    for u, v in mapping.items():
        for u2, v2 in mapping.items():
            if (u2 in adj_a[u]) != (v2 in adj_b[v]):
                return None

    # Most-constrained first: vertices adjacent to already-mapped ones.
    order = sorted((v for v in range(1, n + 1) if v not in mapping),
                   key=lambda v: (-len(adj_a[v] & mapping.keys()), -len(adj_a[v])))

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        u = order[i]
        for v in range(1, n + 1):
            if v in used or len(adj_b[v]) != len(adj_a[u]):
                continue
            if any((w in adj_a[u]) != (mapping[w] in adj_b[v]) for w in mapping):
                continue
            mapping[u] = v
            used.add(v)
            if extend(i + 1):
                return True
            del mapping[u]
            used.discard(v)
        return False

    return dict(mapping) if extend(0) else None


def graphs_isomorphic(a: AdjacencyVector, b: AdjacencyVector, boundary: int | None = None,
                      max_n: int = 10) -> int:
    """1 if a and b are isomorphic. With ``boundary=m`` the bijection must fix 1..m."""
    if a.n != b.n:
        raise ValueError("graphs have different vertex counts")
    if a.n > max_n:
        raise ValueError(f"n={a.n} exceeds the isomorphism guard {max_n}")
    fixed = {v: v for v in range(1, boundary + 1)} if boundary else None
    return int(find_isomorphism(a, b, fixed) is not None)


_INSTANCE_TRIPLES = {
    "A": (3, 2, [(1, 2, 2)]),
    "B": (4, 3, [(1, 2, 2), (1, 3, 2), (2, 3, 1)]),
    "C": (5, 4, [(1, 2, 2), (1, 3, 2), (1, 4, 1), (2, 3, 1), (2, 4, 2), (3, 4, 1)]),
    "D": (5, 4, [(1, 2, 2), (1, 3, 2), (1, 4, 2), (2, 3, 2), (2, 4, 2), (3, 4, 2)]),
}

INSTANCE_NAMES = tuple(_INSTANCE_TRIPLES)


def builtin_instance(name: str) -> BoundaryDistanceData:
    try:
        n, m, triples = _INSTANCE_TRIPLES[name.upper()]
    except KeyError:
        raise ValueError(f"unknown instance {name!r}; expected one of {INSTANCE_NAMES}") from None
    return BoundaryDistanceData.from_triples(n, m, triples)


def instance_from_dict(obj: dict) -> BoundaryDistanceData:
    try:
        n, m, triples = int(obj["n"]), int(obj["m"]), obj["d0"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"instance needs integer 'n', 'm' and a 'd0' triple list: {exc}") from None
    for t in triples:
        if len(t) != 3 or not t[0] < t[1]:
            raise ValueError(f"d0 entries must be [j, k, dist] with j < k, got {t!r}")
    return BoundaryDistanceData.from_triples(n, m, triples)


def instance_to_dict(data: BoundaryDistanceData) -> dict:
    return {"n": data.n, "m": data.m, "d0": [list(t) for t in data.triples()]}


def load_instance(ref: str | Path) -> BoundaryDistanceData:
    """A built-in name ("A".."D") or a path to a JSON instance file."""
    if isinstance(ref, str) and ref.upper() in _INSTANCE_TRIPLES:
        return builtin_instance(ref)
    with open(ref) as fh:
        return instance_from_dict(json.load(fh))


def save_instance(data: BoundaryDistanceData, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(data), fh, indent=2)
        fh.write("\n")
