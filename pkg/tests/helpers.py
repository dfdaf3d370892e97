"""Independent reference implementations used as test oracles."""
import itertools
from functools import reduce

import numpy as np

from travelgraph.graph import AdjacencyVector, BoundaryDistanceData, edge_count

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def dense_gate(kind, qubits, Q):
    """Full 2^Q x 2^Q matrix, built column by column from the gate's action on basis states."""
    if kind == "H":
        # qubit q is bit q, i.e. the (Q-1-q)-th kron factor
        ops = [I2] * Q
        ops[Q - 1 - qubits[0]] = H
        return reduce(np.kron, ops)
    U = np.zeros((2 ** Q, 2 ** Q), dtype=complex)
    for x in range(2 ** Q):
        y = x
        ctrl = all(x >> c & 1 for c in qubits[:-1])
        if ctrl:
            y ^= 1 << qubits[-1]
        U[y, x] = 1
    return U


def dense_circuit(gates, Q):
    U = np.eye(2 ** Q, dtype=complex)
    for g in gates:
        U = dense_gate(g.kind, g.qubits, Q) @ U
    return U


def floyd_distances(e: AdjacencyVector):
    """All-pairs distances by Floyd-Warshall (1-indexed dict of dicts, inf if apart)."""
    n = e.n
    INF = float("inf")
    d = [[0 if i == j else INF for j in range(n + 1)] for i in range(n + 1)]
    for j, k in e.edges():
        d[j][k] = d[k][j] = 1
    for k in range(1, n + 1):
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d


def realizes_floyd(e: AdjacencyVector, data: BoundaryDistanceData) -> bool:
    d = floyd_distances(e)
    return all(d[j][k] == data.dist(j, k) for j in range(1, data.m + 1)
               for k in range(1, data.m + 1))


def isomorphic_by_permutation(a: AdjacencyVector, b: AdjacencyVector, fixed=()):
    """Try every vertex permutation that fixes ``fixed`` pointwise."""
    n = a.n
    ea = {frozenset(e) for e in a.edges()}
    eb = {frozenset(e) for e in b.edges()}
    if len(ea) != len(eb):
        return False
    rest = [v for v in range(1, n + 1) if v not in fixed]
    for perm in itertools.permutations(rest):
        m = {v: v for v in fixed}
        m.update(zip(rest, perm))
        if all(frozenset((m[x], m[y])) in eb for x, y in map(tuple, ea)):
            return True
    return False


def random_valid_d0(n, m, rng) -> BoundaryDistanceData:
    d = [[0] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            d[i][j] = d[j][i] = int(rng.integers(1, n))
    return BoundaryDistanceData.from_matrix(n, d)


def random_realizable_d0(n, m, rng) -> BoundaryDistanceData:
    """Distance data read off a random connected graph, so at least one solution exists."""
    while True:
        e = AdjacencyVector.from_int(n, int(rng.integers(0, 2 ** edge_count(n))))
        d = floyd_distances(e)
        if all(d[1][k] < float("inf") for k in range(1, n + 1)):
            rows = [[int(d[i][j]) for j in range(1, m + 1)] for i in range(1, m + 1)]
            return BoundaryDistanceData.from_matrix(n, rows)


def basis_inputs(N, Q):
    """(2^N, Q) array whose first N columns enumerate every E value."""
    X = np.zeros((2 ** N, Q), dtype=np.uint8)
    v = np.arange(2 ** N)
    for i in range(N):
        X[:, i] = (v >> i) & 1
    return X
