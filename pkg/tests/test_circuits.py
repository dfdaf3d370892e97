import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import basis_inputs, dense_circuit, random_valid_d0
from travelgraph.circuits import (Circuit, SearchProblem, build_and_m, build_diffusion,
                                  build_oracle, build_or2, build_or_m, build_paths, build_search, build_test,
                                  build_update, from_text, gate_count_formula,
                                  problem_from_distance_data, resource_report, reverse, to_text)
from travelgraph.graph import (AdjacencyVector, BoundaryDistanceData, builtin_instance,
                               classical_paths, classical_test, edge_count, iter_graphs)
from travelgraph.statevector import (Gate, apply_circuit, apply_circuit_basis_batch, gate,
                                     new_register)

# fitted once on n = 3..8 and frozen: qubits <= C1 n^2, gates <= C2 m n^3
C1_QUBITS = 2.5
C2_GATES = 24.0


def run_rows(c: Circuit, rows: np.ndarray) -> np.ndarray:
    return apply_circuit_basis_batch(c.gates, rows)


def chain_rows(m, Q, t=0):
    X = np.zeros((2 ** m, Q), dtype=np.uint8)
    X[:, :m] = basis_inputs(m, m)
    X[:, m] = t
    return X


@pytest.mark.parametrize("c1,c2,t,expected", [
    (0, 0, 0, 0), (1, 0, 0, 1), (0, 1, 0, 1), (1, 1, 0, 1), (1, 1, 1, 0), (0, 0, 1, 1),
])
def test_or2_truth_table(c1, c2, t, expected):
    out = run_rows(build_or2(), np.array([[c1, c2, t]], dtype=np.uint8))[0]
    assert tuple(out) == (c1, c2, expected)


def test_or2_gate_sequence():
    kinds = [g.kind for g in build_or2().gates]
    assert kinds == ["NOT", "NOT", "NOT", "CCNOT", "NOT", "NOT"]


@pytest.mark.parametrize("pattern,t_out", [((1, 1, 1), 1), ((1, 0, 1), 0)])
def test_and3_examples(pattern, t_out):
    c = build_and_m(3)
    row = np.array([list(pattern) + [0, 0]], dtype=np.uint8)
    out = run_rows(c, row)[0]
    assert out[3] == t_out and out[4] == 0


@pytest.mark.parametrize("m", range(1, 8))
@pytest.mark.parametrize("t", [0, 1])
def test_and_m_exhaustive(m, t):
    c = build_and_m(m)
    X = chain_rows(m, c.qubit_count, t)
    out = run_rows(c, X)
    assert np.array_equal(out[:, :m], X[:, :m])
    assert np.array_equal(out[:, m], t ^ X[:, :m].all(axis=1))
    assert not out[:, m + 1:].any()


@pytest.mark.parametrize("m", range(1, 8))
@pytest.mark.parametrize("t", [0, 1])
def test_or_m_exhaustive(m, t):
    c = build_or_m(m)
    X = chain_rows(m, c.qubit_count, t)
    out = run_rows(c, X)
    assert np.array_equal(out[:, :m], X[:, :m])
    assert np.array_equal(out[:, m], t ^ X[:, :m].any(axis=1))
    assert not out[:, m + 1:].any()


def test_or4_examples():
    c = build_or_m(4)
    zero = np.zeros((1, c.qubit_count), dtype=np.uint8)
    assert run_rows(c, zero)[0][4] == 0
    one = zero.copy()
    one[0, 2] = 1
    assert run_rows(c, one)[0][4] == 1


@pytest.mark.parametrize("m", [3, 5, 9])
def test_chain_gate_counts_are_linear(m):
    assert len(build_and_m(m)) == 2 * (m - 2) + 1
    assert len(build_or_m(m)) == 2 * m + len(build_and_m(m)) + 1


# --- UPDATE / PATHS -------------------------------------------------------

def _paths_registers(c: Circuit, n):
    lay = c.layout
    P = {(d, j): lay.index(f"P({d},{j})") for d in range(1, n) for j in range(1, n + 1)}
    return P, lay.register("A") + lay.register("F")


@pytest.mark.parametrize("n,o,d", [(3, 1, 2), (4, 1, 2), (4, 2, 3), (5, 3, 2), (5, 1, 4)])
def test_update_matches_classical_layer(n, o, d):
    c = build_update(n, d, o)
    P, anc = _paths_registers(c, n)
    graphs = list(iter_graphs(n))[:: max(1, 2 ** edge_count(n) // 256)]
    X = np.zeros((len(graphs), c.qubit_count), dtype=np.uint8)
    for r, e in enumerate(graphs):
        X[r, :edge_count(n)] = e.bits
        for j, bit in classical_paths(e, o).layer(d - 1).items():
            X[r, P[d - 1, j]] = bit
    out = run_rows(c, X)
    for r, e in enumerate(graphs):
        for j, bit in classical_paths(e, o).layer(d).items():
            assert out[r, P[d, j]] == bit
    assert not out[:, anc].any()


def test_update_empty_graph_keeps_layer_zero():
    c = build_update(4, 2, 1)
    out = run_rows(c, np.zeros((1, c.qubit_count), dtype=np.uint8))
    assert not out.any()


@pytest.mark.parametrize("d,o", [(2, 1), (3, 1), (2, 4)])
def test_update_ancillas_clean_exhaustive_n4(d, o):
    # every E and every P(d-1, .) pattern, including ones no graph produces
    n = 4
    c = build_update(n, d, o)
    P, anc = _paths_registers(c, n)
    others = [j for j in range(1, n + 1) if j != o]
    cols = list(range(edge_count(n))) + [P[d - 1, j] for j in others]
    X = np.zeros((2 ** len(cols), c.qubit_count), dtype=np.uint8)
    X[:, cols] = basis_inputs(len(cols), len(cols))
    out = run_rows(c, X)
    assert not out[:, anc].any()
    assert np.array_equal(out[:, cols], X[:, cols])


@pytest.mark.parametrize("bad", [(4, 1, 1), (4, 4, 1), (4, 2, 5)])
def test_update_parameter_range(bad):
    with pytest.raises(ValueError):
        build_update(*bad)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_paths_matches_classical_table(n):
    graphs = list(iter_graphs(n))[:: max(1, 2 ** edge_count(n) // 300)]
    for o in range(1, n + 1):
        c = build_paths(n, o)
        P, anc = _paths_registers(c, n)
        X = np.zeros((len(graphs), c.qubit_count), dtype=np.uint8)
        for r, e in enumerate(graphs):
            X[r, :edge_count(n)] = e.bits
        out = run_rows(c, X)
        for r, e in enumerate(graphs):
            table = classical_paths(e, o)
            for d in range(1, n):
                for j in range(1, n + 1):
                    if j != o:
                        assert out[r, P[d, j]] == table(d, j)
        assert not out[:, anc].any()


def test_paths_star_graph():
    n = 5
    e = AdjacencyVector.from_edges(n, [(1, 5), (2, 5), (3, 5), (4, 5)])
    c = build_paths(n, 1)
    P, _ = _paths_registers(c, n)
    X = np.zeros((1, c.qubit_count), dtype=np.uint8)
    X[0, :edge_count(n)] = e.bits
    out = run_rows(c, X)[0]
    assert out[P[1, 5]] == 1 and all(out[P[1, j]] == 0 for j in (2, 3, 4))
    assert all(out[P[2, j]] == 1 for j in (2, 3, 4, 5))


def test_paths_empty_graph():
    c = build_paths(4, 2)
    assert not run_rows(c, np.zeros((1, c.qubit_count), dtype=np.uint8)).any()


# --- TEST / ORACLE ---------------------------------------------------------

def exhaustive_oracle_check(data: BoundaryDistanceData, layout: str):
    sc = build_search(problem_from_distance_data(data), layout)
    N = data.edge_bits
    Q = sc.layout.qubit_count
    X = basis_inputs(N, Q)
    out = run_rows(sc.oracle, X)
    f = np.array([classical_test(AdjacencyVector.from_int(data.n, v), data) for v in range(2 ** N)])
    assert np.array_equal(out[:, sc.result_qubit], f)
    assert np.array_equal(out[:, :N], X[:, :N])
    assert not out[:, N + 1:].any()
    # R = 1 on entry flips the other way
    X[:, sc.result_qubit] = 1
    out = run_rows(sc.oracle, X)
    assert np.array_equal(out[:, sc.result_qubit], 1 - f)
    return f


@pytest.mark.parametrize("layout", ["compact", "full"])
@pytest.mark.parametrize("name", ["A", "B"])
def test_oracle_exhaustive_on_instances(name, layout):
    f = exhaustive_oracle_check(builtin_instance(name), layout)
    assert f.sum() == 1


@pytest.mark.parametrize("layout", ["compact", "full"])
def test_oracle_exhaustive_on_random_tables(layout, rng):
    for _ in range(10):
        n = int(rng.integers(3, 5))
        m = int(rng.integers(2, n + 1))
        exhaustive_oracle_check(random_valid_d0(n, m, rng), layout)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_oracle_sampled_at_n5_and_n6(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 7))
    data = random_valid_d0(n, int(rng.integers(2, 5)), rng)
    for layout in ("compact", "full"):
        sc = build_search(problem_from_distance_data(data), layout)
        N, Q = data.edge_bits, sc.layout.qubit_count
        vals = rng.integers(0, 2 ** N, size=64)
        X = np.zeros((vals.size, Q), dtype=np.uint8)
        for i in range(N):
            X[:, i] = (vals >> i) & 1
        out = run_rows(sc.oracle, X)
        f = [classical_test(AdjacencyVector.from_int(n, int(v)), data) for v in vals]
        assert list(out[:, sc.result_qubit]) == f
        assert not out[:, N + 1:].any()


def test_oracle_instance_a_examples():
    c = build_oracle(3, 2, [[0, 2], [2, 0]])
    assert c.qubit_count == 8
    rows = np.zeros((2, 8), dtype=np.uint8)
    rows[0, :3] = (0, 1, 1)
    rows[1, :3] = (1, 0, 0)
    out = run_rows(c, rows)
    assert out[0, 3] == 1 and out[1, 3] == 0


def test_oracle_accepts_triples():
    a = build_oracle(3, 2, [(1, 2, 2)])
    b = build_oracle(3, 2, builtin_instance("A"))
    assert a.gates == b.gates


@pytest.mark.parametrize("layout", ["compact", "full"])
def test_test_circuit_sets_t_bits(layout):
    data = builtin_instance("A")
    c = build_test(3, 2, data, layout)
    T = c.layout.register("T")
    rows = basis_inputs(3, c.qubit_count)
    out = run_rows(c, rows)
    for v in range(8):
        e = AdjacencyVector.from_int(3, v)
        for o, t in zip((1, 2), T):
            want = int(all(classical_paths(e, o)(data.dist(o, j), j) and
                           (data.dist(o, j) == 1 or not classical_paths(e, o)(data.dist(o, j) - 1, j))
                           for j in (1, 2) if j != o))
            assert out[v, t] == want
        anc = [q for q in range(4, c.qubit_count) if q not in T]
        assert not out[v, anc].any()
    sol = AdjacencyVector.from_edges(3, [(1, 3), (2, 3)]).to_int()
    assert out[sol, T].all()
    assert out[AdjacencyVector.from_edges(3, [(1, 2)]).to_int(), T[0]] == 0


def test_infeasible_distance_gives_empty_oracle():
    # d(1,2) = 3 cannot occur on 3 vertices, so f is identically 0
    p = SearchProblem(3, ((1, 2), (1, 3), (2, 3)), ((1, ((2, 3),)),))
    sc = build_search(p)
    assert len(sc.oracle) == 0 and len(sc.diffusion) > 0


# --- DIFFUSION -------------------------------------------------------------

def restricted_matrix(c: Circuit, N: int) -> np.ndarray:
    """Block of the circuit's unitary on the subspace with all non-data qubits zero."""
    U = dense_circuit(c.gates, c.qubit_count)
    return U[: 2 ** N, : 2 ** N], U


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_diffusion_is_exact_reflection(N):
    c = build_diffusion(N)
    block, U = restricted_matrix(c, N)
    D = 2 * np.full((2 ** N, 2 ** N), 1 / 2 ** N) - np.eye(2 ** N)
    assert np.allclose(block, D, atol=1e-12)
    # nothing leaks out of the ancilla-zero subspace
    assert np.allclose(U[2 ** N:, : 2 ** N], 0, atol=1e-12)


def test_diffusion_fixes_uniform_and_flips_orthogonal(rng):
    N = 5
    c = build_diffusion(N)
    gamma = np.zeros(2 ** c.qubit_count, dtype=complex)
    gamma[: 2 ** N] = 1 / np.sqrt(2 ** N)
    reg = new_register(c.qubit_count)
    reg.amplitudes = gamma.copy()
    apply_circuit(reg, c)
    assert abs(abs(np.vdot(gamma, reg.amplitudes)) - 1) < 1e-10
    psi = rng.normal(size=2 ** N) + 0j
    psi -= psi.mean()
    psi /= np.linalg.norm(psi)
    full = np.zeros(2 ** c.qubit_count, dtype=complex)
    full[: 2 ** N] = psi
    reg.amplitudes = full.copy()
    apply_circuit(reg, c)
    assert np.allclose(reg.amplitudes, -full, atol=1e-10)


@pytest.mark.parametrize("N", [4, 8, 16, 32])
def test_diffusion_gate_count_linear(N):
    assert len(build_diffusion(N)) == 4 * N + 6 + (2 * (N - 2) + 1 - 1)


# --- reverse / unitarity / resources ---------------------------------------

def test_reverse_single_ccnot_and_involution():
    c = Circuit(build_or2().layout, (gate("CCNOT", 0, 1, 2),))
    assert reverse(c).gates == c.gates
    o = build_oracle(4, 3, builtin_instance("B"))
    assert reverse(reverse(o)) == o


def test_reverse_oracle_is_identity_exhaustive_n3():
    c = build_oracle(3, 2, builtin_instance("A"))
    X = basis_inputs(c.qubit_count, c.qubit_count)
    assert np.array_equal(run_rows(reverse(c), run_rows(c, X)), X)


@pytest.mark.parametrize("name", ["A", "B"])
def test_oracle_unitarity_statevector(name, rng):
    sc = build_search(problem_from_distance_data(builtin_instance(name)))
    Q = sc.layout.qubit_count
    assert Q <= 15
    psi = rng.normal(size=2 ** Q) + 1j * rng.normal(size=2 ** Q)
    psi /= np.linalg.norm(psi)
    reg = new_register(Q)
    reg.amplitudes = psi.copy()
    apply_circuit(reg, sc.oracle)
    apply_circuit(reg, reverse(sc.oracle))
    assert np.abs(reg.amplitudes - psi).max() < 1e-10


@pytest.mark.parametrize("name,Q", [("A", 8), ("B", 15), ("C", 24), ("D", 24)])
def test_compact_qubit_counts(name, Q):
    sc = build_search(problem_from_distance_data(builtin_instance(name)))
    assert resource_report(sc.oracle)["qubit_count"] == Q


@pytest.mark.parametrize("n", range(3, 9))
@pytest.mark.parametrize("layout", ["compact", "full"])
def test_frozen_resource_bounds(n, layout, rng):
    m = min(4, n)
    data = random_valid_d0(n, m, rng)
    rep = resource_report(build_search(problem_from_distance_data(data), layout).oracle)
    assert rep["qubit_count"] <= C1_QUBITS * n ** 2
    assert rep["gate_count"] <= C2_GATES * m * n ** 3
    assert sum(rep["gate_histogram"].values()) == rep["gate_count"]
    assert rep["gate_histogram"]["H"] == 0


@pytest.mark.parametrize("n", [8, 16, 40, 100])
def test_closed_form_stays_under_frozen_bound(n):
    data = BoundaryDistanceData.from_matrix(n, [[0 if i == j else 1 + (i + j) % 3 for j in range(4)]
                                                for i in range(4)])
    assert gate_count_formula(data) <= C2_GATES * 4 * n ** 3


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 7), st.integers(2, 5), st.integers(0, 2 ** 31))
def test_gate_count_formula_matches_full_layout(n, m, seed):
    m = min(m, n)
    data = random_valid_d0(n, m, np.random.default_rng(seed))
    assert len(build_oracle(n, m, data, layout="full")) == gate_count_formula(data)


# --- text export -----------------------------------------------------------

@pytest.mark.parametrize("layout", ["compact", "full"])
def test_text_round_trip(layout):
    c = build_oracle(4, 3, builtin_instance("B"), layout=layout)
    back = from_text(to_text(c))
    assert back.gates == c.gates
    assert back.layout.labels == c.layout.labels
    assert back.layout.edges == c.layout.edges
    assert back.ancilla_set == c.ancilla_set


def test_text_format_lines():
    text = to_text(build_or2())
    assert text.splitlines()[0] == "# qubits 3"
    assert "CCNOT 0 1 2" in text.splitlines()


@pytest.mark.parametrize("text", ["NOT 0\n", "# qubits 2\nCNOT 0 5\n", "# qubits 2\nSWAP 0 1\n"])
def test_from_text_rejects_malformed(text):
    with pytest.raises(ValueError):
        from_text(text)


def test_unknown_layout():
    with pytest.raises(ValueError):
        build_oracle(3, 2, builtin_instance("A"), layout="sparse")


def test_gates_use_only_the_four_kinds():
    for name in "ABCD":
        sc = build_search(problem_from_distance_data(builtin_instance(name)))
        for part in (sc.oracle, sc.diffusion, sc.prep):
            part.validate()
            assert {g.kind for g in part.gates} <= {"NOT", "CNOT", "CCNOT", "H"}
            assert all(isinstance(g, Gate) for g in part.gates)


def test_ancilla_set_excludes_data_and_result():
    sc = build_search(problem_from_distance_data(builtin_instance("B")))
    assert set(sc.oracle.ancilla_set).isdisjoint(sc.edge_qubits)
    assert sc.result_qubit not in sc.oracle.ancilla_set
    assert list(itertools.chain(sc.edge_qubits, [sc.result_qubit], sc.oracle.ancilla_set)) == \
        list(range(sc.layout.qubit_count))
