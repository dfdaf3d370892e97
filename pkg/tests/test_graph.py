import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import floyd_distances, isomorphic_by_permutation, random_valid_d0, realizes_floyd
from travelgraph.graph import (AdjacencyVector, BoundaryDistanceData, bfs_distances,
                               brute_force_solutions, builtin_instance, classical_paths,
                               classical_test, edge_count, graphs_isomorphic, index_pairs,
                               instance_from_dict, instance_to_dict, iter_graphs, load_instance,
                               pair_index, realizes, save_instance, validate_distance_data)


@pytest.mark.parametrize("n,j,k,idx", [
    (3, 1, 2, 0), (3, 1, 3, 1), (3, 2, 3, 2),
    (4, 1, 4, 2), (4, 2, 3, 3), (4, 3, 4, 5),
    (5, 4, 5, 9),
])
def test_pair_index_examples(n, j, k, idx):
    assert pair_index(n, j, k) == idx
    assert pair_index(n, k, j) == idx


@pytest.mark.parametrize("n", range(2, 9))
def test_pair_index_is_a_bijection_in_lexicographic_order(n):
    assert [pair_index(n, j, k) for j, k in index_pairs(n)] == list(range(edge_count(n)))


@pytest.mark.parametrize("bad", [(1, 1), (0, 2), (2, 5)])
def test_pair_index_rejects_bad_pairs(bad):
    with pytest.raises(ValueError):
        pair_index(4, *bad)


def test_adjacency_vector_validation():
    with pytest.raises(ValueError):
        AdjacencyVector(3, (0, 1))
    with pytest.raises(ValueError):
        AdjacencyVector(3, (0, 1, 2))
    with pytest.raises(ValueError):
        AdjacencyVector.from_int(3, 8)


@given(st.integers(2, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2 ** edge_count(n) - 1))))
def test_int_and_bitstring_round_trip(args):
    n, v = args
    e = AdjacencyVector.from_int(n, v)
    assert e.to_int() == v
    assert AdjacencyVector.from_bitstring(n, e.bitstring()) == e
    assert AdjacencyVector.from_edges(n, e.edges()) == e


def test_bitstring_uses_reverse_lexicographic_pair_order():
    # e12=0, e13=1, e23=1 renders as e23 e13 e12
    e = AdjacencyVector.from_edges(3, [(1, 3), (2, 3)])
    assert e.bits == (0, 1, 1)
    assert e.bitstring() == "110"


def test_lookup_is_symmetric():
    e = AdjacencyVector.from_edges(4, [(2, 4)])
    assert e.lookup(2, 4) == e.lookup(4, 2) == 1
    assert e.neighbors(4) == [2] and e.degree(1) == 0


@pytest.mark.parametrize("matrix,condition", [
    ([[0, 2], [2, 0]], None),
    ([[1, 2], [2, 0]], "diagonal"),
    ([[0, 2], [1, 0]], "symmetry"),
    ([[0, 0], [0, 0]], "positivity"),
    ([[0, 3], [3, 0]], "range"),
])
def test_validate_distance_data(matrix, condition):
    v = validate_distance_data(BoundaryDistanceData.from_matrix(3, matrix))
    assert (v.condition if v else None) == condition


def test_validation_checks_diagonal_before_range():
    v = validate_distance_data(BoundaryDistanceData.from_matrix(3, [[1, 9], [9, 0]]))
    assert v.condition == "diagonal" and v.indices == (1, 1)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_classical_paths_layers_are_distance_balls(n):
    # p(d, j) = 1 exactly when d_E(o, j) <= d
    for e in list(iter_graphs(n))[:: max(1, 2 ** edge_count(n) // 200)]:
        dist = floyd_distances(e)
        for o in range(1, n + 1):
            p = classical_paths(e, o)
            for d in range(1, n):
                for j in range(1, n + 1):
                    if j != o:
                        assert p(d, j) == int(dist[o][j] <= d)


def test_classical_paths_star_graph():
    e = AdjacencyVector.from_edges(5, [(1, 5), (2, 5), (3, 5), (4, 5)])
    p = classical_paths(e, 1)
    assert p.layer(1) == {2: 0, 3: 0, 4: 0, 5: 1}
    assert p.layer(2) == {2: 1, 3: 1, 4: 1, 5: 1}


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 5), st.integers(2, 4), st.integers(0, 2 ** 31))
def test_classical_test_matches_floyd_oracle(n, m, seed):
    m = min(m, n)
    rng = np.random.default_rng(seed)
    data = random_valid_d0(n, m, rng)
    for _ in range(20):
        e = AdjacencyVector.from_int(n, int(rng.integers(0, 2 ** edge_count(n))))
        assert classical_test(e, data) == int(realizes_floyd(e, data)) == int(realizes(e, data))


@pytest.mark.parametrize("name,count", [("A", 1), ("B", 1), ("C", 4), ("D", 1)])
def test_builtin_solution_counts(name, count):
    assert len(brute_force_solutions(builtin_instance(name))) == count


def test_instance_a_solution():
    (e,) = brute_force_solutions(builtin_instance("A"))
    assert e.edges() == [(1, 3), (2, 3)]


def test_instance_b_solution():
    (e,) = brute_force_solutions(builtin_instance("B"))
    assert sorted(e.edges()) == [(1, 4), (2, 3), (2, 4), (3, 4)]


def test_instance_d_solution_is_a_star():
    (e,) = brute_force_solutions(builtin_instance("D"))
    assert e.edges() == [(1, 5), (2, 5), (3, 5), (4, 5)]


def test_brute_force_guard():
    with pytest.raises(ValueError):
        brute_force_solutions(builtin_instance("C"), max_edge_bits=9)


def test_bfs_unreachable_is_none():
    e = AdjacencyVector.from_edges(4, [(1, 2)])
    assert bfs_distances(e, 1) == {1: 0, 2: 1, 3: None, 4: None}


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 5), st.data())
def test_isomorphism_matches_permutation_oracle(n, data):
    N = edge_count(n)
    a = AdjacencyVector.from_int(n, data.draw(st.integers(0, 2 ** N - 1)))
    perm = data.draw(st.permutations(range(1, n + 1)))
    relabel = AdjacencyVector.from_edges(n, [(perm[j - 1], perm[k - 1]) for j, k in a.edges()])
    other = AdjacencyVector.from_int(n, data.draw(st.integers(0, 2 ** N - 1)))
    assert graphs_isomorphic(a, relabel) == 1
    assert graphs_isomorphic(a, other) == int(isomorphic_by_permutation(a, other))
    fixed = tuple(range(1, min(n, 2) + 1))
    assert graphs_isomorphic(a, other, boundary=len(fixed)) == \
        int(isomorphic_by_permutation(a, other, fixed))


def test_isomorphism_guard():
    g = AdjacencyVector.empty(11)
    with pytest.raises(ValueError):
        graphs_isomorphic(g, g)


def test_instance_json_round_trip(tmp_path):
    data = builtin_instance("C")
    path = tmp_path / "c.json"
    save_instance(data, path)
    assert load_instance(str(path)) == data
    assert json.loads(path.read_text()) == instance_to_dict(data)


@pytest.mark.parametrize("obj", [{"n": 3}, {"n": 3, "m": 2, "d0": [[2, 1, 2]]},
                                 {"n": 3, "m": 2, "d0": [[1, 2]]}])
def test_instance_from_dict_rejects_malformed(obj):
    with pytest.raises(ValueError):
        instance_from_dict(obj)


def test_unknown_builtin():
    with pytest.raises(ValueError):
        builtin_instance("Z")
