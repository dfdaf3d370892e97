"""Grover search over edge sets: the L(theta) schedule, fixed-L runs, the
unknown-count outer loop, confidence amplification and analytic references.

A run target is either :class:`BoundaryDistanceData` (every edge slot free)
or any object with ``search_problem()``, ``decode(e_int)``, ``is_solution(e_int)``
and ``solution_ints()`` (restricted instances from the reduction module).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np

from .circuits import SearchCircuits, SearchProblem, build_search, problem_from_distance_data
from .graph import AdjacencyVector, BoundaryDistanceData, brute_force_solutions, classical_test
from .statevector import (MAX_QUBITS, GuardExceeded, apply_circuit, apply_permutation,
                          circuit_permutation, marginal_probabilities, new_register)


def l_of_theta(theta: float) -> int:
    """Number of Grover rounds for rotation angle theta in (0, pi/2)."""
    if not 0 < theta < math.pi / 2:
        raise ValueError(f"theta={theta} outside (0, pi/2)")
    if theta < math.pi / 8:
        return math.ceil(math.pi / (4 * theta) - 0.5)
    if theta < math.pi / 4:
        return 1
    return 0


def theta_of(count: int, N: int) -> float:
    return math.asin(math.sqrt(count / 2 ** N))


def analytic_success_probability(T_count: int, N: int, L: int) -> float:
    """sin^2((2L+1) theta) with sin theta = sqrt(|T| / 2^N)."""
    if not 0 < T_count < 2 ** N:
        raise ValueError(f"need 0 < |T| < 2^N, got |T|={T_count}, N={N}")
    if L < 0:
        raise ValueError("L must be >= 0")
    return math.sin((2 * L + 1) * theta_of(T_count, N)) ** 2


def schedule(N: int) -> list[int]:
    """Round counts tried by the unknown-count loop: 0, 1, 2, then L(theta_K)
    for K = 2^(N-4), ..., 2, 1 (empty when N < 4)."""
    Ls = [0, 1, 2]
    if N >= 4:
        Ls += [l_of_theta(theta_of(2 ** e, N)) for e in range(N - 4, -1, -1)]
    return Ls


def worst_case_queries(N: int) -> int:
    """Quantum plus classical oracle calls when every attempt fails."""
    s = schedule(N)
    return sum(s) + len(s)


def confidence_repetitions(delta: float) -> int:
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return math.ceil(math.log2(1 / delta)) + 1


# --- run targets ----------------------------------------------------------

def search_problem(target) -> SearchProblem:
    if isinstance(target, BoundaryDistanceData):
        return problem_from_distance_data(target)
    return target.search_problem()


def decode(target, e_int: int):
    if isinstance(target, BoundaryDistanceData):
        return AdjacencyVector.from_int(target.n, e_int)
    return target.decode(e_int)


def is_solution(target, e_int: int) -> bool:
    if isinstance(target, BoundaryDistanceData):
        return bool(classical_test(AdjacencyVector.from_int(target.n, e_int), target))
    return bool(target.is_solution(e_int))


@lru_cache(maxsize=32)
def solution_ints(target) -> tuple[int, ...]:
    """Brute-force solution set as E-register integers."""
    if isinstance(target, BoundaryDistanceData):
        return tuple(e.to_int() for e in brute_force_solutions(target))
    return tuple(target.solution_ints())


@dataclass(frozen=True)
class GroverRunConfig:
    target: Any
    seed: int = 0
    max_statevector_qubits: int = MAX_QUBITS
    record_trajectory: bool = False
    layout: str = "compact"


@dataclass
class GroverOutcome:
    measured_e: Any
    measured_int: int
    is_solution: bool
    L_used: int
    oracle_queries_quantum: int
    oracle_queries_classical: int
    schedule_used: list[int] = field(default_factory=list)
    attempts: int = 1
    success_probability_trace: list[tuple[int, float, float]] | None = None


def circuits_for(cfg: GroverRunConfig) -> SearchCircuits:
    sc = build_search(search_problem(cfg.target), cfg.layout)
    if sc.layout.qubit_count > cfg.max_statevector_qubits:
        raise GuardExceeded(
            f"layout needs {sc.layout.qubit_count} qubits, guard is {cfg.max_statevector_qubits}")
    return sc


@lru_cache(maxsize=4)
def _oracle_permutation(problem: SearchProblem, layout: str) -> np.ndarray:
    sc = build_search(problem, layout)
    return circuit_permutation(sc.oracle.gates, sc.layout.qubit_count)


def iterate_states(cfg: GroverRunConfig, L: int):
    """Yield the register after state preparation and after each of L rounds."""
    sc = circuits_for(cfg)
    reg = new_register(sc.layout.qubit_count, cfg.max_statevector_qubits)
    apply_circuit(reg, sc.prep)
    yield reg
    perm = _oracle_permutation(search_problem(cfg.target), cfg.layout)
    for _ in range(L):
        apply_permutation(reg, perm)
        apply_circuit(reg, sc.diffusion, use_permutation=True)
        yield reg


@lru_cache(maxsize=256)
def _edge_distribution(cfg_key: tuple, L: int) -> np.ndarray:
    target, layout, guard = cfg_key
    cfg = GroverRunConfig(target, layout=layout, max_statevector_qubits=guard)
    N = len(search_problem(target).edges)
    reg = None
    for reg in iterate_states(cfg, L):
        pass
    return marginal_probabilities(reg, N)


def edge_distribution(cfg: GroverRunConfig, L: int) -> np.ndarray:
    """Born distribution of the E register after GROVER-L (cached per instance and L)."""
    return _edge_distribution((cfg.target, cfg.layout, cfg.max_statevector_qubits), L)


def simulated_success_probability(cfg: GroverRunConfig, L: int) -> float:
    p = edge_distribution(cfg, L)
    return float(sum(p[s] for s in solution_ints(cfg.target)))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def grover_l(cfg: GroverRunConfig, L: int, rng=None) -> GroverOutcome:
    """Prepare, run L oracle/diffusion rounds, measure E, verify classically.

    Measurement samples the E marginal, which has the same law as measuring
    every qubit and discarding the rest.
    """
    rng = _rng(cfg.seed if rng is None else rng)
    p = edge_distribution(cfg, L)
    e_int = int(rng.choice(p.size, p=p / p.sum()))
    trace = None
    if cfg.record_trajectory:
        trace = [_trace_point(cfg, L)]
    return GroverOutcome(decode(cfg.target, e_int), e_int, is_solution(cfg.target, e_int), L,
                         L, 1, [L], 1, trace)


def _trace_point(cfg: GroverRunConfig, L: int) -> tuple[int, float, float]:
    N = len(search_problem(cfg.target).free_edges)
    T = len(solution_ints(cfg.target))
    analytic = analytic_success_probability(T, N, L) if 0 < T < 2 ** N else float(T > 0)
    return (L, analytic, simulated_success_probability(cfg, L))


def solve_unknown_count(cfg: GroverRunConfig, rng=None) -> GroverOutcome:
    """Try L = 0, 1, 2 and then the K-halving schedule, stopping at the first
    classically verified solution. ``is_solution`` is False when none was found."""
    rng = _rng(cfg.seed if rng is None else rng)
    N = len(search_problem(cfg.target).free_edges)
    used: list[int] = []
    trace = [] if cfg.record_trajectory else None
    out = None
    for L in schedule(N):
        out = grover_l(cfg, L, rng)
        used.append(L)
        if trace is not None:
            trace.append(_trace_point(cfg, L))
        if out.is_solution:
            break
    out.schedule_used = used
    out.oracle_queries_quantum = sum(used)
    out.oracle_queries_classical = len(used)
    out.success_probability_trace = trace
    return out


def run_with_confidence(cfg: GroverRunConfig, delta: float) -> GroverOutcome:
    """Repeat the unknown-count loop with independent seeds until a verified
    solution appears, at most ceil(log2(1/delta)) + 1 times."""
    M = confidence_repetitions(delta)
    children = np.random.SeedSequence(cfg.seed).spawn(M)
    q = c = 0
    used: list[int] = []
    out = None
    for i, ss in enumerate(children, start=1):
        out = solve_unknown_count(cfg, np.random.default_rng(ss))
        q += out.oracle_queries_quantum
        c += out.oracle_queries_classical
        used += out.schedule_used
        if out.is_solution:
            break
    out.attempts = i
    out.oracle_queries_quantum = q
    out.oracle_queries_classical = c
    out.schedule_used = used
    return out


@dataclass
class TrajectoryReport:
    max_deviation: float
    max_leakage: float
    per_step: list[tuple[int, float, float]]


def state_trajectory_check(cfg: GroverRunConfig, L: int) -> TrajectoryReport:
    """Compare the simulated register after each round l = 0..L with
    cos((2l+1)t)|alpha> + sin((2l+1)t)|beta> on |-> and zero ancillas.

    alpha and beta are rebuilt from the brute-force solution set. Deviation is
    the largest amplitude error over the whole register; leakage is the
    squared norm outside span(alpha, beta).
    """
    problem = search_problem(cfg.target)
    sc = circuits_for(cfg)
    N = len(problem.edges)
    free = sc.free_qubits
    fixed_mask = sum(1 << q for q in range(N) if q not in free)
    # every E value in the superposition: fixed edges set, free edges arbitrary
    e_vals = np.full(1 << len(free), fixed_mask, dtype=np.int64)
    for i, q in enumerate(free):
        e_vals |= ((np.arange(1 << len(free)) >> i) & 1) << q
    sols = set(solution_ints(cfg.target))
    is_sol = np.fromiter((int(v) in sols for v in e_vals), bool, e_vals.size)
    T, F = int(is_sol.sum()), int((~is_sol).sum())
    theta = math.asin(math.sqrt(T / e_vals.size))
    R = sc.result_qubit
    idx0 = e_vals                      # R = 0
    idx1 = e_vals | (1 << R)           # R = 1
    per_step = []
    for ell, reg in enumerate(iterate_states(cfg, L)):
        c, s = math.cos((2 * ell + 1) * theta), math.sin((2 * ell + 1) * theta)
        amp_e = np.where(is_sol, s / math.sqrt(T) if T else 0.0, c / math.sqrt(F) if F else 0.0)
        pred0, pred1 = amp_e / math.sqrt(2), -amp_e / math.sqrt(2)
        psi = reg.amplitudes
        dev = max(np.abs(psi[idx0] - pred0).max(), np.abs(psi[idx1] - pred1).max())
        rest = psi.copy()
        rest[idx0] = 0
        rest[idx1] = 0
        dev = max(dev, float(np.abs(rest).max()))
        a = np.vdot(np.where(is_sol, 0, 1 / math.sqrt(F)) if F else np.zeros(e_vals.size),
                    (psi[idx0] - psi[idx1]) / math.sqrt(2))
        b = np.vdot(np.where(is_sol, 1 / math.sqrt(T), 0) if T else np.zeros(e_vals.size),
                    (psi[idx0] - psi[idx1]) / math.sqrt(2))
        leak = max(0.0, float(np.vdot(psi, psi).real - abs(a) ** 2 - abs(b) ** 2))
        per_step.append((ell, float(dev), leak))
    return TrajectoryReport(max(d for _, d, _ in per_step), max(lk for _, _, lk in per_step),
                            per_step)
