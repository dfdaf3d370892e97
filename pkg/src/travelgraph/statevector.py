"""Dense statevector simulation plus a basis-state mode for H-free circuits.

Convention: qubit i is bit i of the basis-state index (little endian). In the
``(2,)*Q`` tensor view of the amplitudes qubit i is axis ``Q-1-i``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

MAX_QUBITS = 26


class GuardExceeded(ValueError):
    """A run would need more memory or time than the configured guard allows."""


GATE_ARITY = {"NOT": 1, "H": 1, "CNOT": 2, "CCNOT": 3}


class Gate(NamedTuple):
    """One gate; for CNOT/CCNOT the target is the last qubit."""

    kind: str
    qubits: tuple[int, ...]

    def __str__(self):
        return " ".join([self.kind, *map(str, self.qubits)])


def gate(kind: str, *qubits: int) -> Gate:
    kind = kind.upper()
    if kind not in GATE_ARITY:
        raise ValueError(f"unknown gate kind {kind!r}")
    if len(qubits) != GATE_ARITY[kind]:
        raise ValueError(f"{kind} takes {GATE_ARITY[kind]} qubits, got {len(qubits)}")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"{kind} qubit indices collide: {qubits}")
    return Gate(kind, tuple(int(q) for q in qubits))


def _gates_of(c) -> Sequence[Gate]:
    return c.gates if hasattr(c, "gates") else c


def check_gate(g: Gate, Q: int) -> None:
    if g.kind not in GATE_ARITY or len(g.qubits) != GATE_ARITY[g.kind]:
        raise ValueError(f"malformed gate {g}")
    if len(set(g.qubits)) != len(g.qubits):
        raise ValueError(f"qubit indices collide in {g}")
    for q in g.qubits:
        if not 0 <= q < Q:
            raise ValueError(f"qubit {q} out of range for a {Q}-qubit register")


class QuantumRegister:
    def __init__(self, qubit_count: int, amplitudes: np.ndarray):
        self.qubit_count = qubit_count
        self.amplitudes = amplitudes

    def copy(self) -> "QuantumRegister":
        return QuantumRegister(self.qubit_count, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.qubit_count)


def new_register(Q: int, max_qubits: int = MAX_QUBITS) -> QuantumRegister:
    """|0...0> on Q qubits."""
    if Q < 1:
        raise ValueError("need at least one qubit")
    if Q > max_qubits:
        raise GuardExceeded(f"{Q} qubits exceeds the statevector guard of {max_qubits}")
    amps = np.zeros(1 << Q, dtype=np.complex128)
    amps[0] = 1.0
    return QuantumRegister(Q, amps)


def register_from_basis(bits: Sequence[int], max_qubits: int = MAX_QUBITS) -> QuantumRegister:
    reg = new_register(len(bits), max_qubits)
    reg.amplitudes[0] = 0.0
    reg.amplitudes[bits_to_int(bits)] = 1.0
    return reg


def apply_gate(reg: QuantumRegister, g: Gate) -> None:
    """Apply one gate in place."""
    Q = reg.qubit_count
    check_gate(g, Q)
    psi = reg.tensor()
    axes = [Q - 1 - q for q in g.qubits]
    if g.kind == "H":
        x = reg.amplitudes.reshape(-1, 2, 1 << g.qubits[0])
        a = x[:, 0, :].copy()
        b = x[:, 1, :]
        x[:, 0, :] = (a + b) * _RSQRT2
        x[:, 1, :] = (a - b) * _RSQRT2
        return
    # NOT/CNOT/CCNOT swap the target=0 and target=1 slices where all controls are 1.
    idx0: list = [slice(None)] * Q
    for ax in axes[:-1]:
        idx0[ax] = 1
    idx1 = list(idx0)
    idx0[axes[-1]] = 0
    idx1[axes[-1]] = 1
    idx0, idx1 = tuple(idx0), tuple(idx1)
    tmp = psi[idx0].copy()
    psi[idx0] = psi[idx1]
    psi[idx1] = tmp


_RSQRT2 = 1.0 / np.sqrt(2.0)


def permute_indices(gates: Iterable[Gate], idx: np.ndarray) -> np.ndarray:
    """Push integer basis indices through H-free gates (vectorised, in place)."""
    one = idx.dtype.type(1)
    for g in gates:
        q = g.qubits
        if g.kind == "NOT":
            idx ^= one << idx.dtype.type(q[0])
        elif g.kind == "CNOT":
            idx ^= ((idx >> idx.dtype.type(q[0])) & one) << idx.dtype.type(q[1])
        elif g.kind == "CCNOT":
            idx ^= ((idx >> idx.dtype.type(q[0])) & (idx >> idx.dtype.type(q[1])) & one) \
                << idx.dtype.type(q[2])
        else:
            raise ValueError(f"{g.kind} is not a basis permutation")
    return idx


def circuit_permutation(gates: Sequence[Gate], Q: int) -> np.ndarray:
    """Index array ``src`` such that applying the circuit maps amplitudes to ``amps[src]``.

    All permutation gates are self-inverse, so src is the reversed circuit
    applied to the identity.
    """
    for g in gates:
        check_gate(g, Q)
    dtype = np.uint32 if Q <= 32 else np.uint64
    return permute_indices(reversed(list(gates)), np.arange(1 << Q, dtype=dtype))


def apply_permutation(reg: QuantumRegister, src: np.ndarray) -> None:
    reg.amplitudes = reg.amplitudes[src]


def apply_circuit(reg: QuantumRegister, c, use_permutation: bool = False) -> None:
    """Apply every gate of ``c`` (a Circuit or gate list) in order.

    With ``use_permutation`` maximal H-free runs are folded into a single
    gather, which pays off for long permutation circuits on large registers.
    """
    gates = list(_gates_of(c))
    if not use_permutation:
        for g in gates:
            apply_gate(reg, g)
        return
    run: list[Gate] = []
    for g in gates + [None]:
        if g is None or g.kind == "H":
            if len(run) > 8:
                apply_permutation(reg, circuit_permutation(run, reg.qubit_count))
            else:
                for r in run:
                    apply_gate(reg, r)
            run = []
            if g is not None:
                apply_gate(reg, g)
        else:
            run.append(g)


@dataclass(frozen=True)
class BasisState:
    qubit_count: int
    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) != self.qubit_count:
            raise ValueError("bit vector length differs from qubit_count")

    @classmethod
    def zeros(cls, Q: int) -> "BasisState":
        return cls(Q, (0,) * Q)

    @classmethod
    def from_int(cls, Q: int, value: int) -> "BasisState":
        return cls(Q, tuple((value >> i) & 1 for i in range(Q)))

    def to_int(self) -> int:
        return bits_to_int(self.bits)

    def with_bits(self, assignments: dict[int, int]) -> "BasisState":
        bits = list(self.bits)
        for q, b in assignments.items():
            bits[q] = b
        return BasisState(self.qubit_count, tuple(bits))


def bits_to_int(bits: Sequence[int]) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


def apply_circuit_basis(c, s: BasisState) -> BasisState:
    """Image of |s> under an H-free circuit, in time linear in the gate count."""
    bits = list(s.bits)
    for g in _gates_of(c):
        check_gate(g, s.qubit_count)
        q = g.qubits
        if g.kind == "NOT":
            bits[q[0]] ^= 1
        elif g.kind == "CNOT":
            bits[q[1]] ^= bits[q[0]]
        elif g.kind == "CCNOT":
            bits[q[2]] ^= bits[q[0]] & bits[q[1]]
        else:
            raise ValueError("circuit contains H; basis mode needs a permutation circuit")
    return BasisState(s.qubit_count, tuple(bits))


def apply_circuit_basis_batch(c, states: np.ndarray) -> np.ndarray:
    """Batch version of :func:`apply_circuit_basis` over a (B, Q) 0/1 array."""
    out = np.array(states, dtype=np.uint8, copy=True)
    if out.ndim != 2:
        raise ValueError("expected a (batch, qubits) array")
    Q = out.shape[1]
    for g in _gates_of(c):
        check_gate(g, Q)
        q = g.qubits
        if g.kind == "NOT":
            out[:, q[0]] ^= 1
        elif g.kind == "CNOT":
            out[:, q[1]] ^= out[:, q[0]]
        elif g.kind == "CCNOT":
            out[:, q[2]] ^= out[:, q[0]] & out[:, q[1]]
        else:
            raise ValueError("circuit contains H; basis mode needs a permutation circuit")
    return out


def measure_all(reg: QuantumRegister, seed: int | np.random.Generator | None = None) -> BasisState:
    """Sample a basis state with Born probabilities. The register is not collapsed."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    p = reg.probabilities()
    p = p / p.sum()
    k = int(rng.choice(p.size, p=p))
    return BasisState.from_int(reg.qubit_count, k)


def sample_counts(reg: QuantumRegister, shots: int, seed=None) -> np.ndarray:
    """Counts per basis index over ``shots`` independent draws."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    p = reg.probabilities()
    return rng.multinomial(shots, p / p.sum())


def marginal_probabilities(reg: QuantumRegister, k: int) -> np.ndarray:
    """Distribution of the integer formed by qubits 0..k-1."""
    if not 0 <= k <= reg.qubit_count:
        raise ValueError(f"k={k} outside 0..{reg.qubit_count}")
    return reg.probabilities().reshape(-1, 1 << k).sum(axis=0)


def probability_of(reg: QuantumRegister, predicate: Callable[[int], bool] | Iterable[int],
                   k: int) -> float:
    """Total probability that qubits 0..k-1 read an integer accepted by ``predicate``.

    ``predicate`` may also be a collection of accepted integers.
    """
    marg = marginal_probabilities(reg, k)
    if callable(predicate):
        mask = np.fromiter((bool(predicate(x)) for x in range(marg.size)), bool, marg.size)
    else:
        mask = np.zeros(marg.size, bool)
        mask[list(predicate)] = True
    return float(marg[mask].sum())
