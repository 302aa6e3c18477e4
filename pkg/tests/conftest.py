"""Shared fixtures and classical oracles for the test suite."""

from __future__ import annotations

import random

import pytest

from distshor import gates
from distshor.circuit import Circuit, execute
from distshor.qstate import QuantumState, RandomSource
from distshor.shor import run_order_circuit


def set_register(state: QuantumState, qubits, value: int):
    """Drive a |0> register to a computational basis value."""
    for i, q in enumerate(qubits):
        if (value >> i) & 1:
            state.apply_gate(gates.X, [q])
    return state


def read_register(state: QuantumState, qubits) -> int:
    """Read a register that must be in a single basis state."""
    dist = state.exact_distribution(list(qubits))
    assert len(dist) == 1, f"register not classical: {dist}"
    value, prob = next(iter(dist.items()))
    assert abs(prob - 1.0) < 1e-9
    return value


def run_on_basis(circ: Circuit, preset: dict, seed: int = 0) -> QuantumState:
    """Execute a circuit on a basis state given as {qubit: bit}."""
    state = QuantumState(circ.num_qubits)
    for q, bit in preset.items():
        if bit:
            state.apply_gate(gates.X, [q])
    execute(circ, state, RandomSource(seed))
    return state


def amp_distance(a: QuantumState, b: QuantumState) -> float:
    keys = set(a.amplitudes) | set(b.amplitudes)
    return max(abs(a.amplitude(k) - b.amplitude(k)) for k in keys)


def random_amplitudes(qubits, num_qubits, py_rng: random.Random):
    """A random state over the listed qubits (others |0>)."""
    amps = {}
    for localidx in range(1 << len(qubits)):
        idx = 0
        for i, q in enumerate(qubits):
            if (localidx >> i) & 1:
                idx |= 1 << q
        amps[idx] = complex(py_rng.gauss(0, 1), py_rng.gauss(0, 1))
    return amps


def assert_ancillas_zero(state: QuantumState, qubits, tol: float = 1e-12):
    for q in qubits:
        p = state.prob_one(q)
        assert p <= tol, f"ancilla {q} not clean: P(1) = {p}"


@pytest.fixture(scope="session")
def mono_run_15():
    """Monolithic pre-measurement order run for N=15, a=7, m=8."""
    return run_order_circuit(7, 15, 8, RandomSource(1), mode="monolithic")


@pytest.fixture(scope="session")
def dist_run_15():
    """Distributed pre-measurement order run for N=15, a=7, m=8."""
    return run_order_circuit(7, 15, 8, RandomSource(1), mode="distributed")
