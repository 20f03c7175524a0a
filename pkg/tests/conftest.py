"""Shared test helpers: fixture paths and random circuit generation."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from peepopt.circuits import Circuit, Gate, GateKind

BENCHMARKS = Path(__file__).parent.parent / "benchmarks"
FIXTURE_FILES = sorted(BENCHMARKS.glob("*.qasm"))

_ONE_QUBIT = (GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.U3)


def random_circuit(rng: np.random.Generator, num_qubits: int, num_gates: int,
                   cx_fraction: float = 0.4) -> Circuit:
    """Random circuit over the supported gate set."""
    gates = []
    for _ in range(num_gates):
        if num_qubits >= 2 and rng.uniform() < cx_fraction:
            a, b = rng.choice(num_qubits, size=2, replace=False)
            gates.append(Gate(GateKind.CX, (), (int(a), int(b))))
        else:
            kind = _ONE_QUBIT[rng.integers(len(_ONE_QUBIT))]
            nparams = 3 if kind is GateKind.U3 else 1
            params = tuple(rng.uniform(-np.pi, np.pi, nparams))
            gates.append(Gate(kind, params, (int(rng.integers(num_qubits)),)))
    return Circuit(num_qubits, tuple(gates))
