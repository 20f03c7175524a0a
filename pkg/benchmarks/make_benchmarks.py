"""Regenerate the benchmark QASM fixtures in this directory.

Run from the repository root: ``python3 benchmarks/make_benchmarks.py``.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from peepopt.circuits import Circuit, Gate, GateKind, cnot_count, cx, rx, rz, u3, unitary_of
from peepopt.qasm import emit_qasm

PI = math.pi
HERE = Path(__file__).parent


def h(q):
    return u3(PI / 2, 0.0, PI, q)


def t_gate(q):
    return rz(PI / 4, q)


def tdg(q):
    return rz(-PI / 4, q)


def ccx(a, b, c):
    """Standard 6-CX Toffoli decomposition (T gates as rz up to global phase)."""
    return [
        h(c),
        cx(b, c), tdg(c), cx(a, c), t_gate(c),
        cx(b, c), tdg(c), cx(a, c),
        t_gate(b), t_gate(c), h(c),
        cx(a, b), t_gate(a), tdg(b), cx(a, b),
    ]


def cp(lam, a, b):
    """Controlled phase via two CX, up to global phase."""
    return [rz(lam / 2, a), cx(a, b), rz(-lam / 2, b), cx(a, b), rz(lam / 2, b)]


def swap(a, b):
    return [cx(a, b), cx(b, a), cx(a, b)]


def zz(theta, a, b):
    return [cx(a, b), rz(theta, b), cx(a, b)]


def adder_4():
    """2-bit modular adder applied three times (b += 3a mod 4); 24 CX."""
    gates = []
    for _ in range(3):
        gates += ccx(0, 2, 3)
        gates += [cx(0, 2), cx(1, 3)]
    return Circuit(4, tuple(gates))


def adder_5():
    """2-bit ripple adder with carry-out qubit; 21 CX."""
    gates = []
    gates += ccx(0, 2, 3) + [cx(0, 2)]
    gates += ccx(1, 3, 4) + [cx(1, 3)]
    gates += ccx(0, 2, 4) + [cx(2, 4)]
    return Circuit(5, tuple(gates))


def _qft_gates():
    """Textbook 5-qubit QFT with 2-CX controlled phases and final swaps."""
    gates = []
    for target in range(5):
        gates.append(h(target))
        for ctrl in range(target + 1, 5):
            gates += cp(PI / (1 << (ctrl - target)), ctrl, target)
    gates += swap(0, 4) + swap(1, 3)
    return gates


def _inverse(g):
    if g.kind == GateKind.CX:
        return g
    if g.kind == GateKind.U3:
        theta, phi, lam = g.params
        return u3(-theta, -lam, -phi, g.qubits[0])
    return Gate(g.kind, (-g.params[0],), g.qubits)


def qft_5(value=13):
    """QFT phase readout: prepare the phase state encoding `value` with
    single-qubit gates, then run the inverse 5-qubit QFT; the ideal output
    is the basis state `value`.  26 CX."""
    forward = _qft_gates()
    psi = unitary_of(Circuit(5, tuple(forward)))[:, value]
    prep = []
    for q in range(5):
        alpha = float(np.angle(psi[1 << q]) - np.angle(psi[0]))
        prep += [h(q), rz(alpha, q)]
    gates = prep + [_inverse(g) for g in reversed(forward)]
    return Circuit(5, tuple(gates))


def tfim_4(steps=6, dt=0.15, field=1.0, coupling=1.0):
    """Trotterized transverse-field Ising chain on 4 qubits; 36 CX."""
    gates = []
    for _ in range(steps):
        for q in range(4):
            gates.append(rx(2 * field * dt, q))
        for a in range(3):
            gates += zz(2 * coupling * dt, a, a + 1)
    return Circuit(4, tuple(gates))


def xy_4(steps=2, theta=0.8):
    """XY-chain Trotter steps (XX + YY per bond) on 4 qubits; 24 CX."""
    gates = []
    for _ in range(steps):
        for a in range(3):
            b = a + 1
            gates += [h(a), h(b)] + zz(theta, a, b) + [h(a), h(b)]
            gates += [rx(PI / 2, a), rx(PI / 2, b)] + zz(theta, a, b)
            gates += [rx(-PI / 2, a), rx(-PI / 2, b)]
    return Circuit(4, tuple(gates))


BENCHMARKS = {
    "adder_4": adder_4,
    "adder_5": adder_5,
    "qft_5": qft_5,
    "tfim_4": tfim_4,
    "xy_4": xy_4,
}


def main():
    for name, build in BENCHMARKS.items():
        circuit = build()
        path = HERE / f"{name}.qasm"
        path.write_text(emit_qasm(circuit))
        print(f"{name}: {circuit.num_qubits} qubits, {cnot_count(circuit)} CX -> {path.name}")


if __name__ == "__main__":
    main()
