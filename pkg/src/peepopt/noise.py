"""Synthetic-hardware density-matrix simulation.

The noise model applies a depolarizing channel after every gate, with
separate strengths for single- and two-qubit gates, plus optional per-qubit
readout bit flips applied only at measurement time.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .circuits import Circuit, GateKind, apply_unitary, gate_matrix


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing probabilities per gate plus optional readout flips.

    ``readout[q]`` is the bit-flip probability of qubit q's measurement;
    ``overrides`` maps a qubit to per-qubit (p1, p2) replacements.  For a
    two-qubit gate the largest applicable p2 wins.
    """

    p1: float = 0.0
    p2: float = 0.0
    readout: tuple[float, ...] | None = None
    overrides: dict[int, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        probs = [self.p1, self.p2]
        if self.readout is not None:
            object.__setattr__(self, "readout", tuple(self.readout))
            probs.extend(self.readout)
        for ps in self.overrides.values():
            probs.extend(ps)
        for p in probs:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")

    def gate_prob(self, qubits: tuple[int, ...]) -> float:
        """Depolarizing probability for a gate on the given qubits."""
        idx = 0 if len(qubits) == 1 else 1
        base = (self.p1, self.p2)[idx]
        for q in qubits:
            if q in self.overrides:
                base = max(base, self.overrides[q][idx])
        return base

    def without_readout(self) -> "NoiseModel":
        return NoiseModel(self.p1, self.p2, None, dict(self.overrides))

    @classmethod
    def zero(cls) -> "NoiseModel":
        return cls()

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseModel":
        overrides = {
            int(q): (float(v["p1"]), float(v["p2"]))
            for q, v in (data.get("overrides") or {}).items()
        }
        readout = data.get("readout")
        return cls(
            p1=float(data.get("p1", 0.0)),
            p2=float(data.get("p2", 0.0)),
            readout=tuple(float(r) for r in readout) if readout else None,
            overrides=overrides,
        )

    @classmethod
    def from_json(cls, path) -> "NoiseModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "p1": self.p1,
            "p2": self.p2,
            "readout": list(self.readout) if self.readout else None,
            "overrides": {
                str(q): {"p1": p1, "p2": p2} for q, (p1, p2) in self.overrides.items()
            },
        }


def _depolarize(rho: np.ndarray, qubits: tuple[int, ...], p: float, n: int) -> np.ndarray:
    """rho -> (1-p) rho + p * Tr_S(rho) (x) I/2^|S| on the gate's qubit set S."""
    if p == 0.0:
        return rho
    m = len(qubits)
    t = rho.reshape((2,) * (2 * n))
    # Trace out the gate qubits: contract row axis with matching column axis.
    axes = sorted(n - 1 - q for q in qubits)
    reduced = t
    for offset, a in enumerate(axes):
        a -= offset  # earlier traces removed one row and one col axis each
        reduced = np.trace(reduced, axis1=a, axis2=a + (n - offset))
    # Tensor the maximally mixed state back in at the traced positions.
    eye = np.eye(1 << m, dtype=complex).reshape((2,) * (2 * m)) / (1 << m)
    rest = n - m
    mixed = np.tensordot(reduced, eye, axes=0)
    # mixed axes: rest rows, rest cols, S rows, S cols -> interleave back.
    src_rows = list(range(2 * rest, 2 * rest + m))
    src_cols = list(range(2 * rest + m, 2 * rest + 2 * m))
    rest_axes = [a for a in range(n) if a not in axes]
    perm_src = src_rows + src_cols
    perm_dst = axes + [a + n for a in axes]
    # Remaining (rest) axes must land on rest_axes and rest_axes + n.
    perm_src += list(range(rest)) + list(range(rest, 2 * rest))
    perm_dst += rest_axes + [a + n for a in rest_axes]
    mixed = np.moveaxis(mixed, perm_src, perm_dst)
    dim = 1 << n
    return (1.0 - p) * rho + p * mixed.reshape(dim, dim)


def simulate_density(circuit: Circuit, noise: NoiseModel) -> np.ndarray:
    """Density matrix of the circuit run from |0...0> under the noise model.

    Each gate acts as rho -> U rho U^dag followed by a depolarizing channel
    on the gate's qubits.  Readout error is not applied here.
    """
    n = circuit.num_qubits
    if n > 12:
        raise DimensionError(f"{n} qubits exceeds the 12-qubit density limit")
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    for g in circuit.gates:
        u = gate_matrix(g)
        rho = apply_unitary(rho, u, g.qubits, n)
        rho = apply_unitary(rho.conj().T, u, g.qubits, n).conj().T
        rho = _depolarize(rho, g.qubits, noise.gate_prob(g.qubits), n)
    return rho


def measure_distribution(
    rho: np.ndarray, readout: tuple[float, ...] | None = None
) -> np.ndarray:
    """Outcome probabilities: the diagonal of rho, optionally convolved with
    per-qubit readout bit flips."""
    probs = np.clip(np.real(np.diag(rho)), 0.0, None)
    n = int(np.log2(len(probs)))
    if readout is not None:
        t = probs.reshape((2,) * n)
        for q, f in enumerate(readout):
            if f:
                axis = n - 1 - q
                t = (1.0 - f) * t + f * np.flip(t, axis=axis)
        probs = t.reshape(-1)
    return probs


def sample_counts(dist: np.ndarray, shots: int, seed) -> dict[str, int]:
    """Multinomial counts keyed by bitstring (qubit n-1 first); deterministic per seed."""
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    dist = np.asarray(dist, dtype=float)
    n = int(np.log2(len(dist)))
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, dist / dist.sum())
    return {
        format(i, f"0{n}b"): int(c) for i, c in enumerate(draws) if c > 0
    }


def counts_to_distribution(counts: dict[str, int], num_qubits: int) -> np.ndarray:
    """Normalize a counts map back into a dense probability vector."""
    dist = np.zeros(1 << num_qubits)
    for bits, c in counts.items():
        dist[int(bits, 2)] += c
    total = dist.sum()
    if total == 0:
        raise ValueError("empty counts map")
    return dist / total


def frobenius_distance(a: np.ndarray, b: np.ndarray) -> float:
    """sqrt(sum |a_ij - b_ij|^2)."""
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def block_fidelity_score(candidate_circuit: Circuit, original_circuit: Circuit,
                         noise: NoiseModel) -> float:
    """Frobenius distance between the original block's ideal density matrix
    and the candidate's density matrix under noise (readout disabled)."""
    if candidate_circuit.num_qubits != original_circuit.num_qubits:
        raise DimensionError("candidate and block qubit counts differ")
    ideal = simulate_density(original_circuit, NoiseModel.zero())
    noisy = simulate_density(candidate_circuit, noise.without_readout())
    return frobenius_distance(ideal, noisy)
