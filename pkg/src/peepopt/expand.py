"""Block approximation: layered U3/CX ansatz fitted to each partition unitary.

Each partition block gets a candidate list: candidate 0 is always the exact
original, followed by fitted ansatz circuits with m = 0 .. cnots-1 CX gates
that land within the keep threshold.  Fitting minimizes the Hilbert-Schmidt
distance with multi-start finite-difference gradient descent.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .circuits import (
    Circuit,
    Gate,
    GateKind,
    apply_unitary,
    cnot_count,
    gate_matrix,
    hs_distance,
    u3_matrix,
    unitary_of,
)
from .partition import PartitionBlock
from .qasm import emit_qasm, parse_qasm

_CX = gate_matrix(Gate(GateKind.CX, (), (0, 1)))


@dataclass
class Candidate:
    """One replacement option for a block, with its cached comparison data."""

    local_circuit: Circuit
    unitary: np.ndarray
    hs_distance: float
    cnots: int
    fidelity_score: float | None = None


@dataclass
class ApproximationSet:
    """Per-block candidate lists plus the partition they were built from."""

    num_qubits: int
    blocks: list[PartitionBlock]
    candidates: list[list[Candidate]]

    def counts(self) -> tuple[int, ...]:
        """Candidate count a_b for each block."""
        return tuple(len(c) for c in self.candidates)

    def chosen(self, solution) -> list[Candidate]:
        return [self.candidates[b][c] for b, c in enumerate(solution)]

    def original_cnots(self) -> int:
        return sum(c[0].cnots for c in self.candidates)

    def save(self, path) -> None:
        data = {
            "num_qubits": self.num_qubits,
            "blocks": [
                {
                    "id": b.id,
                    "qubits": list(b.qubits),
                    "gate_span": list(b.gate_span),
                    "qasm": emit_qasm(b.local_circuit),
                }
                for b in self.blocks
            ],
            "candidates": [
                [
                    {
                        "qasm": emit_qasm(c.local_circuit),
                        "hs_distance": c.hs_distance,
                        "cnots": c.cnots,
                        "fidelity_score": c.fidelity_score,
                    }
                    for c in cands
                ]
                for cands in self.candidates
            ],
        }
        with open(path, "w") as fh:
            json.dump(data, fh, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path) -> "ApproximationSet":
        with open(path) as fh:
            data = json.load(fh)
        blocks = [
            PartitionBlock(
                id=b["id"],
                qubits=tuple(b["qubits"]),
                local_circuit=parse_qasm(b["qasm"]),
                gate_span=tuple(b["gate_span"]),
            )
            for b in data["blocks"]
        ]
        candidates = []
        for cands in data["candidates"]:
            lst = []
            for c in cands:
                circ = parse_qasm(c["qasm"])
                lst.append(
                    Candidate(
                        local_circuit=circ,
                        unitary=unitary_of(circ),
                        hs_distance=c["hs_distance"],
                        cnots=c["cnots"],
                        fidelity_score=c["fidelity_score"],
                    )
                )
            candidates.append(lst)
        return cls(data["num_qubits"], blocks, candidates)


@dataclass(frozen=True)
class AnsatzTemplate:
    """Layered template: U3 on every qubit, then per CX layer one chain CX
    followed by U3 on the two touched qubits.  Parameter count 3q + 6m."""

    num_qubits: int
    cx_pairs: tuple[tuple[int, int], ...]

    @property
    def num_params(self) -> int:
        return 3 * self.num_qubits + 6 * len(self.cx_pairs)

    def ops(self) -> list[tuple[str, tuple[int, ...], int]]:
        """Ordered ops as (kind, qubits, param_offset); CX offsets are -1."""
        out = []
        off = 0
        for q in range(self.num_qubits):
            out.append(("u3", (q,), off))
            off += 3
        for a, b in self.cx_pairs:
            out.append(("cx", (a, b), -1))
            out.append(("u3", (a,), off))
            out.append(("u3", (b,), off + 3))
            off += 6
        return out

    def instantiate(self, params: np.ndarray) -> Circuit:
        gates = []
        for kind, qubits, off in self.ops():
            if kind == "cx":
                gates.append(Gate(GateKind.CX, (), qubits))
            else:
                gates.append(Gate(GateKind.U3, tuple(params[off : off + 3]), qubits))
        return Circuit(self.num_qubits, tuple(gates))

    def unitary(self, params: np.ndarray) -> np.ndarray:
        dim = 1 << self.num_qubits
        mat = np.eye(dim, dtype=complex)
        for kind, qubits, off in self.ops():
            u = _CX if kind == "cx" else u3_matrix(*params[off : off + 3])
            mat = apply_unitary(mat, u, qubits, self.num_qubits)
        return mat


def ansatz(m: int, q: int) -> AnsatzTemplate:
    """Template with m CX layers cycling over the linear chain of q qubits."""
    if m < 0:
        raise ValueError(f"negative CX count {m}")
    if q < 1:
        raise ValueError(f"need at least one qubit, got {q}")
    if q == 1 and m > 0:
        raise ValueError("cannot place CX gates on a single qubit")
    chain = [(i, i + 1) for i in range(q - 1)]
    pairs = tuple(chain[i % len(chain)] for i in range(m)) if m else ()
    return AnsatzTemplate(q, pairs)


@dataclass(frozen=True)
class OptBudget:
    """Search effort knobs for optimize_params."""

    restarts: int = 8
    max_iters: int = 200
    fd_step: float = 1e-6
    tol: float = 1e-8


class _TraceObjective:
    """HS distance of an instantiated template to a target, with a cheap
    finite-difference gradient via prefix/suffix trace factorization."""

    def __init__(self, template: AnsatzTemplate, target: np.ndarray):
        self.template = template
        self.ops = template.ops()
        self.n = template.num_qubits
        self.dim = 1 << self.n
        if target.shape != (self.dim, self.dim):
            raise ValueError(
                f"target shape {target.shape} does not match {self.n} qubits"
            )
        self.adj_target = np.ascontiguousarray(target.conj().T)
        # Einsum spec extracting, for a gate on one qubit, the 2x2 matrix L
        # with tr(K . embed(u)) = sum_ab L[a,b] u[a,b].
        self._l_spec: dict[int, str] = {}

    def _gate_mats(self, params):
        mats = []
        for kind, qubits, off in self.ops:
            mats.append(_CX if kind == "cx" else u3_matrix(*params[off : off + 3]))
        return mats

    def value(self, params: np.ndarray) -> float:
        dim = self.dim
        mat = np.eye(dim, dtype=complex)
        for (kind, qubits, off), u in zip(self.ops, self._gate_mats(params)):
            mat = apply_unitary(mat, u, qubits, self.n)
        return 1.0 - abs(np.trace(self.adj_target @ mat)) / dim

    def _l_matrix(self, K: np.ndarray, qubit: int) -> np.ndarray:
        """L[a,b] = sum_rest K[row(S=b, rest), col(S=a, rest)] for one qubit."""
        n = self.n
        t = K.reshape((2,) * (2 * n))
        axis = n - 1 - qubit
        spec = self._l_spec.get(qubit)
        if spec is None:
            letters = "abcdefghijklmnopqrstuv"
            row = list(letters[:n])
            col = list(letters[:n])
            row[axis] = "y"  # row S-bit = b
            col[axis] = "x"  # col S-bit = a
            spec = "".join(row) + "".join(col) + "->xy"
            self._l_spec[qubit] = spec
        return np.einsum(spec, t)

    def value_and_grad(self, params: np.ndarray, h: float) -> tuple[float, np.ndarray]:
        n, dim = self.n, self.dim
        mats = self._gate_mats(params)
        num_ops = len(self.ops)
        pre = [None] * (num_ops + 1)
        pre[0] = np.eye(dim, dtype=complex)
        for g, ((kind, qubits, off), u) in enumerate(zip(self.ops, mats)):
            pre[g + 1] = apply_unitary(pre[g], u, qubits, n)
        suf = [None] * (num_ops + 1)
        suf[num_ops] = np.eye(dim, dtype=complex)
        for g in range(num_ops - 1, -1, -1):
            kind, qubits, off = self.ops[g]
            # suf[g] = suf[g+1] @ embed(u_g) as a product of gates > g-1.
            suf[g] = apply_unitary(suf[g + 1].T, mats[g].T, qubits, n).T

        t0 = np.trace(self.adj_target @ pre[num_ops])
        v0 = 1.0 - abs(t0) / dim
        grad = np.zeros(self.template.num_params)
        for g, (kind, qubits, off) in enumerate(self.ops):
            if kind == "cx":
                continue
            K = pre[g] @ self.adj_target @ suf[g + 1]
            L = self._l_matrix(K, qubits[0])
            theta = params[off : off + 3]
            for j in range(3):
                pert = theta.copy()
                pert[j] += h
                tj = np.einsum("ab,ab->", L, u3_matrix(*pert))
                grad[off + j] = ((1.0 - abs(tj) / dim) - v0) / h
        return v0, grad


def optimize_params(
    template: AnsatzTemplate,
    target: np.ndarray,
    budget: OptBudget | None = None,
    seed=0,
) -> tuple[np.ndarray, float]:
    """Fit template parameters to a target unitary under the HS distance.

    Multi-start gradient descent with backtracking line search; gradients
    are finite differences.  Deterministic given the seed.
    """
    budget = budget or OptBudget()
    obj = _TraceObjective(template, target)
    base_seed = list(np.atleast_1d(seed).astype(np.int64))
    best_params = None
    best_value = np.inf
    for r in range(budget.restarts):
        rng = np.random.default_rng(base_seed + [r])
        params = rng.uniform(-np.pi, np.pi, template.num_params)
        value = obj.value(params)
        step = 0.5
        for _ in range(budget.max_iters):
            if value < budget.tol:
                break
            value, grad = obj.value_and_grad(params, budget.fd_step)
            gsq = float(grad @ grad)
            if gsq < 1e-18:
                break
            s = step
            improved = False
            for _ in range(30):
                trial = params - s * grad
                v_new = obj.value(trial)
                if v_new < value - 1e-4 * s * gsq:
                    params, value = trial, v_new
                    improved = True
                    break
                s *= 0.5
            if not improved:
                break
            step = min(s * 2.0, 2.0)
        if value < best_value:
            best_value, best_params = value, params.copy()
        if best_value < budget.tol:
            break
    return best_params, float(best_value)


def expand_block(
    block: PartitionBlock,
    d_keep: float = 0.3,
    seed=0,
    budget: OptBudget | None = None,
) -> list[Candidate]:
    """Candidates for one block: the exact original plus kept ansatz fits
    for every CX budget below the original count, sorted by ascending m."""
    local = block.local_circuit
    target = unitary_of(local)
    originals_cnots = cnot_count(local)
    out = [Candidate(local, target, 0.0, originals_cnots)]
    base_seed = list(np.atleast_1d(seed).astype(np.int64))
    for m in range(originals_cnots):
        template = ansatz(m, local.num_qubits)
        params, hs = optimize_params(
            template, target, budget, seed=base_seed + [block.id, m]
        )
        if hs <= d_keep:
            circ = template.instantiate(params)
            out.append(Candidate(circ, unitary_of(circ), hs, m))
    return out


def expand_all(
    blocks: list[PartitionBlock],
    num_qubits: int,
    d_keep: float = 0.3,
    seed=0,
    budget: OptBudget | None = None,
    workers: int | None = None,
) -> ApproximationSet:
    """Expand every block; blocks are independent and may run concurrently.

    Worker count defaults to the PEEPOPT_THREADS environment variable.
    """
    if workers is None:
        workers = int(os.environ.get("PEEPOPT_THREADS", "1"))
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            candidates = list(
                pool.map(lambda b: expand_block(b, d_keep, seed, budget), blocks)
            )
    else:
        candidates = [expand_block(b, d_keep, seed, budget) for b in blocks]
    return ApproximationSet(num_qubits, list(blocks), candidates)


def score_candidates(approx: ApproximationSet, noise) -> None:
    """Fill every candidate's noisy-fidelity score in place (idempotent)."""
    from .noise import block_fidelity_score

    for block, cands in zip(approx.blocks, approx.candidates):
        for cand in cands:
            if cand.fidelity_score is None:
                cand.fidelity_score = block_fidelity_score(
                    cand.local_circuit, block.local_circuit, noise
                )
