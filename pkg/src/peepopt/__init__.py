"""Approximate peephole optimization of quantum circuits.

Partition a circuit into small blocks, generate approximate replacements
for each block, and recombine one choice per block into an ensemble of
noise-resilient result circuits.
"""
from .circuits import Circuit, Gate, GateKind, cnot_count, compose, hs_distance, unitary_of
from .expand import ApproximationSet, Candidate, OptBudget, ansatz, expand_all, expand_block, optimize_params
from .metrics import jsd, tvd
from .noise import (
    NoiseModel,
    block_fidelity_score,
    frobenius_distance,
    measure_distribution,
    sample_counts,
    simulate_density,
)
from .partition import (
    PartitionBlock,
    PartitionGraph,
    build_partition_graph,
    pair_subcircuit,
    scan_partition,
)
from .pipeline import RunConfig, cnot_reduction, ensemble_distribution, run_pipeline
from .qasm import QasmError, UnsupportedGateError, emit_qasm, parse_qasm
from .recombine import (
    CONFIGURATIONS,
    AnnealerConfig,
    Mode,
    ObjectiveConfig,
    circuit_error_basic,
    circuit_error_cascade,
    differentiation,
    dual_anneal,
    objective,
    population_anneal,
    reassemble,
    recombine,
    recombine_iterative,
    recombine_population,
)

__version__ = "0.1.0"
