"""End-to-end pipeline: parse, partition, expand, recombine, evaluate, report.

The ideal reference defaults to the exact noiseless output distribution;
the sampled 8192-shot protocol is available behind ``exact_ideal=False``.
Timing is written to ``summary.csv`` only, so ``report.json`` is
byte-identical across runs with the same inputs and seed.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .circuits import Circuit, cnot_count
from .expand import ApproximationSet, OptBudget, expand_all, score_candidates
from .metrics import jsd, tvd
from .noise import (
    NoiseModel,
    counts_to_distribution,
    measure_distribution,
    sample_counts,
    simulate_density,
)
from .partition import build_partition_graph, scan_partition
from .qasm import emit_qasm, parse_qasm
from .recombine import (
    CONFIGURATIONS,
    AnnealerConfig,
    ObjectiveConfig,
    Solution,
    reassemble,
    recombine,
)


class PipelineError(RuntimeError):
    """A pipeline stage failed; the message carries the stage tag."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


@dataclass
class RunConfig:
    circuits: list[str]
    k: int = 4
    noise: NoiseModel = field(default_factory=NoiseModel)
    configs: list[str] = field(default_factory=lambda: list(CONFIGURATIONS))
    epsilon: float = 0.1
    w: float = 0.5
    c: int = 8
    seed: int = 0
    max_iterations: int | None = None
    q_v: float = 2.62
    q_a: float = -5.0
    initial_temperature: float = 5230.0
    shots_per_circuit: int = 1024
    ideal_shots: int = 8192
    exact_ideal: bool = True
    d_keep: float = 0.3
    expand_restarts: int = 8
    expand_max_iters: int = 200
    out_dir: str | None = None

    def __post_init__(self):
        if not 2 <= self.k <= 5:
            raise ValueError(f"k must be in [2, 5], got {self.k}")
        if self.shots_per_circuit < 1 or self.ideal_shots < 1:
            raise ValueError("shot counts must be positive")
        for name in self.configs:
            if name not in CONFIGURATIONS:
                raise ValueError(f"unknown configuration '{name}'")

    def annealer_config(self) -> AnnealerConfig:
        return AnnealerConfig(
            max_iterations=self.max_iterations,
            initial_temperature=self.initial_temperature,
            q_v=self.q_v,
            q_a=self.q_a,
            seed=self.seed,
        )

    def objective_config(self) -> ObjectiveConfig:
        return ObjectiveConfig(epsilon=self.epsilon, w=self.w)

    def budget(self) -> OptBudget:
        return OptBudget(restarts=self.expand_restarts, max_iters=self.expand_max_iters)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        if "noise" in data and isinstance(data["noise"], dict):
            data["noise"] = NoiseModel.from_dict(data["noise"])
        return cls(**data)


def ideal_distribution(circuit: Circuit) -> np.ndarray:
    """Exact noiseless output distribution (diagonal of the pure density)."""
    return measure_distribution(simulate_density(circuit, NoiseModel.zero()))


def noisy_counts(circuit: Circuit, noise: NoiseModel, shots: int, seed) -> dict[str, int]:
    rho = simulate_density(circuit, noise)
    dist = measure_distribution(rho, noise.readout)
    return sample_counts(dist, shots, seed)


def ensemble_distribution(
    solutions: list[Solution],
    approx: ApproximationSet,
    noise: NoiseModel,
    shots: int,
    seed,
) -> np.ndarray:
    """Pooled empirical distribution of all result circuits, equal shots each."""
    if not solutions:
        raise ValueError("need at least one solution")
    n = approx.num_qubits
    pooled = np.zeros(1 << n)
    for i, sol in enumerate(solutions):
        circuit = reassemble(sol, approx)
        counts = noisy_counts(circuit, noise, shots, [seed, i] if np.ndim(seed) == 0 else list(np.atleast_1d(seed)) + [i])
        pooled += counts_to_distribution(counts, n) * shots
    return pooled / pooled.sum()


def cnot_reduction(
    solutions: list[Solution], approx: ApproximationSet, original: Circuit
) -> float:
    """Mean percent CNOT reduction of the result circuits vs. the original."""
    base = cnot_count(original)
    if base == 0 or not solutions:
        return 0.0
    reductions = [
        100.0 * (1.0 - cnot_count(reassemble(sol, approx)) / base)
        for sol in solutions
    ]
    return float(np.mean(reductions))


@dataclass
class ConfigResult:
    name: str
    solutions: list[Solution]
    results_qasm: list[str]
    tvd: float
    jsd: float
    cnot_reduction_pct: float
    num_results: int
    seconds: float


@dataclass
class CircuitReport:
    circuit: str
    num_qubits: int
    baseline_tvd: float
    baseline_jsd: float
    baseline_cnots: int
    configs: dict[str, ConfigResult]


def evaluate_circuit(path: str, cfg: RunConfig) -> CircuitReport:
    """Run the full pipeline for one input circuit."""
    try:
        text = Path(path).read_text()
        circuit = parse_qasm(text)
    except OSError as exc:
        raise PipelineError("input", f"{path}: {exc}") from exc
    except ValueError as exc:
        raise PipelineError("parse", f"{path}: {exc}") from exc

    try:
        blocks = scan_partition(circuit, cfg.k)
        graph = build_partition_graph(blocks)
    except ValueError as exc:
        raise PipelineError("partition", str(exc)) from exc

    try:
        approx = expand_all(
            blocks, circuit.num_qubits, cfg.d_keep, cfg.seed, cfg.budget()
        )
        if any(CONFIGURATIONS[name][1].value == "basic_err" for name in cfg.configs):
            score_candidates(approx, cfg.noise)
    except ValueError as exc:
        raise PipelineError("expand", str(exc)) from exc

    ideal = (
        ideal_distribution(circuit)
        if cfg.exact_ideal
        else counts_to_distribution(
            sample_counts(ideal_distribution(circuit), cfg.ideal_shots, [cfg.seed, 0xB]),
            circuit.num_qubits,
        )
    )
    base_counts = noisy_counts(circuit, cfg.noise, cfg.shots_per_circuit, [cfg.seed, 0xA])
    base_dist = counts_to_distribution(base_counts, circuit.num_qubits)

    report = CircuitReport(
        circuit=str(path),
        num_qubits=circuit.num_qubits,
        baseline_tvd=tvd(base_dist, ideal),
        baseline_jsd=jsd(base_dist, ideal),
        baseline_cnots=cnot_count(circuit),
        configs={},
    )

    for name in cfg.configs:
        start = time.perf_counter()
        try:
            solutions = recombine(
                name, approx, graph, cfg.objective_config(), cfg.annealer_config(), cfg.c
            )
        except ValueError as exc:
            raise PipelineError("recombine", f"{name}: {exc}") from exc
        if solutions:
            dist = ensemble_distribution(
                solutions, approx, cfg.noise, cfg.shots_per_circuit, [cfg.seed, 1]
            )
            cfg_tvd, cfg_jsd = tvd(dist, ideal), jsd(dist, ideal)
        else:
            cfg_tvd, cfg_jsd = report.baseline_tvd, report.baseline_jsd
        report.configs[name] = ConfigResult(
            name=name,
            solutions=list(solutions),
            results_qasm=[emit_qasm(reassemble(s, approx)) for s in solutions],
            tvd=cfg_tvd,
            jsd=cfg_jsd,
            cnot_reduction_pct=cnot_reduction(solutions, approx, circuit),
            num_results=len(solutions),
            seconds=time.perf_counter() - start,
        )
    return report


def report_to_dict(report: CircuitReport) -> dict:
    """JSON-ready structure; timing deliberately excluded for determinism."""
    return {
        "circuit": report.circuit,
        "num_qubits": report.num_qubits,
        "baseline": {
            "tvd": report.baseline_tvd,
            "jsd": report.baseline_jsd,
            "cnots": report.baseline_cnots,
        },
        "configs": {
            name: {
                "tvd": r.tvd,
                "jsd": r.jsd,
                "cnot_reduction_pct": r.cnot_reduction_pct,
                "num_results": r.num_results,
                "solutions": [list(s) for s in r.solutions],
                "results_qasm": r.results_qasm,
            }
            for name, r in report.configs.items()
        },
    }


def run_pipeline(cfg: RunConfig) -> list[CircuitReport]:
    """Evaluate every configured circuit and write report.json / summary.csv."""
    reports = []
    out_dir = Path(cfg.out_dir) if cfg.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    try:
        for path in cfg.circuits:
            reports.append(evaluate_circuit(path, cfg))
    finally:
        if out_dir and reports:
            _write_reports(reports, cfg, out_dir)  # partial results still flushed
    return reports


def _write_reports(reports: list[CircuitReport], cfg: RunConfig, out_dir: Path) -> None:
    payload = {
        "seed": cfg.seed,
        "k": cfg.k,
        "noise": cfg.noise.to_dict(),
        "configs_requested": list(cfg.configs),
        "circuits": [report_to_dict(r) for r in reports],
    }
    with open(out_dir / "report.json", "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    lines = ["circuit,config,tvd,jsd,cnot_reduction_pct,num_results,seconds"]
    for r in reports:
        for name, res in r.configs.items():
            lines.append(
                f"{r.circuit},{name},{res.tvd:.6f},{res.jsd:.6f},"
                f"{res.cnot_reduction_pct:.3f},{res.num_results},{res.seconds:.3f}"
            )
    (out_dir / "summary.csv").write_text("\n".join(lines) + "\n")
