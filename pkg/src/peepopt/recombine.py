"""Candidate selection: objective configurations and annealing engines.

A solution assigns one candidate index to every partition block.  Solutions
are scored by a three-part objective (approximation error, complexity or
noisy-fidelity reduction, differentiation from already-selected circuits)
and explored either iteratively (one generalized-simulated-annealing run
per result circuit) or with a population annealer that updates all result
circuits in each timestep.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .circuits import Circuit, compose, hs_distance
from .expand import ApproximationSet
from .partition import PartitionGraph, pair_embedding, pair_unitary

Solution = tuple  # choice vector: candidate index per block


class Mode(Enum):
    QUEST = "quest"
    BASIC = "basic"
    BASIC_ERR = "basic_err"
    CASCADE = "cascade"


# Penalty constants: duplicates beat every other branch; the QUEST
# over-threshold constant sits above the main-branch range [0, 1] and below
# the duplicate penalty.
DUPLICATE_PENALTY = 2.2
QUEST_THRESHOLD_PENALTY = 2.0
GRADIENT_PENALTY_BASE = 1.1


@dataclass(frozen=True)
class ObjectiveConfig:
    epsilon: float = 0.1
    w: float = 0.5
    mode: Mode = Mode.BASIC
    allow_duplicates: bool = False

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 <= self.w <= 1.0:
            raise ValueError(f"w must be in [0, 1], got {self.w}")


@dataclass(frozen=True)
class AnnealerConfig:
    max_iterations: int | None = None  # defaults to 1000 * num_blocks
    initial_temperature: float = 5230.0
    q_v: float = 2.62
    q_a: float = -5.0
    restart_temp_ratio: float = 2e-5
    seed: int = 0

    def __post_init__(self):
        if not 1.0 < self.q_v < 3.0:
            raise ValueError(f"q_v must be in (1, 3), got {self.q_v}")


class DistanceMemo:
    """Memo of candidate-pair HS distances, keyed (block, index, index)."""

    def __init__(self, approx: ApproximationSet):
        self.approx = approx
        self._table: dict[tuple[int, int, int], float] = {}

    def get(self, block: int, i: int, j: int) -> float:
        if i == j:
            return 0.0
        if i > j:
            i, j = j, i
        key = (block, i, j)
        value = self._table.get(key)
        if value is None:
            cands = self.approx.candidates[block]
            value = hs_distance(cands[i].unitary, cands[j].unitary)
            self._table[key] = value
        return value

    def items(self):
        return self._table.items()


class CascadeCache:
    """Pair unitaries and pair distances for the cascaded error metric."""

    def __init__(self, approx: ApproximationSet, graph: PartitionGraph):
        self.approx = approx
        self.graph = graph
        self._embeddings = {
            e: pair_embedding(approx.blocks, *e) for e in graph.edges
        }
        self._unitaries: dict[tuple, np.ndarray] = {}
        self._distances: dict[tuple, float] = {}

    def unitary(self, edge: tuple[int, int], ci: int, cj: int) -> np.ndarray:
        key = (edge, ci, cj)
        u = self._unitaries.get(key)
        if u is None:
            union, pos_i, pos_j = self._embeddings[edge]
            i, j = edge
            u = pair_unitary(
                self.approx.candidates[i][ci].unitary,
                self.approx.candidates[j][cj].unitary,
                pos_i,
                pos_j,
                len(union),
            )
            self._unitaries[key] = u
        return u

    def distance(self, edge: tuple[int, int], ci: int, cj: int) -> float:
        """HS distance of the chosen pair unitary to the original pair."""
        key = (edge, ci, cj)
        d = self._distances.get(key)
        if d is None:
            d = hs_distance(self.unitary(edge, 0, 0), self.unitary(edge, ci, cj))
            self._distances[key] = d
        return d


def pair_unitary_table(
    unitaries_i: Sequence[np.ndarray],
    unitaries_j: Sequence[np.ndarray],
    pos_i: tuple[int, ...],
    pos_j: tuple[int, ...],
    union_size: int,
) -> list[list[np.ndarray]]:
    """All cascaded pair unitaries for two candidate lists (used for
    precomputation; cost is linear in the number of pairs)."""
    return [
        [pair_unitary(ui, uj, pos_i, pos_j, union_size) for uj in unitaries_j]
        for ui in unitaries_i
    ]


def circuit_error_basic(sol: Solution, approx: ApproximationSet) -> float:
    """Sum of chosen-candidate HS distances; upper-bounds the full-circuit
    process distance."""
    return sum(approx.candidates[b][c].hs_distance for b, c in enumerate(sol))


def circuit_error_cascade(
    sol: Solution, approx: ApproximationSet, graph: PartitionGraph,
    cache: CascadeCache | None = None,
) -> float:
    """Per-block weighted average of incident pair distances, summed over
    blocks; isolated blocks fall back to their own HS distance."""
    if cache is None:
        cache = CascadeCache(approx, graph)
    total = 0.0
    for b in range(len(approx.blocks)):
        incident = graph.incident(b)
        if not incident:
            total += approx.candidates[b][sol[b]].hs_distance
            continue
        num = 0.0
        den = 0.0
        for edge in incident:
            i, j = edge
            w = graph.edges[edge]
            num += w * cache.distance(edge, sol[i], sol[j])
            den += w
        total += num / den
    return total


def differentiation(
    sol: Solution,
    others: Sequence[Solution],
    approx: ApproximationSet,
    memo: DistanceMemo | None = None,
) -> float:
    """Fraction of existing solutions that the candidate fails to differ
    from: the distance to each is compared against both approximation
    errors.  Empty existing set scores 0."""
    if not others:
        return 0.0
    memo = memo or DistanceMemo(approx)
    e_sol = circuit_error_basic(sol, approx)
    t = 0
    for s in others:
        d = sum(memo.get(b, sol[b], s[b]) for b in range(len(sol)))
        if d <= max(e_sol, circuit_error_basic(s, approx)):
            t += 1
    return t / len(others)


def reassemble(sol: Solution, approx: ApproximationSet) -> Circuit:
    """Full circuit for a solution: chosen candidates composed in block order."""
    chosen = approx.chosen(sol)
    return compose(
        [c.local_circuit for c in chosen],
        [b.qubits for b in approx.blocks],
        approx.num_qubits,
    )


def objective(
    sol: Solution,
    others: Sequence[Solution],
    approx: ApproximationSet,
    graph: PartitionGraph | None,
    cfg: ObjectiveConfig,
    memo: DistanceMemo | None = None,
    cascade_cache: CascadeCache | None = None,
) -> float:
    """Annealing objective: duplicate check, then error threshold, then the
    weighted complexity/differentiation score."""
    sol = tuple(sol)
    if not cfg.allow_duplicates and any(tuple(s) == sol for s in others):
        return DUPLICATE_PENALTY
    if cfg.mode is not Mode.BASIC_ERR:
        if cfg.mode is Mode.CASCADE:
            if graph is None:
                raise ValueError("cascade mode requires a partition graph")
            err = circuit_error_cascade(sol, approx, graph, cascade_cache)
        else:
            err = circuit_error_basic(sol, approx)
        if err > cfg.epsilon:
            if cfg.mode is Mode.QUEST:
                return QUEST_THRESHOLD_PENALTY
            return err - cfg.epsilon + GRADIENT_PENALTY_BASE
    if cfg.mode is Mode.BASIC_ERR:
        scores = [approx.candidates[b][c].fidelity_score for b, c in enumerate(sol)]
        if any(s is None for s in scores):
            raise ValueError("fidelity scores not cached; run score_candidates first")
        g = float(np.mean(scores))
    else:
        orig = approx.original_cnots()
        g = (
            sum(approx.candidates[b][c].cnots for b, c in enumerate(sol)) / orig
            if orig
            else 0.0
        )
    t = differentiation(sol, others, approx, memo)
    return cfg.w * g + (1.0 - cfg.w) * t


def make_objective(
    approx: ApproximationSet,
    graph: PartitionGraph | None,
    cfg: ObjectiveConfig,
) -> Callable[[Solution, Sequence[Solution]], float]:
    """Bind the shared caches and return f(solution, others) -> value."""
    memo = DistanceMemo(approx)
    cache = CascadeCache(approx, graph) if cfg.mode is Mode.CASCADE else None
    def f(sol, others):
        return objective(sol, others, approx, graph, cfg, memo, cache)
    return f


# --- generalized simulated annealing -----------------------------------------

_TAIL_LIMIT = 1e8


class _Visitor:
    """Tsallis visiting-distribution step generator (distorted Cauchy-Lorentz)."""

    def __init__(self, q_v: float, lower: np.ndarray, upper: np.ndarray):
        self.q_v = q_v
        self.lower = lower
        self.upper = upper
        self.span = upper - lower
        qv = q_v
        self._factor2 = math.exp((4.0 - qv) * math.log(qv - 1.0))
        self._factor3 = math.exp((2.0 - qv) * math.log(2.0) / (qv - 1.0))
        factor5 = 1.0 / (qv - 1.0) - 0.5
        d1 = 2.0 - factor5
        self._factor6 = (
            math.pi * (1.0 - factor5)
            / math.sin(math.pi * (1.0 - factor5))
            / math.exp(math.lgamma(d1))
        )

    def _deviate(self, rng, temperature: float, size: int) -> np.ndarray:
        qv = self.q_v
        factor1 = math.exp(math.log(temperature) / (qv - 1.0))
        factor4 = (
            math.sqrt(math.pi) * factor1 * self._factor2
            / (self._factor3 * (3.0 - qv))
        )
        sigma = math.exp(-(qv - 1.0) * math.log(self._factor6 / factor4) / (3.0 - qv))
        x = rng.normal(size=size) * sigma
        y = rng.normal(size=size)
        den = np.exp((qv - 1.0) * np.log(np.abs(y)) / (3.0 - qv))
        visit = x / den
        visit = np.where(visit > _TAIL_LIMIT, _TAIL_LIMIT * rng.uniform(size=size), visit)
        visit = np.where(visit < -_TAIL_LIMIT, -_TAIL_LIMIT * rng.uniform(size=size), visit)
        return visit

    def visit(self, x: np.ndarray, temperature: float, rng,
              dim: int | None = None) -> np.ndarray:
        """Propose a new point; full-vector step or single-coordinate step."""
        x_new = x.copy()
        if dim is None:
            x_new = x + self._deviate(rng, temperature, len(x))
        else:
            x_new[dim] = x[dim] + self._deviate(rng, temperature, 1)[0]
        # Wrap back into [lower, upper) to keep the walk inside bounds.
        x_new = np.mod(x_new - self.lower, self.span) + self.lower
        return x_new


def _temperature(t0: float, step: int, q_v: float) -> float:
    s = float(step) + 2.0
    return t0 * (2.0 ** (q_v - 1.0) - 1.0) / (s ** (q_v - 1.0) - 1.0)


def _accept(e_new: float, e_cur: float, temperature_step: float, q_a: float,
            rng) -> bool:
    if e_new <= e_cur:
        return True
    pqa = 1.0 - (1.0 - q_a) * (e_new - e_cur) / temperature_step
    if pqa <= 0.0:
        return False
    return rng.uniform() <= math.exp(math.log(pqa) / (1.0 - q_a))


def decode(x: np.ndarray, bounds: Sequence[int]) -> Solution:
    """Continuous vector -> choice indices by floor, clamped into range."""
    return tuple(
        min(int(math.floor(v)), a - 1) for v, a in zip(x, bounds)
    )


def dual_anneal(
    f: Callable[[Solution], float],
    bounds: Sequence[int],
    cfg: AnnealerConfig,
) -> tuple[Solution, float]:
    """Generalized simulated annealing over the discrete choice space.

    Operates on a continuous vector in the product of [0, a_b) intervals,
    decoded by floor; reanneals from the best point when the temperature
    floor is reached.  Deterministic per seed.
    """
    p = len(bounds)
    if p < 1:
        raise ValueError("need at least one block")
    lower = np.zeros(p)
    upper = np.array(bounds, dtype=float)
    max_iterations = cfg.max_iterations or 1000 * p
    rng = np.random.default_rng(cfg.seed)
    visitor = _Visitor(cfg.q_v, lower, upper)

    x = rng.uniform(lower, upper)
    e_cur = f(decode(x, bounds))
    best_x, best_e = x.copy(), e_cur

    since_restart = 0
    for it in range(max_iterations):
        temperature = _temperature(cfg.initial_temperature, since_restart, cfg.q_v)
        if temperature < cfg.initial_temperature * cfg.restart_temp_ratio:
            x = best_x.copy()
            e_cur = best_e
            since_restart = 0
            temperature = _temperature(cfg.initial_temperature, 0, cfg.q_v)
        t_step = temperature / float(it + 1)
        for j in range(2 * p):
            dim = None if j < p else j - p
            x_visit = visitor.visit(x, temperature, rng, dim)
            e_new = f(decode(x_visit, bounds))
            if e_new < best_e:
                best_x, best_e = x_visit.copy(), e_new
            if _accept(e_new, e_cur, t_step, cfg.q_a, rng):
                x, e_cur = x_visit, e_new
        since_restart += 1
    return decode(best_x, bounds), best_e


@dataclass
class _Member:
    x: np.ndarray
    rng: np.random.Generator
    e_cur: float
    best_x: np.ndarray
    best_e: float


def _member_rng(seed: int, x0: np.ndarray) -> np.random.Generator:
    # Stream travels with the member's initial content, not its slot, so
    # permuting the initial population permutes the outputs identically.
    digest = hashlib.sha256(np.asarray(x0, dtype=float).tobytes()).digest()
    return np.random.default_rng([int(seed), int.from_bytes(digest[:8], "big")])


def population_anneal(
    f: Callable[[Solution, list[Solution]], float],
    bounds: Sequence[int],
    cfg: AnnealerConfig,
    c: int,
    initial: list[np.ndarray] | None = None,
) -> list[tuple[Solution, float]]:
    """Anneal c solutions simultaneously.

    Every timestep updates all members; each evaluation receives the other
    members' current decoded solutions (never its own).  Reannealing
    restarts every member from its saved best.  Returns the per-member best
    solutions in member order.
    """
    if c < 1:
        raise ValueError(f"population size must be positive, got {c}")
    p = len(bounds)
    if p < 1:
        raise ValueError("need at least one block")
    lower = np.zeros(p)
    upper = np.array(bounds, dtype=float)
    max_iterations = cfg.max_iterations or 1000 * p
    setup_rng = np.random.default_rng(cfg.seed)
    if initial is None:
        initial = [setup_rng.uniform(lower, upper) for _ in range(c)]
    if len(initial) != c:
        raise ValueError(f"initial population has {len(initial)} members, expected {c}")
    visitor = _Visitor(cfg.q_v, lower, upper)

    members: list[_Member] = []
    snapshot = [decode(np.asarray(x0, dtype=float), bounds) for x0 in initial]
    for idx, x0 in enumerate(initial):
        x0 = np.asarray(x0, dtype=float)
        others = snapshot[:idx] + snapshot[idx + 1 :]
        e0 = f(snapshot[idx], others)
        members.append(_Member(x0.copy(), _member_rng(cfg.seed, x0), e0, x0.copy(), e0))

    since_restart = 0
    for it in range(max_iterations):
        temperature = _temperature(cfg.initial_temperature, since_restart, cfg.q_v)
        if temperature < cfg.initial_temperature * cfg.restart_temp_ratio:
            for m in members:
                m.x = m.best_x.copy()
                m.e_cur = m.best_e
            since_restart = 0
            temperature = _temperature(cfg.initial_temperature, 0, cfg.q_v)
        t_step = temperature / float(it + 1)
        snapshot = [decode(m.x, bounds) for m in members]
        for idx, m in enumerate(members):
            others = snapshot[:idx] + snapshot[idx + 1 :]
            # Re-score the current point: the landscape moves with the others.
            m.e_cur = f(decode(m.x, bounds), others)
            if m.e_cur < m.best_e:
                m.best_x, m.best_e = m.x.copy(), m.e_cur
            for j in range(2 * p):
                dim = None if j < p else j - p
                x_visit = visitor.visit(m.x, temperature, m.rng, dim)
                e_new = f(decode(x_visit, bounds), others)
                if e_new < m.best_e:
                    m.best_x, m.best_e = x_visit.copy(), e_new
                if _accept(e_new, m.e_cur, t_step, cfg.q_a, m.rng):
                    m.x, m.e_cur = x_visit, e_new
        since_restart += 1
    return [(decode(m.best_x, bounds), m.best_e) for m in members]


# --- engines ------------------------------------------------------------------

EARLY_TERMINATION_VALUE = 1.0  # best stuck in a penalty branch => stop


def recombine_iterative(
    approx: ApproximationSet,
    graph: PartitionGraph | None,
    obj_cfg: ObjectiveConfig,
    ann_cfg: AnnealerConfig,
    c: int,
) -> list[Solution]:
    """One annealing run per result circuit, differentiating against the
    results selected so far; stops early once only penalized solutions remain."""
    if c < 1:
        raise ValueError(f"need at least one result circuit, got {c}")
    f = make_objective(approx, graph, obj_cfg)
    results: list[Solution] = []
    for r in range(c):
        run_cfg = replace(ann_cfg, seed=np.random.SeedSequence([ann_cfg.seed, r]))
        sol, value = dual_anneal(lambda s: f(s, results), approx.counts(), run_cfg)
        if value > EARLY_TERMINATION_VALUE:
            break
        results.append(sol)
    return results


def recombine_population(
    approx: ApproximationSet,
    graph: PartitionGraph | None,
    obj_cfg: ObjectiveConfig,
    ann_cfg: AnnealerConfig,
    c: int,
) -> list[Solution]:
    """Population engine: c members annealed together, duplicates allowed."""
    obj_cfg = replace(obj_cfg, allow_duplicates=True)
    f = make_objective(approx, graph, obj_cfg)
    out = population_anneal(f, approx.counts(), ann_cfg, c)
    return [sol for sol, _ in out]


# Named configurations: (engine, mode, allow_duplicates).
CONFIGURATIONS: dict[str, tuple[str, Mode, bool]] = {
    "quest": ("iterative", Mode.QUEST, False),
    "basic": ("iterative", Mode.BASIC, False),
    "basic-err": ("iterative", Mode.BASIC_ERR, False),
    "pop": ("population", Mode.BASIC, True),
    "pop-err": ("population", Mode.BASIC_ERR, True),
    "cascade": ("iterative", Mode.CASCADE, False),
}


def recombine(
    name: str,
    approx: ApproximationSet,
    graph: PartitionGraph,
    obj_cfg: ObjectiveConfig,
    ann_cfg: AnnealerConfig,
    c: int,
) -> list[Solution]:
    """Run one of the six named recombination configurations."""
    try:
        engine, mode, allow_dup = CONFIGURATIONS[name]
    except KeyError:
        raise ValueError(
            f"unknown configuration '{name}'; choose from {sorted(CONFIGURATIONS)}"
        ) from None
    cfg = replace(obj_cfg, mode=mode, allow_duplicates=allow_dup)
    if engine == "iterative":
        return recombine_iterative(approx, graph, cfg, ann_cfg, c)
    return recombine_population(approx, graph, cfg, ann_cfg, c)
