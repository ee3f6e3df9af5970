"""Resource-constrained evolutionary search over sub-network descriptors.

Candidates are one-hot descriptors; each is materialized, split at its
module's waist, costed by the hardware model and scored by a pluggable
accuracy oracle. Selection applies hard constraints first (any candidate
whose head exceeds the sensor memory budget is dropped outright, regardless
of accuracy), then keeps the top-k by the configured soft objective. Each
generation's children come from mutating and crossing over survivor pairs;
the incumbent best is always copied into the next generation, which makes
the per-generation best objective monotone.

Everything is deterministic given the seed: the surrogate oracle derives its
noise from a stable per-descriptor hash rather than call order, so results
do not depend on how candidate evaluation is scheduled.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field, replace

from .hwmodel import CostReport, HardwareConfig, evaluate
from .netgraph import count_ops
from .splitspace import (PhaseChoice, SearchSpace, SubNetDescriptor, descriptor_to_dict,
                         enumerate_space, materialize, random_descriptor, space_size,
                         split_boundary, validate_descriptor)
from .netgraph import split_at

__all__ = [
    "TableOracle",
    "SurrogateOracle",
    "Objective",
    "SearchConfig",
    "ParetoFront",
    "FrontMember",
    "EmptyPopulationError",
    "SpaceTooLargeError",
    "MissingOracleEntryError",
    "mutate",
    "crossover",
    "select",
    "run",
    "brute_force_best",
    "evaluate_descriptor",
    "LOG_CSV_HEADER",
]


class EmptyPopulationError(RuntimeError):
    """Every candidate violates a hard constraint."""


class SpaceTooLargeError(ValueError):
    """Refusing to enumerate a space beyond the brute-force cap."""


class MissingOracleEntryError(KeyError):
    """A table oracle has no record for the queried descriptor."""


class TableOracle:
    """Exact accuracy lookup from a list of {"descriptor", "accuracy"} records."""

    def __init__(self, records):
        self._table = {}
        for i, record in enumerate(records):
            if "descriptor" not in record or "accuracy" not in record:
                raise ValueError(f"oracle record {i} needs 'descriptor' and 'accuracy'")
            acc = float(record["accuracy"])
            if not 0.0 <= acc <= 1.0:
                raise ValueError(f"oracle record {i}: accuracy {acc} outside [0, 1]")
            key = json.dumps(record["descriptor"], sort_keys=True)
            self._table[key] = acc

    @classmethod
    def load(cls, path) -> "TableOracle":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(json.load(fh))

    def __len__(self) -> int:
        return len(self._table)

    def query(self, desc: SubNetDescriptor) -> float:
        key = desc.key()
        if key not in self._table:
            raise MissingOracleEntryError(f"no accuracy record for descriptor {key}")
        return self._table[key]


class SurrogateOracle:
    """Deterministic synthetic accuracy: a stand-in for task performance.

    acc = sigmoid(a * (log(total MACs) - log_ops_ref) - b * (c/d at the
    split) - noise), where c/d is the channel-compression ratio at the active
    splitting module and the noise is drawn from a per-descriptor seeded
    generator. Bigger networks score higher, harsher compression scores
    lower. Purely synthetic; coefficients live in the constructor so a study
    can reshape the landscape.
    """

    def __init__(self, space: SearchSpace, a: float = 0.6, b: float = 0.08,
                 log_ops_ref: float = math.log(2e7), noise_scale: float = 0.02,
                 seed: int = 0):
        self.space = space
        self.a = a
        self.b = b
        self.log_ops_ref = log_ops_ref
        self.noise_scale = noise_scale
        self.seed = seed

    def _noise(self, key: str) -> float:
        digest = hashlib.sha256(f"{self.seed}:{key}".encode()).digest()
        u = int.from_bytes(digest[:8], "big") / 2**64  # uniform in [0, 1)
        return self.noise_scale * (2.0 * u - 1.0)

    def query(self, desc: SubNetDescriptor) -> float:
        net = materialize(self.space, desc)
        total = count_ops(net)
        pos = desc.gate_position
        if pos is None:
            raise ValueError("surrogate oracle scores one-hot descriptors only")
        width = desc.stem_channels if pos == 0 else desc.phases[pos - 1].channels
        ratio = width / desc.phases[pos].reduced_d
        z = self.a * (math.log(total) - self.log_ops_ref) - self.b * ratio - self._noise(desc.key())
        return 1.0 / (1.0 + math.exp(-z))


@dataclass(frozen=True, slots=True)
class Objective:
    """Soft objective: minimize latency above an accuracy floor, or maximize
    accuracy under a latency cap. Candidates missing the floor/cap rank
    strictly behind every candidate that meets it."""

    mode: str = "min_latency"
    acc_floor: float | None = None
    latency_cap_s: float | None = None

    def __post_init__(self):
        if self.mode not in ("min_latency", "max_accuracy"):
            raise ValueError(f"unknown objective mode {self.mode!r}")

    def key(self, report: CostReport, accuracy: float):
        if self.mode == "min_latency":
            if self.acc_floor is not None and accuracy < self.acc_floor:
                return (1, -accuracy, report.overall)
            return (0, report.overall, -accuracy)
        if self.latency_cap_s is not None and report.overall > self.latency_cap_s:
            return (1, report.overall, -accuracy)
        return (0, -accuracy, report.overall)


@dataclass(frozen=True, slots=True)
class SearchConfig:
    population_size: int = 512
    generations: int = 20
    mutation_rate: float = 0.1
    crossover_rate: float = 0.5
    top_k: int | None = None  # survivors per generation; defaults to population/2
    seed: int = 0
    objective: Objective = field(default_factory=Objective)

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not 0.0 <= self.mutation_rate <= 1.0 or not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("rates must lie in [0, 1]")

    @property
    def survivors(self) -> int:
        return self.top_k if self.top_k is not None else max(1, self.population_size // 2)


@dataclass(frozen=True, slots=True)
class Candidate:
    desc: SubNetDescriptor
    report: CostReport
    accuracy: float


@dataclass(frozen=True, slots=True)
class FrontMember:
    desc: SubNetDescriptor
    report: CostReport
    accuracy: float


@dataclass(frozen=True)
class ParetoFront:
    """Non-dominated (latency down, accuracy up) hard-feasible candidates."""

    members: tuple[FrontMember, ...]

    def to_json(self) -> str:
        entries = [
            {
                "descriptor": descriptor_to_dict(m.desc),
                "accuracy": m.accuracy,
                "report": m.report.to_dict(),
            }
            for m in self.members
        ]
        return json.dumps(entries, indent=2, sort_keys=True)


LOG_CSV_HEADER = "generation,best_objective,best_accuracy,best_latency_ms,feasible_count"


def mutate(desc: SubNetDescriptor, space: SearchSpace, rate: float,
           rng: random.Random) -> SubNetDescriptor:
    """Resample each choice field independently with probability ``rate``.

    The gate vector is resampled as a unit (position redrawn) so one-hotness
    is preserved; view mode and view count are not search dimensions.
    """
    def maybe(value, choices):
        return rng.choice(list(choices)) if rng.random() < rate else value

    phases = tuple(
        PhaseChoice(
            channels=maybe(p.channels, spec.channels),
            expansion=maybe(p.expansion, spec.expansions),
            depth_before=maybe(p.depth_before, spec.depth_before),
            depth_after=maybe(p.depth_after, spec.depth_after),
            reduced_d=maybe(p.reduced_d, spec.reduced_d),
        )
        for p, spec in zip(desc.phases, space.phases)
    )
    gates = desc.gates
    if rng.random() < rate:
        pos = rng.randrange(space.num_phases)
        gates = tuple(1 if j == pos else 0 for j in range(space.num_phases))
    return replace(
        desc,
        resolution=maybe(desc.resolution, space.input_resolutions),
        stem_channels=maybe(desc.stem_channels, space.stem_channels),
        phases=phases,
        gates=gates,
        head_channels=maybe(desc.head_channels, space.head_channels),
    )


def crossover(a: SubNetDescriptor, b: SubNetDescriptor,
              rng: random.Random) -> SubNetDescriptor:
    """Uniform crossover; the gate vector is inherited wholesale from one parent."""
    def pick(x, y):
        return x if rng.random() < 0.5 else y

    phases = tuple(
        PhaseChoice(
            channels=pick(pa.channels, pb.channels),
            expansion=pick(pa.expansion, pb.expansion),
            depth_before=pick(pa.depth_before, pb.depth_before),
            depth_after=pick(pa.depth_after, pb.depth_after),
            reduced_d=pick(pa.reduced_d, pb.reduced_d),
        )
        for pa, pb in zip(a.phases, b.phases)
    )
    return replace(
        a,
        resolution=pick(a.resolution, b.resolution),
        stem_channels=pick(a.stem_channels, b.stem_channels),
        phases=phases,
        gates=a.gates if rng.random() < 0.5 else b.gates,
        head_channels=pick(a.head_channels, b.head_channels),
    )


def evaluate_descriptor(space: SearchSpace, desc: SubNetDescriptor,
                        hw: HardwareConfig, deployment: str = "single") -> CostReport:
    """Materialize, split at the module waist, and cost one descriptor."""
    net = materialize(space, desc)
    head, tail, _ = split_at(net, split_boundary(space, desc))
    return evaluate(head, tail, hw, deployment=deployment)


def select(children: list[Candidate], cfg: SearchConfig) -> list[Candidate]:
    """Drop hard-constraint violators, then keep top-k by the soft objective."""
    feasible = [c for c in children if c.report.mem_ok]
    if not feasible:
        raise EmptyPopulationError("no candidate satisfies the hard constraints")
    ranked = sorted(feasible, key=lambda c: cfg.objective.key(c.report, c.accuracy))
    return ranked[:cfg.survivors]


def _pareto(members: dict[str, Candidate]) -> ParetoFront:
    ordered = sorted(members.values(),
                     key=lambda c: (c.report.overall, -c.accuracy, c.desc.key()))
    front = []
    best_acc = -1.0
    for c in ordered:
        if c.accuracy > best_acc:
            front.append(FrontMember(c.desc, c.report, c.accuracy))
            best_acc = c.accuracy
    return ParetoFront(tuple(front))


def run(space: SearchSpace, hw: HardwareConfig, oracle, cfg: SearchConfig,
        deployment: str = "single", num_views: int | None = None):
    """Evolutionary search. Returns (ParetoFront, per-generation log rows).

    Log rows are (generation, best_objective, best_accuracy, best_latency_ms,
    feasible_count). Candidate evaluation is pure and memoized per descriptor,
    so the outcome is independent of evaluation order.
    """
    view_mode = "multi" if deployment == "multi" else "single"
    views = num_views if num_views is not None else (hw.num_sensors if view_mode == "multi" else 1)
    rng = random.Random(cfg.seed)
    # Descriptors are frozen dataclasses, so they hash by value: memoize on
    # the descriptor itself (evaluation is pure, so order cannot matter).
    cache: dict[SubNetDescriptor, Candidate] = {}
    feasible_seen: dict[SubNetDescriptor, Candidate] = {}

    def costed(desc: SubNetDescriptor) -> Candidate:
        cand = cache.get(desc)
        if cand is None:
            report = evaluate_descriptor(space, desc, hw, deployment)
            cand = Candidate(desc, report, oracle.query(desc))
            cache[desc] = cand
            if report.mem_ok:
                feasible_seen[desc] = cand
        return cand

    population = [random_descriptor(space, rng, one_hot=True, view_mode=view_mode,
                                    num_views=views)
                  for _ in range(cfg.population_size)]
    log = []
    best: Candidate | None = None
    for gen in range(cfg.generations + 1):
        evaluated = [costed(d) for d in population]
        survivors = select(evaluated, cfg)
        incumbent = survivors[0]
        if best is None or cfg.objective.key(incumbent.report, incumbent.accuracy) < \
                cfg.objective.key(best.report, best.accuracy):
            best = incumbent
        log.append((
            gen,
            cfg.objective.key(best.report, best.accuracy),
            best.accuracy,
            best.report.overall * 1e3,
            sum(1 for c in evaluated if c.report.mem_ok),
        ))
        if gen == cfg.generations:
            break
        # Children: elitism slot 0, then mutated crossovers of survivor pairs.
        children = [best.desc]
        while len(children) < cfg.population_size:
            pa = rng.choice(survivors).desc
            if rng.random() < cfg.crossover_rate:
                pb = rng.choice(survivors).desc
                child = crossover(pa, pb, rng)
            else:
                child = pa
            children.append(mutate(child, space, cfg.mutation_rate, rng))
        population = children

    return _pareto(feasible_seen), log


def brute_force_best(space: SearchSpace, hw: HardwareConfig, oracle,
                     objective: Objective, deployment: str = "single",
                     num_views: int | None = None, cap: int = 20000):
    """Exact optimum over all feasible one-hot descriptors of a small space.

    Independent of the evolutionary path: plain enumeration, no shared state.
    """
    size = space_size(space)
    if size > cap:
        raise SpaceTooLargeError(f"{size} descriptors exceed the enumeration cap {cap}")
    view_mode = "multi" if deployment == "multi" else "single"
    views = num_views if num_views is not None else (hw.num_sensors if view_mode == "multi" else 1)
    best = None
    best_key = None
    for desc in enumerate_space(space, view_mode=view_mode, num_views=views):
        report = evaluate_descriptor(space, desc, hw, deployment)
        if not report.mem_ok:
            continue
        acc = oracle.query(desc)
        key = objective.key(report, acc)
        if best_key is None or key < best_key:
            best, best_key = Candidate(desc, report, acc), key
    if best is None:
        raise EmptyPopulationError("every descriptor in the space violates the hard constraints")
    return best.desc, best.report, best.accuracy


def log_to_csv(log) -> str:
    lines = [LOG_CSV_HEADER]
    for gen, objective_key, acc, lat_ms, feasible in log:
        objective_scalar = objective_key[1] if objective_key[0] == 0 else float("inf")
        lines.append(f"{gen},{objective_scalar:.9g},{acc:.9g},{lat_ms:.9g},{feasible}")
    return "\n".join(lines) + "\n"
