"""Genetic algorithm that fills an archive with diverse community structures.

The population starts from random partitions. Each generation breeds
children by community transplant crossover followed by neighbor-majority
mutation, then keeps a mix of elite, roulette-wheel and uniformly random
survivors from parents and children together. Every evaluated partition is
archived.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .graph import Graph
from .metrics import FITNESS_TAGS, PropertyVector, fitness_value, property_vector
from .partition import Partition, canonical_assign, random_partition, read_partition, write_partition

logger = logging.getLogger(__name__)

__all__ = [
    "FitnessFunction",
    "GAConfig",
    "SolutionRecord",
    "Archive",
    "crossover",
    "mutate",
    "select",
    "run_ga",
    "FITNESS_ALIASES",
]

FITNESS_ALIASES = {
    "modularity": "modularity",
    "density": "avg_density",
    "clustcoef": "avg_clustering_coefficient",
    "conductance": "neg_avg_conductance",
}

# Added to min-max normalized roulette weights so the worst record stays selectable.
ROULETTE_EPS = 1e-9


@dataclass(frozen=True)
class FitnessFunction:
    """A maximized partition objective. Conductance enters negated."""

    tag: str
    direction: str = "maximize"

    def __post_init__(self):
        tag = FITNESS_ALIASES.get(self.tag, self.tag)
        if tag not in FITNESS_TAGS:
            raise ValidationError(f"unknown fitness {self.tag!r}; choose from {FITNESS_TAGS}")
        object.__setattr__(self, "tag", tag)

    def __call__(self, g: Graph, p) -> float:
        assign = p.assign if isinstance(p, Partition) else np.asarray(p)
        return fitness_value(g, canonical_assign(assign), self.tag)


@dataclass
class GAConfig:
    population: int = 1000
    generations: int = 50
    offspring_per_gen: int | None = None
    k_min: int = 20
    k_max: int = 160
    mutation_prob: float = 0.1
    elite_frac: float = 0.2
    roulette_frac: float = 0.6
    random_keep: int = 100
    archive_cap: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.offspring_per_gen is None:
            self.offspring_per_gen = self.population
        self.validate()

    def validate(self):
        if self.population < 1:
            raise ValidationError("population must be positive")
        if self.generations > 0 and self.population < 4:
            raise ValidationError("crossover needs a population of at least 4")
        if self.generations < 0 or self.offspring_per_gen < 0:
            raise ValidationError("generations and offspring_per_gen must be >= 0")
        if not 0 < self.elite_frac + self.roulette_frac <= 1:
            raise ValidationError("need 0 < elite_frac + roulette_frac <= 1")
        if min(self.elite_frac, self.roulette_frac) < 0:
            raise ValidationError("selection fractions must be nonnegative")
        if not 0 <= self.mutation_prob <= 1:
            raise ValidationError("mutation_prob outside [0, 1]")
        if self.archive_cap < self.population:
            raise ValidationError("archive_cap must be at least the population")
        if self.k_min < 1 or self.k_min > self.k_max:
            raise ValidationError("need 1 <= k_min <= k_max")


@dataclass(eq=False)
class SolutionRecord:
    id: int
    partition: Partition
    fitness_tag: str
    fitness: float
    generation: int
    properties: PropertyVector | None = None

    def ensure_properties(self, g: Graph) -> PropertyVector:
        if self.properties is None:
            self.properties = property_vector(g, self.partition)
        return self.properties


def _crossover_assign(pool, rng) -> np.ndarray:
    picks = rng.choice(len(pool), size=4, replace=False)
    ranked = sorted((pool[i] for i in picks), key=lambda r: -r.fitness)
    first = ranked[0].partition.assign
    second = ranked[1].partition.assign
    donor = int(rng.integers(first.max() + 1))
    child = second.copy()
    child[first == donor] = second.max() + 1
    return child


def crossover(pool, rng) -> Partition:
    """Transplant one community of the fitter of two parents into the other.

    Four records are drawn without replacement and ranked by fitness; the
    top two are the parents. A random community of the first parent is
    copied onto the second parent's assignment.
    """
    if len(pool) < 4:
        raise ValidationError(f"crossover needs at least 4 records, got {len(pool)}")
    return Partition(canonical_assign(_crossover_assign(pool, rng)))


def _mutate_assign(g, assign, prob, rng) -> np.ndarray:
    chosen = np.flatnonzero(rng.random(len(assign)) < prob)
    if len(chosen) == 0:
        return assign
    assign = assign.tolist()
    nbrs = g.neighbor_lists
    for i in chosen.tolist():
        if not nbrs[i]:
            continue
        counts = {}
        for j in nbrs[i]:
            c = assign[j]
            counts[c] = counts.get(c, 0) + 1
        top = max(counts.values())
        assign[i] = min(c for c, n in counts.items() if n == top)
    return np.array(assign, dtype=np.int64)


def mutate(g: Graph, p: Partition, prob: float, rng) -> Partition:
    """Move each node, with probability ``prob``, to its neighbors' majority community.

    Ties go to the smallest community id. Nodes are processed in id order
    on a working copy, so later moves see earlier ones.
    """
    return Partition(canonical_assign(_mutate_assign(g, p.assign.copy(), prob, rng)))


def _floor(x):
    return int(math.floor(x + 1e-9))


def select(pool, cfg: GAConfig, rng) -> list[SolutionRecord]:
    """Keep elites, then roulette-wheel picks, then a few uniform picks.

    Records are ranked by fitness (ties by id). The top ``elite_frac`` are
    kept; ``roulette_frac`` of the rest are drawn without replacement with
    probability proportional to min-max normalized fitness; finally up to
    ``random_keep`` of whatever is left are drawn uniformly.
    """
    n = len(pool)
    if n == 0:
        raise ValidationError("cannot select from an empty pool")
    ranked = sorted(pool, key=lambda r: (-r.fitness, r.id))
    n_elite = _floor(cfg.elite_frac * n)
    elites, rest = ranked[:n_elite], ranked[n_elite:]

    n_roulette = _floor(cfg.roulette_frac * len(rest))
    chosen = np.zeros(len(rest), dtype=bool)
    if n_roulette:
        f = np.array([r.fitness for r in rest])
        span = f.max() - f.min()
        w = (f - f.min()) / span if span > 0 else np.zeros(len(f))
        w = w + ROULETTE_EPS
        chosen[rng.choice(len(rest), size=n_roulette, replace=False, p=w / w.sum())] = True
    left = np.flatnonzero(~chosen)
    n_random = min(cfg.random_keep, len(left))
    lucky = np.zeros(len(rest), dtype=bool)
    if n_random:
        lucky[left[rng.choice(len(left), size=n_random, replace=False)]] = True
    return (elites
            + [r for r, c in zip(rest, chosen) if c]
            + [r for r, c in zip(rest, lucky) if c])


@dataclass(eq=False)
class Archive:
    """Every partition the GA evaluated, plus the run's bookkeeping.

    ``history[t]`` is the best fitness in the surviving pool after
    generation ``t`` (``t = 0`` is the initial population).
    """

    records: list[SolutionRecord]
    fitness_tag: str
    config: GAConfig
    history: list[float] = field(default_factory=list)
    elite_ids: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def best(self) -> SolutionRecord:
        return max(self.records, key=lambda r: (r.fitness, -r.id))

    def by_id(self) -> dict[int, SolutionRecord]:
        return {r.id: r for r in self.records}

    def properties(self, g: Graph) -> list[PropertyVector]:
        return [r.ensure_properties(g) for r in self.records]

    def manifest(self) -> dict:
        return {
            "fitness_tag": self.fitness_tag,
            "seed": self.config.seed,
            "config": asdict(self.config),
            "history": self.history,
            "elite_ids": self.elite_ids,
            "rows": [
                {"id": r.id, "fitness": r.fitness, "generation": r.generation,
                 "file": f"partitions/{r.id}.part"}
                for r in self.records
            ],
        }

    def save(self, directory, g: Graph, extra: dict | None = None) -> None:
        """Write ``manifest.json``, ``partitions/<id>.part`` and ``properties.csv``."""
        from .tables import write_properties_csv

        directory = Path(directory)
        (directory / "partitions").mkdir(parents=True, exist_ok=True)
        ids = g.original_ids()
        for r in self.records:
            write_partition(r.partition, directory / "partitions" / f"{r.id}.part", ids)
        write_properties_csv(directory / "properties.csv",
                             [(r.id, r.fitness_tag, r.ensure_properties(g)) for r in self.records])
        manifest = self.manifest()
        if extra:
            manifest.update(extra)
        with open(directory / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, directory, g: Graph | None = None) -> Archive:
        from .tables import read_properties_csv

        directory = Path(directory)
        with open(directory / "manifest.json") as fh:
            manifest = json.load(fh)
        props = {}
        if (directory / "properties.csv").exists():
            props = {sid: pv for sid, _, pv in read_properties_csv(directory / "properties.csv")}
        records = [
            SolutionRecord(
                id=int(row["id"]),
                partition=read_partition(directory / row["file"], g),
                fitness_tag=manifest["fitness_tag"],
                fitness=float(row["fitness"]),
                generation=int(row["generation"]),
                properties=props.get(int(row["id"])),
            )
            for row in manifest["rows"]
        ]
        return cls(records, manifest["fitness_tag"], GAConfig(**manifest["config"]),
                   list(manifest.get("history", [])), list(manifest.get("elite_ids", [])))


def _downsample(archive, cap, keep_ids, rng):
    keep = set(keep_ids)
    protected = [i for i, r in enumerate(archive) if r.id in keep]
    others = [i for i, r in enumerate(archive) if r.id not in keep]
    room = max(cap - len(protected), 0)
    sampled = rng.choice(len(others), size=min(room, len(others)), replace=False)
    chosen = set(protected) | {others[i] for i in sampled.tolist()}
    return [r for i, r in enumerate(archive) if i in chosen]


def run_ga(g: Graph, fitness, cfg: GAConfig | None = None, progress=None) -> Archive:
    """Evolve partitions of ``g`` under ``fitness`` and archive every one.

    Randomness is drawn from per-candidate streams keyed by
    ``(seed, generation, candidate index)``, so a run is reproducible
    regardless of evaluation order.

    Args:
        g: The graph.
        fitness: A :class:`FitnessFunction` or a fitness tag/alias.
        cfg: Run configuration; defaults to :class:`GAConfig()`.
        progress: Optional ``progress(generation, best_fitness)`` callback.
    """
    cfg = cfg or GAConfig()
    cfg.validate()
    if not isinstance(fitness, FitnessFunction):
        fitness = FitnessFunction(fitness)
    tag = fitness.tag
    seed = cfg.seed

    def evaluate(part, rid, gen):
        return SolutionRecord(rid, part, tag, fitness_value(g, part.assign, tag), gen)

    k_max = cfg.k_max
    if k_max > g.node_count:
        logger.warning("k_max=%d exceeds node count %d; clamping", k_max, g.node_count)
        k_max = max(g.node_count, 1)
    k_min = min(cfg.k_min, k_max)
    pool = [
        evaluate(random_partition(g, k_min, k_max,
                                  np.random.default_rng([seed, 0, i])), i, 0)
        for i in range(cfg.population)
    ]
    archive = list(pool)
    next_id = len(pool)
    n_elite = _floor(cfg.elite_frac * len(pool))
    elite_ids = [r.id for r in sorted(pool, key=lambda r: (-r.fitness, r.id))[:n_elite]]
    history = [max(r.fitness for r in pool)]
    if progress:
        progress(0, history[-1])

    for gen in range(1, cfg.generations + 1):
        children = []
        for j in range(cfg.offspring_per_gen):
            rng = np.random.default_rng([seed, 1, gen, j])
            child = _mutate_assign(g, _crossover_assign(pool, rng), cfg.mutation_prob, rng)
            children.append(evaluate(Partition(canonical_assign(child)), next_id, gen))
            next_id += 1
        combined = pool + children
        pool = select(combined, cfg, np.random.default_rng([seed, 2, gen]))
        elite_ids = [r.id for r in pool[:_floor(cfg.elite_frac * len(combined))]]
        archive.extend(children)
        if len(archive) > cfg.archive_cap:
            archive = _downsample(archive, cfg.archive_cap, elite_ids,
                                  np.random.default_rng([seed, 3, gen]))
        history.append(max(r.fitness for r in pool))
        if progress:
            progress(gen, history[-1])
    return Archive(archive, tag, cfg, history, elite_ids)
