"""Niching algorithms: preselection, crowding (GA and DE), fitness
sharing (GA and DE), species conservation, and species-partitioned DE.

Every algorithm has the signature ``(problem, config, budget, rng) ->
RunResult`` and terminates exactly when the evaluation budget runs out,
returning the partially updated population if that happens mid-generation.
``budget`` may be an :class:`~nichebench.core.EvalBudget` or a plain int,
``rng`` an :class:`~nichebench.core.RngStream` or a plain seed.

Replacement rules are uniformly strict: an incumbent is only displaced by
a strictly better challenger, so equal-fitness duplicates never drift.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import (
    BudgetExhausted,
    EvalBudget,
    Individual,
    Population,
    RngStream,
    as_stream,
    binary_tournament,
    blend_crossover,
    de_trial_vector,
    euclidean_distance,
    evaluate,
    gaussian_mutation,
    is_better,
    random_genome,
)

__all__ = [
    "AlgorithmConfig",
    "RunResult",
    "preselection_ga",
    "crowding_ga",
    "crowding_de",
    "sharing_ga",
    "sharing_de",
    "scga",
    "sde",
    "crowding_replacement",
    "shared_fitness",
    "determine_species_seeds",
    "conserve_species_seeds",
    "ALGORITHMS",
    "get_algorithm",
]

logger = logging.getLogger(__name__)

# added to transformed fitness scores so the sharing quotient stays positive
_SHARING_EPS = 1e-12


@dataclass
class AlgorithmConfig:
    """Parameters shared by all algorithms; unused fields are ignored.

    ``crowding_factor`` and ``mutation_rate`` default to the population
    size and 1/dimension when left as None.
    """

    population_size: int = 50
    crowding_factor: int | None = None
    species_distance: float = 1000.0
    sharing_radius: float = 1000.0
    sharing_alpha: float = 1.0
    de_F: float = 0.5
    de_CR: float = 0.9
    blend_alpha: float = 0.5
    mutation_rate: float | None = None
    mutation_sigma: float = 0.1

    def validate(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.crowding_factor is not None and not (
            1 <= self.crowding_factor <= self.population_size
        ):
            raise ValueError("crowding_factor must be in [1, population_size]")
        if self.species_distance <= 0:
            raise ValueError("species_distance must be positive")
        if self.sharing_radius <= 0:
            raise ValueError("sharing_radius must be positive")
        if self.sharing_alpha <= 0:
            raise ValueError("sharing_alpha must be positive")
        if not 0.0 <= self.de_CR <= 1.0:
            raise ValueError("de_CR must be a probability")
        if self.mutation_rate is not None and not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be a probability")
        if self.mutation_sigma <= 0:
            raise ValueError("mutation_sigma must be positive")

    def effective_crowding_factor(self) -> int:
        return self.population_size if self.crowding_factor is None else self.crowding_factor

    def effective_mutation_rate(self, dimension: int) -> float:
        return 1.0 / dimension if self.mutation_rate is None else self.mutation_rate


@dataclass
class RunResult:
    """Final population plus the budget spent and the convergence trace.

    ``trace`` holds (evaluation count, best fitness so far) checkpoints,
    one after initialization and one per generation.
    """

    final_population: Population
    evals_used: int
    trace: list[tuple[int, float]] = field(default_factory=list)


class _RunState:
    """Per-run bookkeeping: budget-aware evaluation and the trace."""

    def __init__(self, problem, config: AlgorithmConfig, budget, rng):
        config.validate()
        self.problem = problem
        self.config = config
        self.budget = budget if isinstance(budget, EvalBudget) else EvalBudget(int(budget))
        self.rng = as_stream(rng)
        self.direction = problem.direction
        self.bounds = problem.bounds
        self.mutation_rate = config.effective_mutation_rate(problem.dimension)
        self.best: float | None = None
        self.trace: list[tuple[int, float]] = []

    def try_eval(self, ind: Individual) -> bool:
        """Evaluate in place; False once the budget is exhausted."""
        try:
            evaluate(ind, self.problem, self.budget)
        except BudgetExhausted:
            return False
        if self.best is None or is_better(ind.fitness, self.best, self.direction):
            self.best = ind.fitness
        return True

    def checkpoint(self) -> None:
        if self.best is not None:
            self.trace.append((self.budget.used, self.best))

    def init_population(self) -> tuple[Population, bool]:
        size = self.config.population_size
        members = [Individual(random_genome(self.rng, self.bounds)) for _ in range(size)]
        pop = Population(members, capacity=size)
        for ind in pop:
            if not self.try_eval(ind):
                self.checkpoint()
                return pop, False
        self.checkpoint()
        return pop, True

    def crossover(self, p1: Individual, p2: Individual) -> tuple[np.ndarray, np.ndarray]:
        return blend_crossover(p1.genome, p2.genome, self.rng, self.bounds,
                               alpha=self.config.blend_alpha)

    def mutate(self, genome: np.ndarray) -> np.ndarray:
        return gaussian_mutation(genome, self.rng, self.bounds,
                                 rate=self.mutation_rate, sigma=self.config.mutation_sigma)

    def result(self, pop: Population) -> RunResult:
        return RunResult(final_population=pop, evals_used=self.budget.used, trace=self.trace)


def preselection_ga(problem, config: AlgorithmConfig | None = None,
                    budget=10000, rng=0) -> RunResult:
    """GA where each child competes only against its own parent.

    Parents are paired by a random permutation each generation; a child
    takes its parent's slot iff strictly better.
    """
    st = _RunState(problem, config or AlgorithmConfig(), budget, rng)
    pop, ok = st.init_population()
    while ok and not st.budget.exhausted:
        order = st.rng.gen.permutation(len(pop))
        for k in range(0, len(pop) - 1, 2):
            i, j = int(order[k]), int(order[k + 1])
            child_genomes = st.crossover(pop[i], pop[j])
            for parent_idx, genome in zip((i, j), child_genomes):
                child = Individual(st.mutate(genome))
                if not st.try_eval(child):
                    ok = False
                    break
                if is_better(child.fitness, pop[parent_idx].fitness, st.direction):
                    pop[parent_idx] = child
            if not ok:
                break
        st.checkpoint()
    return st.result(pop)


def crowding_replacement(child: Individual, pop: Population, cf: int,
                         rng: RngStream, direction: str) -> Population:
    """Let the child challenge the most similar of ``cf`` sampled members.

    Samples ``cf`` members without replacement, finds the sampled member
    nearest to the child (distance ties go to the lowest population
    index), and replaces it iff the child is strictly better.
    """
    if not 1 <= cf <= len(pop):
        raise ValueError("crowding factor must be in [1, len(pop)]")
    if cf == len(pop):
        idxs = np.arange(len(pop))
    else:
        idxs = rng.gen.choice(len(pop), size=cf, replace=False)
    genomes = np.array([pop[int(i)].genome for i in idxs])
    dists = np.sqrt(np.sum((genomes - child.genome) ** 2, axis=1))
    nearest = int(np.min(idxs[dists == dists.min()]))
    if is_better(child.fitness, pop[nearest].fitness, direction):
        pop[nearest] = child
    return pop


def crowding_ga(problem, config: AlgorithmConfig | None = None,
                budget=10000, rng=0) -> RunResult:
    """GA with crowding survivor selection.

    Binary-tournament parents produce blend/mutate children and every
    child immediately challenges its nearest member among a ``cf``-sized
    sample of the current population.
    """
    config = config or AlgorithmConfig()
    st = _RunState(problem, config, budget, rng)
    cf = config.effective_crowding_factor()
    pop, ok = st.init_population()
    while ok and not st.budget.exhausted:
        for _ in range(len(pop) // 2):
            p1 = binary_tournament(pop, st.rng, st.direction)
            p2 = binary_tournament(pop, st.rng, st.direction)
            for genome in st.crossover(p1, p2):
                child = Individual(st.mutate(genome))
                if not st.try_eval(child):
                    ok = False
                    break
                crowding_replacement(child, pop, cf, st.rng, st.direction)
            if not ok:
                break
        st.checkpoint()
    return st.result(pop)


def crowding_de(problem, config: AlgorithmConfig | None = None,
                budget=10000, rng=0) -> RunResult:
    """Differential evolution with crowding survivor selection.

    For each target index a DE/rand/1/bin trial is evaluated and then
    challenges the nearest member of the current population (the sample
    size defaults to the whole population).
    """
    config = config or AlgorithmConfig()
    if config.population_size < 4:
        raise ValueError("crowding_de needs a population of at least 4")
    st = _RunState(problem, config, budget, rng)
    cf = config.effective_crowding_factor()
    pop, ok = st.init_population()
    while ok and not st.budget.exhausted:
        for target in range(len(pop)):
            trial = de_trial_vector(target, pop, config.de_F, config.de_CR,
                                    st.rng, st.bounds)
            child = Individual(trial)
            if not st.try_eval(child):
                ok = False
                break
            crowding_replacement(child, pop, cf, st.rng, st.direction)
        st.checkpoint()
    return st.result(pop)


def shared_fitness(i: int, pop: Population, sharing_radius: float,
                   alpha: float = 1.0) -> float:
    """Raw fitness of member ``i`` divided by its degree of sharing.

    The sharing kernel is 1 - (d/radius)^alpha for d < radius and zero
    beyond; the self term keeps the denominator at 1 or more. Assumes a
    larger-is-better fitness orientation.
    """
    genomes = pop.genomes()
    dists = np.sqrt(np.sum((genomes - genomes[i]) ** 2, axis=1))
    return float(pop[i].fitness / _sharing_degrees(dists, sharing_radius, alpha))


def _sharing_degrees(dists: np.ndarray, radius: float, alpha: float):
    kernel = np.where(dists < radius, 1.0 - (dists / radius) ** alpha, 0.0)
    return kernel.sum(axis=-1)


def _shared_scores(genomes: np.ndarray, raw: np.ndarray, direction: str,
                   radius: float, alpha: float) -> np.ndarray:
    """Shared score for every row; minimization is flipped to a
    larger-is-better score via (max - f + eps) before dividing."""
    if direction == "min":
        scores = raw.max() - raw + _SHARING_EPS
    else:
        scores = raw.astype(float)
    diff = genomes[:, None, :] - genomes[None, :, :]
    dists = np.sqrt(np.sum(diff * diff, axis=2))
    return scores / _sharing_degrees(dists, radius, alpha)


def _score_tournament(scores: np.ndarray, rng: RngStream) -> int:
    """Binary tournament on a larger-is-better score vector; ties keep the
    first drawn index."""
    i = int(rng.gen.integers(scores.shape[0]))
    j = int(rng.gen.integers(scores.shape[0]))
    return j if scores[j] > scores[i] else i


def sharing_ga(problem, config: AlgorithmConfig | None = None,
               budget=10000, rng=0) -> RunResult:
    """Generational GA whose parent selection runs on shared fitness."""
    config = config or AlgorithmConfig()
    st = _RunState(problem, config, budget, rng)
    pop, ok = st.init_population()
    while ok and not st.budget.exhausted:
        scores = _shared_scores(pop.genomes(), pop.fitnesses(), st.direction,
                                config.sharing_radius, config.sharing_alpha)
        children: list[Individual] = []
        while len(children) < len(pop):
            p1 = pop[_score_tournament(scores, st.rng)]
            p2 = pop[_score_tournament(scores, st.rng)]
            for genome in st.crossover(p1, p2):
                if len(children) == len(pop):
                    break
                child = Individual(st.mutate(genome))
                if not st.try_eval(child):
                    ok = False
                    break
                children.append(child)
            if not ok:
                break
        for slot, child in enumerate(children):
            pop[slot] = child
        st.checkpoint()
    return st.result(pop)


def sharing_de(problem, config: AlgorithmConfig | None = None,
               budget=10000, rng=0) -> RunResult:
    """DE whose one-to-one survivor comparison runs on shared fitness.

    All trials of a generation are built from the frozen parent
    population; parents and trials are then pooled, shared scores are
    computed once over the pool, and each trial takes its target's slot
    iff its shared score is strictly higher.
    """
    config = config or AlgorithmConfig()
    if config.population_size < 4:
        raise ValueError("sharing_de needs a population of at least 4")
    st = _RunState(problem, config, budget, rng)
    pop, ok = st.init_population()
    while ok and not st.budget.exhausted:
        trials: list[Individual] = []
        for target in range(len(pop)):
            trial = de_trial_vector(target, pop, config.de_F, config.de_CR,
                                    st.rng, st.bounds)
            child = Individual(trial)
            if not st.try_eval(child):
                ok = False
                break
            trials.append(child)
        if trials:
            pool = list(pop) + trials
            genomes = np.array([ind.genome for ind in pool])
            raw = np.array([ind.fitness for ind in pool])
            scores = _shared_scores(genomes, raw, st.direction,
                                    config.sharing_radius, config.sharing_alpha)
            for slot, child in enumerate(trials):
                if scores[len(pop) + slot] > scores[slot]:
                    pop[slot] = child
        st.checkpoint()
    return st.result(pop)


def determine_species_seeds(pop: Population, species_distance: float,
                            direction: str) -> list[Individual]:
    """Pick species seeds by scanning the population best-first.

    The best individual always seeds the first species; every later
    individual seeds a new species iff it lies at distance >=
    species_distance/2 from all earlier seeds (i.e. outside every existing
    species region). Returns copies, in discovery order.
    """
    if len(pop) == 0:
        raise ValueError("cannot determine seeds of an empty population")
    radius = species_distance / 2.0
    keys = pop.fitnesses()
    if direction == "max":
        keys = -keys
    order = np.argsort(keys, kind="stable")
    seeds: list[Individual] = []
    for idx in order:
        genome = pop[int(idx)].genome
        if all(euclidean_distance(genome, s.genome) >= radius for s in seeds):
            seeds.append(pop[int(idx)].copy())
    return seeds


def _nearest_seed_assignment(genomes: np.ndarray, seeds: list[Individual]):
    """Nearest-seed index per member (ties to the earlier seed) and the
    full member-to-seed distance matrix."""
    seed_matrix = np.array([s.genome for s in seeds])
    diff = genomes[:, None, :] - seed_matrix[None, :, :]
    dists = np.sqrt(np.sum(diff * diff, axis=2))
    return np.argmin(dists, axis=1), dists


def conserve_species_seeds(pop: Population, seeds: list[Individual],
                           species_distance: float, direction: str) -> Population:
    """Copy saved seeds back into a population after variation.

    Members belong to the species of their nearest seed when within
    species_distance/2 of it. A seed whose genome already survived in its
    species leaves the population alone; otherwise it overwrites the
    worst member of its species, or the globally worst not-yet-replaced
    member when the species came out empty. No slot is replaced twice; if
    the seeds outnumber the slots the overflow is logged and dropped.
    """
    if not seeds:
        return pop
    radius = species_distance / 2.0
    genomes = pop.genomes()
    assigned, dists = _nearest_seed_assignment(genomes, seeds)
    replaced: set[int] = set()
    overflow = 0

    def worst_of(indices):
        worst = indices[0]
        for i in indices[1:]:
            if is_better(pop[worst].fitness, pop[i].fitness, direction):
                worst = i
        return worst

    for k, seed in enumerate(seeds):
        members = [
            i for i in range(len(pop))
            if i not in replaced and assigned[i] == k and dists[i, k] < radius
        ]
        if members:
            surviving = [i for i in members if np.array_equal(pop[i].genome, seed.genome)]
            if surviving:
                replaced.add(surviving[0])
                continue
            slot = worst_of(members)
        else:
            candidates = [i for i in range(len(pop)) if i not in replaced]
            if not candidates:
                overflow += 1
                continue
            slot = worst_of(candidates)
        pop[slot] = seed.copy()
        replaced.add(slot)
    if overflow:
        logger.warning("%d species seeds could not be conserved: population full", overflow)
    return pop


def scga(problem, config: AlgorithmConfig | None = None,
         budget=10000, rng=0, observer=None) -> RunResult:
    """Species conserving GA.

    Seeds are saved before variation, the population undergoes tournament
    selection, crossover and mutation, and the seeds are copied back into
    the freshly built generation. Conservation is evaluation-free, so it
    also runs when the budget dies mid-generation. ``observer``, when
    given, is called as ``observer(generation, population)`` after
    initialization and after every conservation pass (instrumentation
    hook, e.g. for auditing seed survival).
    """
    config = config or AlgorithmConfig()
    st = _RunState(problem, config, budget, rng)
    pop, ok = st.init_population()
    generation = 0
    if ok and observer is not None:
        observer(generation, pop)
    while ok and not st.budget.exhausted:
        generation += 1
        seeds = determine_species_seeds(pop, config.species_distance, st.direction)
        children: list[Individual] = []
        while len(children) < len(pop):
            p1 = binary_tournament(pop, st.rng, st.direction)
            p2 = binary_tournament(pop, st.rng, st.direction)
            for genome in st.crossover(p1, p2):
                if len(children) == len(pop):
                    break
                child = Individual(st.mutate(genome))
                if not st.try_eval(child):
                    ok = False
                    break
                children.append(child)
            if not ok:
                break
        # children fill the first slots; on exhaustion the rest stay parents
        for slot, child in enumerate(children):
            pop[slot] = child
        conserve_species_seeds(pop, seeds, config.species_distance, st.direction)
        st.checkpoint()
        if observer is not None:
            observer(generation, pop)
    return st.result(pop)


def sde(problem, config: AlgorithmConfig | None = None,
        budget=10000, rng=0) -> RunResult:
    """Species-partitioned differential evolution.

    Each generation the population is split into species around the seed
    scan's seeds (every member joins its nearest seed). DE runs inside
    each species; species smaller than 4 borrow donors from the whole
    population. One-to-one replacement keeps each seed unless one of its
    own trials strictly beats it.
    """
    config = config or AlgorithmConfig()
    if config.population_size < 4:
        raise ValueError("sde needs a population of at least 4")
    st = _RunState(problem, config, budget, rng)
    pop, ok = st.init_population()
    while ok and not st.budget.exhausted:
        seeds = determine_species_seeds(pop, config.species_distance, st.direction)
        assigned, _ = _nearest_seed_assignment(pop.genomes(), seeds)
        species: dict[int, list[int]] = {}
        for i, k in enumerate(assigned):
            species.setdefault(int(k), []).append(i)
        for target in range(len(pop)):
            members = species[int(assigned[target])]
            pool = members if len(members) >= 4 else None
            trial = de_trial_vector(target, pop, config.de_F, config.de_CR,
                                    st.rng, st.bounds, donor_pool=pool)
            child = Individual(trial)
            if not st.try_eval(child):
                ok = False
                break
            if is_better(child.fitness, pop[target].fitness, st.direction):
                pop[target] = child
        st.checkpoint()
    return st.result(pop)


ALGORITHMS = {
    "preselection_ga": preselection_ga,
    "crowding_ga": crowding_ga,
    "crowding_de": crowding_de,
    "sharing_ga": sharing_ga,
    "sharing_de": sharing_de,
    "scga": scga,
    "sde": sde,
}


def get_algorithm(name: str):
    try:
        return ALGORITHMS[name]
    except KeyError:
        known = ", ".join(sorted(ALGORITHMS))
        raise KeyError(f"unknown algorithm {name!r}; known algorithms: {known}") from None
