"""Differential evolution ("current-to-best/1/bin") over ansatz angles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from tetrafold.lattice import decode, grow
from tetrafold.loggers import get_logger
from tetrafold.oracle import level_probabilities
from tetrafold.vqe import AnsatzSpec, CVaRConfig, CVaREngine, Entangler, SampleBatch

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from tetrafold.hamiltonian import FoldingHamiltonian
    from tetrafold.lattice import Conformation
    from tetrafold.oracle import Spectrum

log = get_logger(__name__)

TWO_PI = 2 * math.pi

PROPOSE, PARENT, TRIAL, INIT = range(4)
"""Roles of the random streams spawned per generation and individual."""

FITNESS_TOLERANCE = 1e-9
"""CVaR values closer than this are tied."""


class TieBreak(Enum):
    """Who survives when parent and trial have the same CVaR."""

    PARENT = "parent"
    """The parent is kept."""
    TAIL_SHOTS = "tail_shots"
    """The one with more shots at or below the tied CVaR; the parent if those tie too."""


def seed_stream(seed: int, generation: int, individual: int, role: int) -> np.random.SeedSequence:
    """Independent seed of one random draw, so results do not depend on evaluation order.

    Parameters:
        seed: Master seed.
        generation: Generation number (0 is the initial population).
        individual: Index in the population.
        role: One of `PROPOSE`, `PARENT`, `TRIAL`, `INIT`.

    Returns:
        The seed sequence.
    """
    return np.random.SeedSequence(seed, spawn_key=(generation, individual, role))


@dataclass(frozen=True)
class DEConfig:
    """Optimizer settings."""

    population: int | None = None
    """Population size `P`; `None` means `5 m n`."""
    differential_weight: float = 0.7
    """`F`."""
    crossover: float = 0.9
    """`CR`."""
    generations: int = 100
    seed: int = 0
    alpha: float = 0.05
    """CVaR tail fraction, constant over the run."""
    shots: int = 1024
    layers: int = 2
    """Ansatz depth `m`."""
    entangler: Entangler = Entangler.RING
    tie_break: TieBreak = TieBreak.PARENT
    """Rule for equal CVaR values."""

    def __post_init__(self) -> None:
        if self.population is not None and self.population < 4:  # noqa: PLR2004
            raise ValueError(f"The population needs at least 4 individuals, got {self.population}")
        if not 0 <= self.differential_weight <= 2:  # noqa: PLR2004
            raise ValueError(f"F must lie in [0, 2], got {self.differential_weight}")
        if not 0 <= self.crossover <= 1:
            raise ValueError(f"CR must lie in [0, 1], got {self.crossover}")
        if self.generations < 0:
            raise ValueError(f"The number of generations cannot be negative, got {self.generations}")

    def population_size(self, n: int) -> int:
        """Resolved population size.

        Parameters:
            n: Number of qubits.

        Returns:
            `P`.
        """
        return self.population if self.population is not None else max(4, 5 * self.layers * n)

    def ansatz(self, n: int) -> AnsatzSpec:
        """Ansatz of an `n`-qubit instance.

        Parameters:
            n: Number of qubits.

        Returns:
            The ansatz.
        """
        return AnsatzSpec(n, self.entangler, self.layers)

    def sampling(self) -> CVaRConfig:
        """Sampling settings of the objective."""
        return CVaRConfig(self.alpha, self.shots, self.seed)


@dataclass
class Individual:
    """A member of the population."""

    theta: NDArray[np.float64]
    """Angles in `[0, 2 pi)`."""
    fitness: float
    """CVaR of `theta` under its last evaluation."""
    batch: SampleBatch
    """Batch of the last evaluation."""
    best_so_far: float = math.inf
    """Lowest fitness this slot has held."""
    ground_probability: float | None = None
    """`P_0` of the last batch, when a spectrum is attached."""

    def __post_init__(self) -> None:
        self.best_so_far = min(self.best_so_far, self.fitness)


def _ground_probability(batch: SampleBatch, spectrum: Spectrum | None) -> float | None:
    if spectrum is None or batch.energies is None:
        return None
    return level_probabilities(batch.energies, batch.counts, spectrum.levels).ground


def init_population(
    config: DEConfig,
    engine: CVaREngine,
    *,
    spectrum: Spectrum | None = None,
    thetas: NDArray[np.float64] | None = None,
) -> list[Individual]:
    """Draw and evaluate the initial population.

    Parameters:
        config: Optimizer settings.
        engine: The objective.
        spectrum: Oracle spectrum for `P_0` tracking.
        thetas: Explicit `(P, 2n)` angles replacing the uniform draw.

    Returns:
        The population.
    """
    n = engine.ansatz.n
    size = config.population_size(n)
    if thetas is None:
        thetas = np.stack(
            [
                np.random.default_rng(seed_stream(config.seed, 0, i, INIT)).uniform(0, TWO_PI, 2 * n)
                for i in range(size)
            ],
        )
    elif thetas.shape != (size, 2 * n):
        raise ValueError(f"Expected initial angles of shape {(size, 2 * n)}, got {thetas.shape}")
    population = []
    for i, theta in enumerate(thetas):
        evaluation = engine.evaluate(theta, seed_stream(config.seed, 0, i, TRIAL))
        population.append(
            Individual(
                np.mod(theta, TWO_PI),
                evaluation.cvar,
                evaluation.batch,
                ground_probability=_ground_probability(evaluation.batch, spectrum),
            ),
        )
    log.info(f"Initial population of {size} individuals over {2 * n} angles")
    return population


def propose(
    parent: int,
    best: int,
    thetas: NDArray[np.float64],
    config: DEConfig,
    rng: np.random.Generator,
) -> NDArray[np.float64]:
    """Build a trial vector by current-to-best/1 mutation and binomial crossover.

    Parameters:
        parent: Index of the parent.
        best: Index of the current best individual.
        thetas: `(P, 2n)` population angles.
        config: Optimizer settings.
        rng: Random generator.

    Returns:
        The trial angles, wrapped into `[0, 2 pi)`.
    """
    size, dimension = thetas.shape
    others = np.delete(np.arange(size), parent)
    r1, r2 = rng.choice(others, size=2, replace=False)
    current = thetas[parent]
    donor = (
        current
        + config.differential_weight * (thetas[best] - current)
        + config.differential_weight * (thetas[r1] - thetas[r2])
    )
    mask = rng.random(dimension) < config.crossover
    mask[rng.integers(dimension)] = True
    return np.mod(np.where(mask, donor, current), TWO_PI)


def select(parent: Individual, trial: Individual, tie_break: TieBreak = TieBreak.PARENT) -> Individual:
    """Keep the fitter of a parent and its trial.

    CVaR values within `FITNESS_TOLERANCE` are tied. Ties keep the parent unless `tie_break`
    is `TAIL_SHOTS`, in which case the trial wins if strictly more of its shots reach the tied level.

    Parameters:
        parent: The parent.
        trial: The trial.
        tie_break: Rule for equal CVaR values.

    Returns:
        The survivor, carrying the slot's best-so-far fitness.
    """
    if abs(trial.fitness - parent.fitness) > FITNESS_TOLERANCE:
        survivor = trial if trial.fitness < parent.fitness else parent
    elif tie_break is TieBreak.TAIL_SHOTS:
        level = max(parent.fitness, trial.fitness)
        better = trial.batch.shots_at_or_below(level) > parent.batch.shots_at_or_below(level)
        survivor = trial if better else parent
    else:
        survivor = parent
    survivor.best_so_far = min(parent.best_so_far, survivor.fitness)
    return survivor


@dataclass(frozen=True)
class GenerationRecord:
    """Population statistics after a generation."""

    generation: int
    mean_cvar: float
    best_cvar: float
    mean_p0: float | None = None
    max_p0: float | None = None


@dataclass(frozen=True)
class HistogramBin:
    """Shots of the final population sharing a contact bitstring."""

    shots: int
    frequency: float
    lowest_energy: float


@dataclass(frozen=True, eq=False)
class FoldResult:
    """Outcome of an optimization run."""

    hamiltonian: FoldingHamiltonian
    config: DEConfig
    best: Individual
    """Fittest individual of the final population."""
    population: list[Individual]
    trajectory: list[GenerationRecord]
    histogram: dict[str, HistogramBin] = field(default_factory=dict)
    """Final shots binned by contact bitstring."""
    best_bitstring: str = ""
    """Lowest-energy outcome measured from the best individual."""
    best_energy: float = math.nan

    @property
    def best_conformation(self) -> Conformation | None:
        """Conformation of `best_bitstring`, when its turns are valid."""
        turns = decode(self.best_bitstring, self.hamiltonian.layout)
        return grow(turns) if turns.is_valid else None


def _record(generation: int, population: list[Individual]) -> GenerationRecord:
    fitness = np.array([individual.fitness for individual in population])
    probabilities = [individual.ground_probability for individual in population]
    if any(p is None for p in probabilities):
        return GenerationRecord(generation, float(fitness.mean()), float(fitness.min()))
    values = np.array(probabilities, dtype=np.float64)
    return GenerationRecord(generation, float(fitness.mean()), float(fitness.min()), float(values.mean()), float(values.max()))


def contact_histogram(population: list[Individual], hamiltonian: FoldingHamiltonian) -> dict[str, HistogramBin]:
    """Bin the shots of a population by contact bitstring.

    Parameters:
        population: Evaluated individuals.
        hamiltonian: The Hamiltonian, for the register layout.

    Returns:
        Bins keyed by contact bitstring, sorted.
    """
    layout = hamiltonian.layout
    shots: dict[str, int] = {}
    lowest: dict[str, float] = {}
    for individual in population:
        batch = individual.batch
        energies = batch.energies if batch.energies is not None else hamiltonian.evaluate_indices(batch.indices)
        for bits, count, energy in zip(batch.bitstrings(), batch.counts.tolist(), energies.tolist()):
            key = layout.contact_bits(bits)
            shots[key] = shots.get(key, 0) + count
            lowest[key] = min(lowest.get(key, math.inf), energy)
    total = sum(shots.values())
    return {key: HistogramBin(shots[key], shots[key] / total, lowest[key]) for key in sorted(shots)}


def run(
    hamiltonian: FoldingHamiltonian,
    config: DEConfig | None = None,
    *,
    spectrum: Spectrum | None = None,
    thetas: NDArray[np.float64] | None = None,
) -> FoldResult:
    """Minimize the CVaR of a Hamiltonian by differential evolution.

    Parents and trials are re-sampled with fresh seeds every generation. Each individual draws
    from its own seed streams, so the outcome only depends on the configuration.

    Parameters:
        hamiltonian: The Hamiltonian.
        config: Optimizer settings.
        spectrum: Oracle spectrum for `P_0` tracking.
        thetas: Explicit initial angles.

    Returns:
        The result.
    """
    config = config or DEConfig()
    engine = CVaREngine(hamiltonian, config.ansatz(hamiltonian.n), config.sampling())
    population = init_population(config, engine, spectrum=spectrum, thetas=thetas)
    trajectory = [_record(0, population)]
    for generation in range(1, config.generations + 1):
        angles = np.stack([individual.theta for individual in population])
        best = int(np.argmin([individual.fitness for individual in population]))
        survivors = []
        for i, parent in enumerate(population):
            trial_theta = propose(i, best, angles, config, np.random.default_rng(seed_stream(config.seed, generation, i, PROPOSE)))
            parent_eval = engine.evaluate(parent.theta, seed_stream(config.seed, generation, i, PARENT))
            trial_eval = engine.evaluate(trial_theta, seed_stream(config.seed, generation, i, TRIAL))
            reevaluated = Individual(
                parent.theta,
                parent_eval.cvar,
                parent_eval.batch,
                parent.best_so_far,
                _ground_probability(parent_eval.batch, spectrum),
            )
            trial = Individual(
                trial_theta,
                trial_eval.cvar,
                trial_eval.batch,
                parent.best_so_far,
                _ground_probability(trial_eval.batch, spectrum),
            )
            survivors.append(select(reevaluated, trial, config.tie_break))
        population = survivors
        record = _record(generation, population)
        trajectory.append(record)
        message = f"Generation {generation}: mean CVaR {record.mean_cvar:.6g}, best {record.best_cvar:.6g}"
        if record.max_p0 is not None:
            message += f", mean P0 {record.mean_p0:.4f}, max P0 {record.max_p0:.4f}"
        log.info(message)

    best = min(population, key=lambda individual: individual.fitness)
    bitstring, energy = best.batch.lowest()
    return FoldResult(
        hamiltonian=hamiltonian,
        config=config,
        best=best,
        population=population,
        trajectory=trajectory,
        histogram=contact_histogram(population, hamiltonian),
        best_bitstring=bitstring,
        best_energy=energy,
    )
