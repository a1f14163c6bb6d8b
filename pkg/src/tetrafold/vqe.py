"""Statevector simulation of the RY/CNOT ansatz, shot sampling and the CVaR objective."""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property, reduce
from typing import TYPE_CHECKING, Union

import numpy as np

from tetrafold.loggers import get_logger

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    from tetrafold.hamiltonian import FoldingHamiltonian

log = get_logger(__name__)

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]

FULL_DIAGONAL_QUBITS = 16
"""Registers up to this size get their whole energy diagonal precomputed."""
ENERGY_CACHE_LIMIT = 1 << 20
"""Most energies cached for larger registers."""

NORM_TOLERANCE = 1e-12


class Entangler(Enum):
    """CNOT pattern between the two rotation layers."""

    RING = "ring"
    """`CNOT(k, k+1)` along the register, closed by `CNOT(n-1, 0)`."""
    ALL_TO_ALL = "all_to_all"
    """`CNOT(a, b)` for every `a < b`."""


@dataclass(frozen=True)
class AnsatzSpec:
    """Hadamards, a rotation layer, an entangling block, a second rotation layer."""

    n: int
    """Number of qubits."""
    entangler: Entangler = Entangler.RING
    """CNOT pattern."""
    layers: int = 2
    """Depth `m`, used to size the optimizer population."""

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"An ansatz needs at least one qubit, got {self.n}")
        if self.layers < 1:
            raise ValueError(f"The depth must be positive, got {self.layers}")

    @property
    def num_parameters(self) -> int:
        """Length `2n` of the angle vector."""
        return 2 * self.n

    def cnot_pairs(self) -> tuple[tuple[int, int], ...]:
        """Control/target pairs of the entangling block, in application order."""
        if self.entangler is Entangler.ALL_TO_ALL:
            return tuple((a, b) for a in range(self.n) for b in range(a + 1, self.n))
        pairs = [(k, k + 1) for k in range(self.n - 1)]
        if self.n >= 3:  # noqa: PLR2004
            pairs.append((self.n - 1, 0))
        return tuple(pairs)

    @cached_property
    def permutation(self) -> NDArray[np.int64]:
        """Source index of each amplitude after the entangling block."""
        sources = np.arange(1 << self.n, dtype=np.int64)
        for control, target in reversed(self.cnot_pairs()):
            control_bit = self.n - 1 - control
            target_bit = self.n - 1 - target
            sources ^= ((sources >> control_bit) & 1) << target_bit
        return sources


def _rotation(angle: float) -> NDArray[np.float64]:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]])


def prepare_state(ansatz: AnsatzSpec, theta: ArrayLike) -> NDArray[np.float64]:
    """Simulate the ansatz on `|0...0>`.

    Parameters:
        ansatz: The ansatz.
        theta: The `2n` angles; the first `n` feed the first rotation layer.

    Returns:
        The `2^n` real amplitudes, qubit 0 being the most significant bit of the index.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (ansatz.num_parameters,):
        raise ValueError(f"Expected {ansatz.num_parameters} angles, got shape {theta.shape}")
    plus = np.full(2, 1 / math.sqrt(2))
    qubits = [_rotation(angle) @ plus for angle in theta[: ansatz.n]]
    state = reduce(np.kron, qubits)[ansatz.permutation]
    tensor = state.reshape((2,) * ansatz.n)
    for qubit, angle in enumerate(theta[ansatz.n :]):
        tensor = np.moveaxis(np.tensordot(_rotation(angle), tensor, axes=([1], [qubit])), 0, qubit)
    return tensor.reshape(-1)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Measurement outcomes, one row per distinct basis state."""

    n: int
    """Number of qubits."""
    indices: NDArray[np.int64]
    """Distinct measured basis indices, ascending."""
    counts: NDArray[np.int64]
    """Multiplicity of each index."""
    energies: NDArray[np.float64] | None = field(default=None)
    """Energy of each index, once scored."""

    @property
    def shots(self) -> int:
        """Total number of shots."""
        return int(self.counts.sum())

    def bitstrings(self) -> list[str]:
        """The distinct outcomes as bitstrings."""
        return [format(int(index), f"0{self.n}b") for index in self.indices]

    def scored(self, energies: NDArray[np.float64]) -> SampleBatch:
        """Attach energies.

        Parameters:
            energies: One energy per distinct index.

        Returns:
            A scored copy.
        """
        if len(energies) != len(self.indices):
            raise ValueError("Expected one energy per distinct outcome")
        return replace(self, energies=np.asarray(energies, dtype=np.float64))

    def shots_at_or_below(self, level: float, tolerance: float = 1e-9) -> int:
        """Shots whose energy does not exceed `level + tolerance`.

        Parameters:
            level: The energy level.
            tolerance: Absolute slack on the comparison.

        Returns:
            A shot count.
        """
        if self.energies is None:
            raise ValueError("The batch has not been scored")
        return int(self.counts[self.energies <= level + tolerance].sum())

    def lowest(self) -> tuple[str, float]:
        """The lowest-energy outcome and its energy."""
        if self.energies is None:
            raise ValueError("The batch has not been scored")
        row = int(np.argmin(self.energies))
        return format(int(self.indices[row]), f"0{self.n}b"), float(self.energies[row])


def _generator(seed: SeedLike) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample(state: NDArray[np.float64], shots: int, seed: SeedLike = None) -> SampleBatch:
    """Draw measurement outcomes from a state.

    Parameters:
        state: Normalized amplitudes.
        shots: Number of shots.
        seed: Seed, seed sequence or generator.

    Returns:
        The batch.
    """
    if shots < 1:
        raise ValueError(f"The number of shots must be positive, got {shots}")
    size = len(state)
    n = size.bit_length() - 1
    if size != 1 << n:
        raise ValueError(f"A state has a power-of-two length, got {size}")
    probabilities = np.abs(state) ** 2
    norm = probabilities.sum()
    if abs(norm - 1) > 1e-9:  # noqa: PLR2004
        raise ValueError(f"The state is not normalized (norm {norm})")
    counts = _generator(seed).multinomial(shots, probabilities / norm)
    indices = np.flatnonzero(counts).astype(np.int64)
    return SampleBatch(n, indices, counts[indices].astype(np.int64))


def tail_size(alpha: float, shots: int) -> int:
    """Number of shots averaged by CVaR.

    Parameters:
        alpha: Tail fraction in `(0, 1]`.
        shots: Number of shots.

    Returns:
        `ceil(alpha * shots)`.
    """
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    return max(1, math.ceil(round(alpha * shots, 9)))


def cvar(batch: SampleBatch, alpha: float) -> float:
    """Mean of the lowest `ceil(alpha * shots)` shot energies.

    Parameters:
        batch: A scored, non-empty batch.
        alpha: Tail fraction in `(0, 1]`.

    Returns:
        The CVaR.
    """
    if batch.energies is None:
        raise ValueError("The batch has not been scored")
    if batch.shots == 0:
        raise ValueError("Cannot compute the CVaR of an empty batch")
    keep = tail_size(alpha, batch.shots)
    order = np.argsort(batch.energies, kind="stable")
    energies = batch.energies[order]
    counts = batch.counts[order]
    before = np.cumsum(counts) - counts
    taken = np.clip(keep - before, 0, counts)
    return float(energies @ taken / keep)


@dataclass(frozen=True)
class CVaRConfig:
    """Sampling settings of the objective."""

    alpha: float = 0.05
    """Tail fraction."""
    shots: int = 1024
    """Shots per evaluation."""
    seed: int = 0
    """Master seed."""

    def __post_init__(self) -> None:
        tail_size(self.alpha, self.shots)
        if self.shots < 1:
            raise ValueError(f"The number of shots must be positive, got {self.shots}")


@dataclass(frozen=True, eq=False)
class Evaluation:
    """One objective evaluation."""

    cvar: float
    batch: SampleBatch


class CVaREngine:
    """Evaluate `theta -> CVaR` for a Hamiltonian, caching energies per basis state."""

    def __init__(
        self,
        hamiltonian: FoldingHamiltonian,
        ansatz: AnsatzSpec,
        config: CVaRConfig | None = None,
        *,
        diagonal_qubits: int = FULL_DIAGONAL_QUBITS,
        cache_limit: int = ENERGY_CACHE_LIMIT,
    ) -> None:
        """Initialize the engine.

        Parameters:
            hamiltonian: The Hamiltonian.
            ansatz: The ansatz; its size must match the Hamiltonian.
            config: Sampling settings.
            diagonal_qubits: Largest register whose full energy diagonal is precomputed.
            cache_limit: Most energies kept for larger registers, least recently used first out.
        """
        if cache_limit < 1:
            raise ValueError(f"The energy cache needs room for one entry, got {cache_limit}")
        if ansatz.n != hamiltonian.n:
            raise ValueError(f"The ansatz has {ansatz.n} qubits, the Hamiltonian {hamiltonian.n}")
        self.hamiltonian = hamiltonian
        self.ansatz = ansatz
        self.config = config or CVaRConfig()
        self._diagonal: NDArray[np.float64] | None = None
        self.cache_limit = cache_limit
        self._cache: OrderedDict[int, float] = OrderedDict()
        if ansatz.n <= diagonal_qubits:
            self._diagonal = hamiltonian.evaluate_indices(np.arange(1 << ansatz.n))
            log.debug(f"Precomputed the {1 << ansatz.n}-entry energy diagonal")

    def energies(self, indices: NDArray[np.int64]) -> NDArray[np.float64]:
        """Energies of basis states.

        Parameters:
            indices: Basis indices.

        Returns:
            The energies.
        """
        if self._diagonal is not None:
            return self._diagonal[indices]
        requested = indices.tolist()
        known = {i: self._cache[i] for i in requested if i in self._cache}
        missing = np.array(sorted(set(requested) - known.keys()), dtype=np.int64)
        if missing.size:
            known.update(zip(missing.tolist(), self.hamiltonian.evaluate_indices(missing).tolist()))
        for i in requested:
            self._cache[i] = known[i]
            self._cache.move_to_end(i)
        while len(self._cache) > self.cache_limit:
            self._cache.popitem(last=False)
        return np.array([known[i] for i in requested], dtype=np.float64)

    @property
    def cache_size(self) -> int:
        """Number of cached energies."""
        return len(self._cache)

    def measure(self, theta: ArrayLike, seed: SeedLike = None) -> SampleBatch:
        """Prepare, sample and score.

        Parameters:
            theta: The angles.
            seed: Sampling seed; defaults to the configured one.

        Returns:
            The scored batch.
        """
        state = prepare_state(self.ansatz, theta)
        batch = sample(state, self.config.shots, self.config.seed if seed is None else seed)
        return batch.scored(self.energies(batch.indices))

    def evaluate(self, theta: ArrayLike, seed: SeedLike = None) -> Evaluation:
        """CVaR of the ansatz at `theta`.

        Parameters:
            theta: The angles.
            seed: Sampling seed; defaults to the configured one.

        Returns:
            The objective value and the batch it came from.
        """
        batch = self.measure(theta, seed)
        return Evaluation(cvar(batch, self.config.alpha), batch)
