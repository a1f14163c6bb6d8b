"""Brute-force ground truth: enumerate conformations, score them geometrically, certify Hamiltonians."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import TYPE_CHECKING, Iterator, Sequence

import numpy as np

from tetrafold.hamiltonian import assemble, attached_second_shell
from tetrafold.lattice import (
    FIXED_TURNS,
    Contact,
    Conformation,
    EncodingScheme,
    Peptide,
    RegisterLayout,
    TetrafoldError,
    Turn,
    TurnSequence,
    build_layout,
    decode,
    encode,
    grow,
    index_from_squared,
    required_side_turn,
)
from tetrafold.loggers import get_logger
from tetrafold.polynomial import bits_to_index, indices_to_bits

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from tetrafold.hamiltonian import FoldingHamiltonian, PenaltyConfig
    from tetrafold.interactions import InteractionModel

log = get_logger(__name__)

DEFAULT_ENUMERATION_CAP = 4**9
"""Largest turn space enumerated without an explicit cap."""

ENERGY_TOLERANCE = 1e-9
"""Tolerance when comparing Hamiltonian and geometric energies."""

PROBABILITY_TOLERANCE = 1e-6
"""Tolerance when matching sampled energies to spectrum levels."""

FULL_SWEEP_QUBITS = 20
"""Registers up to this size are swept exhaustively by `certify`."""

SAMPLED_ASSIGNMENTS = 1 << 16

_CONTACT_SQUARED = 3
_SECOND_SHELL_SQUARED = 8


class EnumerationLimitError(TetrafoldError):
    """The turn space exceeds the enumeration cap."""


@dataclass(frozen=True)
class ScoredConformation:
    """A conformation with its geometric energy and the contact qubits that should be set."""

    conformation: Conformation
    energy: float
    contacts: tuple[Contact, ...]
    """Contact qubits set in the lowest-energy completion, in layout order."""
    contact_bits: str
    self_avoiding: bool


@dataclass(frozen=True, eq=False)
class SpectrumEntry:
    """One energy level, split by contact pattern and self-avoidance."""

    energy: float
    degeneracy: int
    """Number of turn sequences in the level."""
    representative: Conformation
    """The first conformation met in the level."""
    contacts: tuple[Contact, ...]
    contact_bits: str
    self_avoiding: bool
    distinct: int = 1
    """Number of conformations left once axis relabelings are identified."""

    @property
    def contact_set(self) -> tuple[tuple[str, str, int], ...]:
        """Realized contacts as `(first, second, l)`."""
        return tuple((str(c.first), str(c.second), c.order) for c in self.contacts)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Energy levels of an instance, sorted by energy."""

    layout: RegisterLayout
    entries: tuple[SpectrumEntry, ...]

    def __iter__(self) -> Iterator[SpectrumEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def ground(self) -> SpectrumEntry:
        """The lowest self-avoiding entry."""
        for entry in self.entries:
            if entry.self_avoiding:
                return entry
        raise EnumerationLimitError("No self-avoiding conformation was enumerated")

    @property
    def levels(self) -> tuple[float, ...]:
        """Distinct self-avoiding energies, ascending. Level 0 is the ground fold."""
        levels: list[float] = []
        for entry in self.entries:
            if entry.self_avoiding and not any(abs(entry.energy - level) <= ENERGY_TOLERANCE for level in levels):
                levels.append(entry.energy)
        return tuple(sorted(levels))

    @property
    def total(self) -> int:
        """Number of enumerated turn sequences."""
        return sum(entry.degeneracy for entry in self.entries)


def _main_turn_choices(layout: RegisterLayout) -> list[tuple[int, ...]]:
    choices = [(axis,) for axis in FIXED_TURNS]
    for position in range(len(FIXED_TURNS) + 1, len(layout.peptide)):
        choices.append(layout.free_turn_values(Turn(position)))
    return choices[: len(layout.peptide) - 1]


def turn_space_size(layout: RegisterLayout) -> int:
    """Number of main-chain turn assignments the layout admits, backtracking included.

    Parameters:
        layout: The register layout.

    Returns:
        The size.
    """
    return math.prod(len(values) for values in _main_turn_choices(layout))


def iter_turn_sequences(layout: RegisterLayout) -> Iterator[TurnSequence]:
    """Yield every non-backtracking turn sequence, side chains placed by chirality.

    Parameters:
        layout: The register layout.

    Yields:
        Turn sequences in lexicographic order of the main turns.
    """
    peptide = layout.peptide
    for main in product(*_main_turn_choices(layout)):
        if any(a == b for a, b in zip(main, main[1:])):
            continue
        side: list[int | None] = [None] * len(peptide)
        for position in range(2, len(peptide)):
            if peptide.has_side_chain(position):
                side[position - 1] = required_side_turn(position, main[position - 2], main[position - 1])
        yield TurnSequence(tuple(main), tuple(side))


def canonical_key(turns: TurnSequence) -> tuple[int, ...]:
    """Relabel axes by order of first appearance so that symmetric conformations share a key.

    Parameters:
        turns: The turns.

    Returns:
        The relabeled main turns followed by the relabeled side turns (-1 where absent).
    """
    labels: dict[int, int] = {}
    key: list[int] = []
    for axis in (*turns.main, *turns.side):
        if axis is None:
            key.append(-1)
            continue
        key.append(labels.setdefault(axis, len(labels)))
    return tuple(key)


def score_conformation(
    conformation: Conformation,
    layout: RegisterLayout,
    model: InteractionModel,
    attached: dict[Contact, float] | None = None,
) -> ScoredConformation:
    """Geometric energy of a conformation and the contact qubits it should set.

    Parameters:
        conformation: The conformation.
        layout: The register layout.
        model: The interaction model.
        attached: Precomputed 2-NN energies carried by 1-NN qubits.

    Returns:
        The scored conformation.
    """
    peptide = layout.peptide
    attached = attached_second_shell(layout, model) if attached is None else attached
    squared = conformation.squared_distance
    energy = 0.0
    active: set[Contact] = set()
    seen_pairs: set[tuple[int, int]] = set()
    for contact in layout.contacts:
        if contact.order == 1:
            if squared(contact.first, contact.second) != _CONTACT_SQUARED:
                continue
            epsilon = model.pair_energy(peptide, 1, contact.first, contact.second)
            energy += epsilon
            if epsilon + attached.get(contact, 0.0) < 0:
                active.add(contact)
            continue
        pair = (contact.first.position, contact.second.position)
        if squared(contact.first, contact.second) != _SECOND_SHELL_SQUARED:
            continue
        neighbors = peptide.neighbors(contact.second)
        if pair not in seen_pairs:
            seen_pairs.add(pair)
            energy += model.pair_energy(peptide, 2, contact.first, contact.second)
        touching = any(
            layout.first_shell_contact(contact.first, r) is not None and squared(contact.first, r) == _CONTACT_SQUARED
            for r in neighbors
        )
        if touching or model.pair_energy(peptide, 2, contact.first, contact.second) >= 0:
            continue
        distances = tuple(index_from_squared(squared(contact.first, r)) for r in neighbors)
        if distances == contact.targets:
            active.add(contact)
    contacts = tuple(c for c in layout.contacts if c in active)
    bits = "".join("1" if c in active else "0" for c in layout.contacts)
    return ScoredConformation(conformation, energy, contacts, bits, conformation.is_self_avoiding())


def iter_scored(
    layout: RegisterLayout,
    model: InteractionModel,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Iterator[ScoredConformation]:
    """Grow and score every non-backtracking conformation of a layout.

    Parameters:
        layout: The register layout.
        model: The interaction model.
        cap: Largest turn space allowed.

    Yields:
        Scored conformations.
    """
    size = turn_space_size(layout)
    if size > cap:
        raise EnumerationLimitError(f"{layout.peptide}: {size} turn assignments exceed the cap of {cap}")
    attached = attached_second_shell(layout, model)
    for turns in iter_turn_sequences(layout):
        yield score_conformation(grow(turns), layout, model, attached)


def enumerate_spectrum(
    peptide: Peptide,
    scheme: EncodingScheme,
    model: InteractionModel,
    *,
    q6_saving: bool | None = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Spectrum:
    """Exact spectrum of an instance over the turns its register can express.

    Parameters:
        peptide: The peptide.
        scheme: Turn encoding.
        model: The interaction model.
        q6_saving: See [`build_layout`][tetrafold.lattice.build_layout].
        cap: Largest turn space allowed.

    Returns:
        The spectrum, overlapping conformations included as separate levels.
    """
    layout = build_layout(peptide, scheme, model.max_l, q6_saving)
    return spectrum_of_layout(layout, model, cap)


def spectrum_of_layout(layout: RegisterLayout, model: InteractionModel, cap: int = DEFAULT_ENUMERATION_CAP) -> Spectrum:
    """Exact spectrum over a prepared layout.

    Parameters:
        layout: The register layout.
        model: The interaction model.
        cap: Largest turn space allowed.

    Returns:
        The spectrum.
    """
    groups: dict[tuple[float, str, bool], list[ScoredConformation]] = {}
    keys: dict[tuple[float, str, bool], set[tuple[int, ...]]] = {}
    for scored in iter_scored(layout, model, cap):
        level = (round(scored.energy, 9), scored.contact_bits, scored.self_avoiding)
        groups.setdefault(level, []).append(scored)
        keys.setdefault(level, set()).add(canonical_key(scored.conformation.turns))
    entries = [
        SpectrumEntry(
            energy=members[0].energy,
            degeneracy=len(members),
            representative=members[0].conformation,
            contacts=members[0].contacts,
            contact_bits=bits,
            self_avoiding=avoiding,
            distinct=len(keys[(energy, bits, avoiding)]),
        )
        for (energy, bits, avoiding), members in groups.items()
    ]
    entries.sort(key=lambda entry: (entry.energy, not entry.self_avoiding, entry.contact_bits))
    spectrum = Spectrum(layout, tuple(entries))
    log.info(f"{layout.peptide}: {spectrum.total} conformations in {len(entries)} levels")
    if not any(entry.self_avoiding for entry in entries):
        log.warning(f"{layout.peptide}: no self-avoiding conformation found")
    return spectrum


@dataclass(frozen=True)
class Counterexample:
    """A bitstring on which the Hamiltonian disagrees with the geometry."""

    bitstring: str
    reason: str
    expected: float
    found: float

    def __str__(self) -> str:
        return f"{self.bitstring}: {self.reason} (expected {self.expected:.9g}, found {self.found:.9g})"


@dataclass(frozen=True)
class Certificate:
    """Outcome of checking a Hamiltonian against the enumerated geometry."""

    ground_energy: float
    checked: int
    """Number of self-avoiding conformations compared."""
    exhaustive: bool
    """Whether every assignment was swept, rather than a random sample."""
    mismatches: tuple[Counterexample, ...] = ()
    """Self-avoiding conformations whose minimum energy or contact set differs from the geometry."""
    violations_below_ground: tuple[Counterexample, ...] = ()
    """Constraint-violating assignments scoring at or below the ground energy."""
    overlaps_below_ground: int = 0
    """Overlapping, non-backtracking conformations scoring below the ground energy."""
    violation_margin: float = field(default=math.inf)
    """Smallest gap between a constraint-violating assignment and the ground energy."""

    @property
    def passed(self) -> bool:
        """Whether no mismatch nor violation was found."""
        return not self.mismatches and not self.violations_below_ground

    @property
    def counterexample(self) -> Counterexample | None:
        """The first failure, if any."""
        failures = self.mismatches + self.violations_below_ground
        return failures[0] if failures else None


def _bitstring(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def _zero_claim_mask(layout: RegisterLayout, model: InteractionModel, attached: dict[Contact, float]) -> int:
    mask = 0
    peptide = layout.peptide
    for k, contact in enumerate(layout.contacts):
        if contact.order == 1:
            claimed = model.pair_energy(peptide, 1, contact.first, contact.second) + attached.get(contact, 0.0)
        else:
            claimed = model.pair_energy(peptide, 2, contact.first, contact.second)
        if claimed == 0:
            mask |= 1 << (layout.n_int - 1 - k)
    return mask


def _violates_constraints(turns: TurnSequence) -> bool:
    return not turns.is_valid or turns.backtracks() or not turns.chirality_ok()


def certify_hamiltonian(
    hamiltonian: FoldingHamiltonian,
    *,
    cap: int = DEFAULT_ENUMERATION_CAP,
    seed: int = 0,
) -> Certificate:
    """Compare an assembled Hamiltonian with the geometric energies of its conformations.

    For every self-avoiding conformation, the minimum over the contact register must equal the
    geometric energy and be reached at the expected contact bits. Every constraint-violating
    assignment must score strictly above the ground energy.

    Parameters:
        hamiltonian: The Hamiltonian.
        cap: Largest turn space allowed.
        seed: Seed of the random assignments checked on large registers.

    Returns:
        The certificate.
    """
    layout, model = hamiltonian.layout, hamiltonian.model
    if layout.n_int > FULL_SWEEP_QUBITS:
        raise EnumerationLimitError(f"{layout.n_int} contact qubits are too many to minimize exhaustively")
    attached = attached_second_shell(layout, model)
    free_mask = _zero_claim_mask(layout, model, attached)
    completions = np.arange(1 << layout.n_int, dtype=np.int64)

    mismatches: list[Counterexample] = []
    overlaps: list[float] = []
    ground = math.inf
    checked = 0
    for scored in iter_scored(layout, model, cap):
        prefix = bits_to_index(encode(scored.conformation.turns, layout)) << layout.n_int
        energies = hamiltonian.evaluate_indices(prefix + completions)
        lowest = float(energies.min())
        if not scored.self_avoiding:
            overlaps.append(lowest)
            continue
        checked += 1
        ground = min(ground, scored.energy)
        expected = int(scored.contact_bits or "0", 2)
        bitstring = _bitstring(encode(scored.conformation.turns, layout)) + scored.contact_bits
        if abs(lowest - scored.energy) > ENERGY_TOLERANCE:
            mismatches.append(Counterexample(bitstring, "minimum differs from the geometric energy", scored.energy, lowest))
            continue
        if abs(energies[expected] - scored.energy) > ENERGY_TOLERANCE:
            mismatches.append(
                Counterexample(bitstring, "expected contacts do not reach the minimum", scored.energy, energies[expected]),
            )
            continue
        ties = completions[energies <= lowest + ENERGY_TOLERANCE]
        wrong = ties[((ties ^ expected) & ~free_mask) != 0]
        if wrong.size:
            found = _bitstring(encode(scored.conformation.turns, layout)) + format(int(wrong[0]), f"0{layout.n_int}b")
            mismatches.append(Counterexample(found, "another contact set reaches the minimum", scored.energy, lowest))

    violations, margin, exhaustive = _check_violations(hamiltonian, ground, seed)
    certificate = Certificate(
        ground_energy=ground,
        checked=checked,
        exhaustive=exhaustive,
        mismatches=tuple(mismatches),
        violations_below_ground=tuple(violations),
        overlaps_below_ground=sum(1 for energy in overlaps if energy < ground - ENERGY_TOLERANCE),
        violation_margin=margin,
    )
    outcome = "passed" if certificate.passed else "failed"
    log.info(
        f"Certificate {outcome}: {checked} conformations, {len(mismatches)} mismatches, "
        f"{len(violations)} violations below ground {ground:.6g}",
    )
    if certificate.overlaps_below_ground:
        log.warning(f"{certificate.overlaps_below_ground} overlapping conformations score below the ground energy")
    return certificate


def _check_violations(
    hamiltonian: FoldingHamiltonian,
    ground: float,
    seed: int,
) -> tuple[list[Counterexample], float, bool]:
    layout = hamiltonian.layout
    violations: list[Counterexample] = []
    margin = math.inf
    if layout.n <= FULL_SWEEP_QUBITS:
        completions = np.arange(1 << layout.n_int, dtype=np.int64)
        for configuration in range(1 << layout.n_conf):
            conf_bits = format(configuration, f"0{layout.n_conf}b") if layout.n_conf else ""
            if not _violates_constraints(decode(conf_bits, layout)):
                continue
            energies = hamiltonian.evaluate_indices((configuration << layout.n_int) + completions)
            lowest = int(np.argmin(energies))
            margin = min(margin, float(energies[lowest]) - ground)
            if energies[lowest] <= ground + ENERGY_TOLERANCE:
                bitstring = conf_bits + (format(lowest, f"0{layout.n_int}b") if layout.n_int else "")
                violations.append(Counterexample(bitstring, "constraint violation at or below ground", ground, energies[lowest]))
        return violations, margin, True

    rng = np.random.default_rng(seed)
    indices = rng.integers(0, 1 << layout.n, size=SAMPLED_ASSIGNMENTS, dtype=np.int64)
    bits = indices_to_bits(indices, layout.n)
    energies = hamiltonian.evaluate_batch(bits)
    for row, energy in zip(bits, energies):
        if not _violates_constraints(decode(row[: layout.n_conf].tolist(), layout)):
            continue
        margin = min(margin, float(energy) - ground)
        if energy <= ground + ENERGY_TOLERANCE:
            violations.append(Counterexample(_bitstring(row), "constraint violation at or below ground", ground, energy))
    return violations, margin, False


def certify(
    peptide: Peptide,
    scheme: EncodingScheme,
    model: InteractionModel,
    config: PenaltyConfig | None = None,
    *,
    q6_saving: bool | None = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
    seed: int = 0,
) -> Certificate:
    """Assemble an instance and certify it.

    Parameters:
        peptide: The peptide.
        scheme: Turn encoding.
        model: The interaction model.
        config: Penalty overrides.
        q6_saving: See [`build_layout`][tetrafold.lattice.build_layout].
        cap: Largest turn space allowed.
        seed: Seed of the random assignments checked on large registers.

    Returns:
        The certificate.
    """
    hamiltonian = assemble(peptide, scheme, model, config, q6_saving=q6_saving)
    return certify_hamiltonian(hamiltonian, cap=cap, seed=seed)


@dataclass(frozen=True)
class FoldProbabilities:
    """Sampled probability of each spectrum level."""

    levels: tuple[float, ...]
    """Level energies, ascending."""
    probabilities: tuple[float, ...]
    """`P_f` for each level."""
    remainder: float
    """Probability of energies matching no self-avoiding level."""

    @property
    def ground(self) -> float:
        """`P_0`."""
        return self.probabilities[0] if self.probabilities else 0.0


def level_probabilities(
    energies: NDArray[np.float64] | Sequence[float],
    counts: NDArray[np.integer] | Sequence[int],
    levels: Sequence[float],
) -> FoldProbabilities:
    """Frequencies of spectrum levels in a scored batch.

    Parameters:
        energies: Energy of each distinct sampled bitstring.
        counts: Multiplicity of each bitstring.
        levels: Spectrum level energies.

    Returns:
        The probabilities.
    """
    energies = np.asarray(energies, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("Cannot compute probabilities of an empty batch")
    probabilities = tuple(
        float(counts[np.abs(energies - level) <= PROBABILITY_TOLERANCE].sum() / total) for level in levels
    )
    return FoldProbabilities(tuple(levels), probabilities, max(0.0, 1.0 - sum(probabilities)))


def ground_truth_probability(
    samples: Sequence[str],
    spectrum: Spectrum,
    hamiltonian: FoldingHamiltonian,
) -> FoldProbabilities:
    """Fraction of samples landing on each fold of the spectrum.

    Parameters:
        samples: Measured bitstrings, under the spectrum's layout.
        spectrum: The oracle spectrum.
        hamiltonian: The Hamiltonian scoring the samples.

    Returns:
        `P_f` per level, plus the remainder.
    """
    if not samples:
        raise ValueError("No samples given")
    distinct, counts = np.unique(np.asarray([bits_to_index(s) for s in samples], dtype=np.int64), return_counts=True)
    return level_probabilities(hamiltonian.evaluate_indices(distinct), counts, spectrum.levels)
