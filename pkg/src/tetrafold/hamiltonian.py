"""Construction of the folding Hamiltonian as a pseudo-boolean polynomial.

The Hamiltonian is the sum of four parts:

- a growth constraint forbidding consecutive bonds on the same axis;
- a chirality constraint placing side chains;
- a one-hot constraint for sparse turns;
- the interaction part, in which each contact qubit claims its energy only when the
  distance polynomials confirm the contact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np

from tetrafold.lattice import (
    AXES,
    CHIRALITY_TABLE,
    BeadLike,
    Contact,
    EncodingScheme,
    Peptide,
    RegisterLayout,
    TetrafoldError,
    Turn,
    as_bead,
    build_layout,
    path_bonds,
    separation,
)
from tetrafold.loggers import get_logger
from tetrafold.polynomial import (
    PauliHamiltonian,
    PBPoly,
    evaluate,
    evaluate_batch,
    indices_to_bits,
    resource_report,
    to_pauli,
)

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from tetrafold.interactions import InteractionModel
    from tetrafold.polynomial import ResourceReport

log = get_logger(__name__)


class PenaltyAuditError(TetrafoldError):
    """Penalty weights too weak to keep unphysical contacts from lowering the energy."""

    def __init__(self, audit: PenaltyAudit) -> None:
        """Initialize the error.

        Parameters:
            audit: The failed audit.
        """
        self.audit = audit
        lines = "\n".join(f"  - {inequality}" for inequality in audit.violations)
        super().__init__(f"{len(audit.violations)} penalty inequalities do not hold:\n{lines}")


@lru_cache(maxsize=None)
def indicator_polys(layout: RegisterLayout, turn: Turn) -> tuple[PBPoly, PBPoly, PBPoly, PBPoly]:
    """Turn indicators `f_0..f_3` of a bond as polynomials.

    Parameters:
        layout: The register layout.
        turn: The bond.

    Returns:
        One polynomial per axis.
    """
    register = layout.register(turn)
    bits = [
        PBPoly.variable(qubit) if qubit is not None else PBPoly.constant_term(value)
        for qubit, value in zip(register.qubits, register.fixed)
    ]
    if layout.scheme is EncodingScheme.SPARSE:
        return bits[0], bits[1], bits[2], bits[3]
    high, low = bits
    return (1 - high) * (1 - low), low * (1 - high), high * (1 - low), high * low


@lru_cache(maxsize=None)
def _delta_n(layout: RegisterLayout, axis: int, first: BeadLike, second: BeadLike) -> PBPoly:
    total = PBPoly()
    for bond, coefficient in path_bonds(first, second):
        total = total + coefficient * indicator_polys(layout, bond)[axis]
    return total


def delta_n_poly(axis: int, first: BeadLike, second: BeadLike, layout: RegisterLayout) -> PBPoly:
    """Signed count `Delta n_a` of axis-`a` steps from one bead to another.

    Parameters:
        axis: The axis `a`.
        first: Start bead.
        second: End bead.
        layout: The register layout.

    Returns:
        The polynomial.
    """
    return _delta_n(layout, axis, as_bead(first), as_bead(second))


@lru_cache(maxsize=None)
def _distance(layout: RegisterLayout, first: BeadLike, second: BeadLike) -> PBPoly:
    total = PBPoly()
    for axis in AXES:
        counts = _delta_n(layout, axis, first, second)
        total = total + counts * counts
    return total


def distance_poly(first: BeadLike, second: BeadLike, layout: RegisterLayout) -> PBPoly:
    """Distance index `d = sum_a Delta n_a^2` between two beads.

    Parameters:
        first: A bead.
        second: Another bead.
        layout: The register layout.

    Returns:
        The polynomial.
    """
    low, high = sorted((as_bead(first), as_bead(second)))
    return _distance(layout, low, high)


def same_axis_poly(layout: RegisterLayout, first: Turn, second: Turn) -> PBPoly:
    """`T(i, j)`: 1 when two bonds use the same axis.

    Parameters:
        layout: The register layout.
        first: A bond.
        second: Another bond.

    Returns:
        The polynomial.
    """
    left, right = indicator_polys(layout, first), indicator_polys(layout, second)
    total = PBPoly()
    for axis in AXES:
        total = total + left[axis] * right[axis]
    return total


@dataclass(frozen=True)
class PenaltyConfig:
    """User penalty weights. Unset weights follow the automatic rule.

    With `scale` the largest contact energy magnitude (1 when all vanish):
    `lambda_2 = 10 * scale`, `lambda_3 = lambda_5 = lambda_2`,
    `lambda_1(i, j) = 6 (sep + 1) lambda_2 + |eps_ij| + lambda_2`,
    and `lambda_back = lambda_chirality = lambda_onehot = 50 * scale`.
    """

    lambda_back: float | None = None
    """Weight of the growth constraint."""
    lambda_chirality: float | None = None
    """Weight of the chirality constraint."""
    lambda_onehot: float | None = None
    """Weight of the one-hot constraint (sparse only)."""
    lambda_1: float | None = None
    """Distance weight of every 1-NN bracket; per-pair automatic when unset."""
    lambda_2: float | None = None
    """Overlap weight in 1-NN brackets and distance weight of 2-NN brackets."""
    lambda_3: float | None = None
    """Weight of target distance 3 in 2-NN class brackets."""
    lambda_5: float | None = None
    """Weight of target distance 5 in 2-NN class brackets."""
    enforce_audit: bool = True
    """Raise `PenaltyAuditError` when the dominance inequalities fail."""

    def resolve(self, layout: RegisterLayout, model: InteractionModel) -> PenaltyWeights:
        """Fill unset weights for an instance.

        Parameters:
            layout: The register layout.
            model: The interaction model.

        Returns:
            Concrete weights.
        """
        scale = model.scale(layout.peptide)
        second = self.lambda_2 if self.lambda_2 is not None else 10 * scale
        first_shell = {}
        for contact in layout.contacts:
            if contact.order != 1:
                continue
            if self.lambda_1 is not None:
                first_shell[contact] = self.lambda_1
            else:
                energy = model.pair_energy(layout.peptide, 1, contact.first, contact.second)
                sep = separation(contact.first, contact.second)
                first_shell[contact] = 6 * (sep + 1) * second + abs(energy) + second
        constraint = 50 * scale
        return PenaltyWeights(
            back=self.lambda_back if self.lambda_back is not None else constraint,
            chirality=self.lambda_chirality if self.lambda_chirality is not None else constraint,
            onehot=self.lambda_onehot if self.lambda_onehot is not None else constraint,
            first_shell=first_shell,
            second=second,
            third=self.lambda_3 if self.lambda_3 is not None else second,
            fifth=self.lambda_5 if self.lambda_5 is not None else second,
        )


@dataclass(frozen=True)
class PenaltyWeights:
    """Resolved penalty weights of an instance."""

    back: float
    chirality: float
    onehot: float
    first_shell: Mapping[Contact, float]
    """`lambda_1` per 1-NN contact."""
    second: float
    third: float
    fifth: float

    def target(self, distance: int) -> float:
        """Weight of a 2-NN class target distance.

        Parameters:
            distance: 3 or 5.

        Returns:
            `lambda_3` or `lambda_5`.
        """
        return self.third if distance == 3 else self.fifth  # noqa: PLR2004


@dataclass(frozen=True)
class Inequality:
    """One checked inequality `lhs > rhs`."""

    description: str
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        """Whether the inequality is satisfied."""
        return self.lhs > self.rhs

    @property
    def margin(self) -> float:
        """`lhs - rhs`."""
        return self.lhs - self.rhs

    def __str__(self) -> str:
        return f"{self.description}: {self.lhs:.6g} > {self.rhs:.6g}"


@dataclass(frozen=True)
class PenaltyAudit:
    """Dominance inequalities of an instance."""

    inequalities: tuple[Inequality, ...]

    @property
    def violations(self) -> tuple[Inequality, ...]:
        """Inequalities that fail."""
        return tuple(inequality for inequality in self.inequalities if not inequality.holds)

    @property
    def passed(self) -> bool:
        """Whether every inequality holds."""
        return not self.violations


def _second_shell_pairs(layout: RegisterLayout) -> list[tuple[int, int]]:
    return sorted({(c.first.position, c.second.position) for c in layout.contacts if c.order == 2})  # noqa: PLR2004


def attached_second_shell(layout: RegisterLayout, model: InteractionModel) -> dict[Contact, float]:
    """2-NN energies carried by 1-NN contact qubits (a neighbor of `j` touching `i`).

    Parameters:
        layout: The register layout.
        model: The interaction model.

    Returns:
        Extra energy per 1-NN contact.
    """
    attached: dict[Contact, float] = {}
    for i, j in _second_shell_pairs(layout):
        energy = model.pair_energy(layout.peptide, 2, i, j)
        for neighbor in layout.peptide.neighbors(j):
            contact = layout.first_shell_contact(i, neighbor)
            if contact is not None:
                attached[contact] = attached.get(contact, 0.0) + energy
    return attached


def audit_penalties(layout: RegisterLayout, model: InteractionModel, weights: PenaltyWeights) -> PenaltyAudit:
    """Check the dominance inequalities that keep off-contact brackets positive.

    Parameters:
        layout: The register layout.
        model: The interaction model.
        weights: The resolved weights.

    Returns:
        The audit.
    """
    inequalities = [
        Inequality("lambda_back positive", weights.back, 0.0),
        Inequality("lambda_2 positive", weights.second, 0.0),
    ]
    if layout.peptide.has_side_chains:
        inequalities.append(Inequality("lambda_chirality positive", weights.chirality, 0.0))
    if layout.scheme is EncodingScheme.SPARSE:
        inequalities.append(Inequality("lambda_onehot positive", weights.onehot, 0.0))
    attached = attached_second_shell(layout, model)
    for contact, weight in weights.first_shell.items():
        energy = model.pair_energy(layout.peptide, 1, contact.first, contact.second)
        sep = separation(contact.first, contact.second)
        bound = 6 * (sep + 1) * weights.second + abs(energy) + abs(attached.get(contact, 0.0))
        inequalities.append(Inequality(f"lambda_1 of {contact}", weight, bound))
    for i, j in _second_shell_pairs(layout):
        energy = model.pair_energy(layout.peptide, 2, i, j)
        smallest = min(weights.second, weights.third, weights.fifth)
        inequalities.append(Inequality(f"2-NN weights of ({i},{j})", 4 * smallest, abs(energy)))
    return PenaltyAudit(tuple(inequalities))


def build_hgc(layout: RegisterLayout, weights: PenaltyWeights) -> PBPoly:
    """Growth constraint: penalize consecutive bonds on the same axis, side-chain bonds included.

    Parameters:
        layout: The register layout.
        weights: The penalty weights.

    Returns:
        The polynomial.
    """
    peptide = layout.peptide
    pairs = [(Turn(k), Turn(k + 1)) for k in range(1, len(peptide) - 1)]
    for position in range(2, len(peptide)):
        if peptide.has_side_chain(position):
            pairs.append((Turn(position - 1), Turn(position, side=True)))
            pairs.append((Turn(position), Turn(position, side=True)))
    total = PBPoly()
    for first, second in pairs:
        total = total + same_axis_poly(layout, first, second)
    return weights.back * total


def build_hch(layout: RegisterLayout, weights: PenaltyWeights) -> PBPoly:
    """Chirality constraint: each side chain must take the axis the table requires.

    Parameters:
        layout: The register layout.
        weights: The penalty weights.

    Returns:
        The polynomial; zero without side chains.
    """
    total = PBPoly()
    peptide = layout.peptide
    for position in range(2, len(peptide)):
        if not peptide.has_side_chain(position):
            continue
        previous = indicator_polys(layout, Turn(position - 1))
        current = indicator_polys(layout, Turn(position))
        side = indicator_polys(layout, Turn(position, side=True))
        expected = [PBPoly() for _ in AXES]
        for (a, b), required in CHIRALITY_TABLE.items():
            if position % 2 == 0:
                expected[required] = expected[required] + previous[a] * current[b]
            else:
                expected[required] = expected[required] + current[a] * previous[b]
        for axis in AXES:
            total = total + (1 - side[axis]) * expected[axis]
    return weights.chirality * total


def build_honehot(layout: RegisterLayout, weights: PenaltyWeights) -> PBPoly:
    """One-hot constraint on every free sparse turn.

    Parameters:
        layout: The register layout.
        weights: The penalty weights.

    Returns:
        The polynomial.
    """
    if layout.scheme is not EncodingScheme.SPARSE:
        raise ValueError("The one-hot constraint only applies to the sparse encoding")
    total = PBPoly()
    for register in layout.registers:
        if not register.free_qubits:
            continue
        ones = PBPoly()
        for qubit, value in zip(register.qubits, register.fixed):
            ones = ones + (PBPoly.variable(qubit) if qubit is not None else value)
        excess = ones - 1
        total = total + excess * excess
    return weights.onehot * total


def first_shell_bracket(
    layout: RegisterLayout,
    contact: Contact,
    energy: float,
    weights: PenaltyWeights,
) -> PBPoly:
    """Energy claimed by a 1-NN contact qubit, before multiplying by the qubit.

    Parameters:
        layout: The register layout.
        contact: The 1-NN contact.
        energy: Its energy.
        weights: The penalty weights.

    Returns:
        `eps + lambda_1 (d - 1) + lambda_2 * sum (2 - d)` over the chain neighbors of both ends.
    """
    peptide = layout.peptide
    first, second = contact.first, contact.second
    overlap = PBPoly()
    for neighbor in peptide.neighbors(second):
        overlap = overlap + (2 - distance_poly(first, neighbor, layout))
    for neighbor in peptide.neighbors(first):
        overlap = overlap + (2 - distance_poly(neighbor, second, layout))
    distance = distance_poly(first, second, layout)
    return energy + weights.first_shell[contact] * (distance - 1) + weights.second * overlap


def build_h1(layout: RegisterLayout, model: InteractionModel, weights: PenaltyWeights) -> PBPoly:
    """Nearest-neighbour interactions.

    Parameters:
        layout: The register layout.
        model: The interaction model.
        weights: The penalty weights.

    Returns:
        The polynomial.
    """
    total = PBPoly()
    for contact in layout.contacts:
        if contact.order != 1:
            continue
        energy = model.pair_energy(layout.peptide, 1, contact.first, contact.second)
        qubit = PBPoly.variable(layout.contact_index(contact))
        total = total + qubit * first_shell_bracket(layout, contact, energy, weights)
    return total


def build_h2(layout: RegisterLayout, model: InteractionModel, weights: PenaltyWeights) -> PBPoly:
    """Second-nearest-neighbour interactions.

    A pair whose common neighbour is a chain neighbour of `j` is credited through the existing
    1-NN qubit. Otherwise a class qubit per neighbourhood geometry claims the energy when its
    target distances hold exactly, guarded against the 1-NN qubits of the same neighbours.

    Parameters:
        layout: The register layout.
        model: The interaction model.
        weights: The penalty weights.

    Returns:
        The polynomial.
    """
    if model.max_l < 2 or layout.max_l < 2:  # noqa: PLR2004
        return PBPoly()
    peptide = layout.peptide
    total = PBPoly()
    for contact, energy in attached_second_shell(layout, model).items():
        total = total + energy * PBPoly.variable(layout.contact_index(contact))
    for contact in layout.contacts:
        if contact.order != 2:  # noqa: PLR2004
            continue
        first, second = contact.first, contact.second
        energy = model.pair_energy(peptide, 2, first, second)
        deviation = distance_poly(first, second, layout) - 2
        bracket = energy + weights.second * (deviation * deviation)
        guard = PBPoly.variable(layout.contact_index(contact))
        for neighbor, target in zip(peptide.neighbors(second), contact.targets):
            miss = distance_poly(first, neighbor, layout) - target
            bracket = bracket + weights.target(target) * (miss * miss)
            partner = layout.first_shell_contact(first, neighbor)
            if partner is not None:
                guard = guard * (1 - PBPoly.variable(layout.contact_index(partner)))
        total = total + guard * bracket
    return total


@dataclass(frozen=True, eq=False)
class FoldingHamiltonian:
    """An assembled instance: polynomial, register layout, weights and audit."""

    layout: RegisterLayout
    model: InteractionModel
    weights: PenaltyWeights
    audit: PenaltyAudit
    polynomial: PBPoly
    """The full Hamiltonian."""
    parts: Mapping[str, PBPoly] = field(default_factory=dict)
    """Its named contributions (`growth`, `chirality`, `onehot`, `first_shell`, `second_shell`)."""

    @property
    def n(self) -> int:
        """Number of qubits."""
        return self.layout.n

    def evaluate(self, bits: Sequence[int] | str) -> float:
        """Energy of a full assignment.

        Parameters:
            bits: `n` bits.

        Returns:
            The energy.
        """
        return evaluate(self.polynomial, bits, self.n)

    def evaluate_batch(self, bits: NDArray[np.integer]) -> NDArray[np.float64]:
        """Energies of many assignments.

        Parameters:
            bits: A `(batch, n)` bit array.

        Returns:
            The energies.
        """
        return evaluate_batch(self.polynomial, bits, self.n)

    def evaluate_indices(self, indices: NDArray[np.integer] | Sequence[int]) -> NDArray[np.float64]:
        """Energies of basis states given by index.

        Parameters:
            indices: Big-endian basis indices.

        Returns:
            The energies.
        """
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size == 0:
            return np.zeros(0)
        return self.evaluate_batch(indices_to_bits(indices, self.n))

    @cached_property
    def pauli(self) -> PauliHamiltonian:
        """The Z-Pauli expansion."""
        return to_pauli(self.polynomial)

    def resources(self) -> ResourceReport:
        """Term count and locality of the Pauli form."""
        return resource_report(self.pauli)


def assemble(
    peptide: Peptide,
    scheme: EncodingScheme,
    model: InteractionModel,
    config: PenaltyConfig | None = None,
    *,
    q6_saving: bool | None = None,
) -> FoldingHamiltonian:
    """Build the Hamiltonian of an instance.

    Parameters:
        peptide: The peptide.
        scheme: Turn encoding.
        model: The interaction model; its `max_l` sets the interaction order.
        config: Penalty overrides.
        q6_saving: See [`build_layout`][tetrafold.lattice.build_layout].

    Returns:
        The assembled Hamiltonian.
    """
    config = config or PenaltyConfig()
    layout = build_layout(peptide, scheme, model.max_l, q6_saving)
    weights = config.resolve(layout, model)
    audit = audit_penalties(layout, model, weights)
    if not audit.passed:
        if config.enforce_audit:
            raise PenaltyAuditError(audit)
        log.warning(f"{len(audit.violations)} penalty inequalities fail; off-contact energies may go negative")
    parts = {
        "growth": build_hgc(layout, weights),
        "chirality": build_hch(layout, weights),
        "first_shell": build_h1(layout, model, weights),
        "second_shell": build_h2(layout, model, weights),
    }
    if scheme is EncodingScheme.SPARSE:
        parts["onehot"] = build_honehot(layout, weights)
    polynomial = PBPoly()
    for part in parts.values():
        polynomial = polynomial + part
    log.info(
        f"{peptide} ({scheme.value}, l<={model.max_l}): {layout.n} qubits, "
        f"{len(polynomial)} polynomial terms of degree <= {polynomial.degree}",
    )
    return FoldingHamiltonian(layout, model, weights, audit, polynomial, parts)
