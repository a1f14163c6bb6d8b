"""Tetrahedral-lattice geometry, turn encodings and qubit register layouts.

Beads are numbered from 1 along the main chain. Bead `k` sits on sublattice B when `k` is odd
and on sublattice A when `k` is even, bead 1 being at the origin. The bond leaving bead `k`
towards bead `k + 1` follows axis `t_k`, read as `u_{t_k}` from an A site and `-u_{t_k}`
from a B site. Coordinates are kept as integers in units of `1/sqrt(3)` bond lengths.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import combinations, product
from typing import TYPE_CHECKING, Iterator, NamedTuple, Sequence, Union

import numpy as np

from tetrafold.loggers import get_logger

if TYPE_CHECKING:
    from numpy.typing import NDArray

log = get_logger(__name__)

AXES = (0, 1, 2, 3)
"""The four tetrahedral axes."""

TETRAHEDRAL_VECTORS: NDArray[np.int64] = np.array(
    [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]],
    dtype=np.int64,
)
"""Bond directions `u_0..u_3` scaled by `sqrt(3)`."""

BOND_SQUARED = 3
"""Squared bond length in scaled units."""

FIXED_TURNS = (1, 0)
"""Turns `t_1` (read as 1 barred) and `t_2`, fixed to remove the global rotations."""

CHIRALITY_TABLE: dict[tuple[int, int], int] = {
    (0, 1): 2,
    (0, 2): 3,
    (0, 3): 1,
    (1, 0): 3,
    (1, 2): 0,
    (1, 3): 2,
    (2, 0): 1,
    (2, 1): 3,
    (2, 3): 0,
    (3, 0): 2,
    (3, 1): 0,
    (3, 2): 1,
}
"""Side-chain axis required at an even bead, keyed by `(t_{i-1}, t_i)`. Odd beads use the transpose."""

INVALID_TURN = -1
"""Marker for a decoded sparse turn that is not one-hot."""

AMINO_ACIDS = frozenset("ACDEFGHIKLMNPQRSTVWY")

_BEAD_PATTERN = re.compile(r"([A-Z])(?:\[([A-Z])\])?")


class TetrafoldError(Exception):
    """Base class for the errors raised by `tetrafold`."""


class LayoutError(TetrafoldError):
    """Invalid peptide or unsupported register layout."""


class Bead(NamedTuple):
    """A bead of the chain: main-chain bead `position`, or its side-chain bead when `side` is set."""

    position: int
    """1-based main-chain position."""
    side: bool = False
    """Whether this is the side-chain bead attached at `position`."""

    def __str__(self) -> str:
        return f"{self.position}^(1)" if self.side else str(self.position)


class Turn(NamedTuple):
    """A bond of the chain: main turn `position` (bead k to k+1) or the side turn of bead `position`."""

    position: int
    """1-based position of the bead the bond leaves."""
    side: bool = False
    """Whether the bond leads to the side-chain bead."""

    def __str__(self) -> str:
        return f"t{self.position}^(1)" if self.side else f"t{self.position}"


BeadLike = Union[Bead, int]


def as_bead(bead: BeadLike) -> Bead:
    """Accept plain integers as main-chain beads.

    Parameters:
        bead: A bead or a main-chain position.

    Returns:
        The bead.
    """
    return bead if isinstance(bead, Bead) else Bead(int(bead))


def separation(first: BeadLike, second: BeadLike) -> int:
    """Number of bonds between two beads along the chain.

    Parameters:
        first: A bead.
        second: Another bead.

    Returns:
        The chain separation, counting side-chain bonds.
    """
    first, second = as_bead(first), as_bead(second)
    if first.position == second.position:
        return int(first.side != second.side)
    return abs(second.position - first.position) + first.side + second.side


@dataclass(frozen=True)
class Peptide:
    """A coarse-grained peptide: main-chain species plus optional one-bead side chains."""

    main_chain: tuple[str, ...]
    """One-letter species of the main-chain beads."""
    side_chains: tuple[str | None, ...] = ()
    """Per-position side-chain species, `None` when absent. Empty means no side chains at all."""

    def __post_init__(self) -> None:
        if not self.side_chains:
            object.__setattr__(self, "side_chains", (None,) * len(self.main_chain))
        if len(self.main_chain) < 4:  # noqa: PLR2004
            raise LayoutError(f"A peptide needs at least 4 beads, got {len(self.main_chain)}")
        if len(self.side_chains) != len(self.main_chain):
            raise LayoutError("Side-chain annotations must cover every main-chain position")
        if self.side_chains[0] is not None or self.side_chains[-1] is not None:
            raise LayoutError("Terminal beads cannot carry side chains")
        for species in (*self.main_chain, *(s for s in self.side_chains if s is not None)):
            if species not in AMINO_ACIDS:
                raise LayoutError(f"Unknown residue code: {species!r}")

    @classmethod
    def from_string(cls, text: str) -> Peptide:
        """Parse a sequence such as `APR[L]LRFY`, where `R[L]` carries a side-chain bead of species `L`.

        Parameters:
            text: The annotated one-letter sequence.

        Returns:
            The peptide.
        """
        compact = "".join(text.split()).upper()
        main: list[str] = []
        side: list[str | None] = []
        position = 0
        while position < len(compact):
            match = _BEAD_PATTERN.match(compact, position)
            if not match:
                raise LayoutError(f"Cannot parse sequence {text!r} at position {position}")
            main.append(match.group(1))
            side.append(match.group(2))
            position = match.end()
        return cls(tuple(main), tuple(side))

    def __str__(self) -> str:
        return "".join(m if s is None else f"{m}[{s}]" for m, s in zip(self.main_chain, self.side_chains))

    def __len__(self) -> int:
        return len(self.main_chain)

    def has_side_chain(self, position: int) -> bool:
        """Tell whether the main-chain bead at `position` carries a side chain.

        Parameters:
            position: 1-based position.

        Returns:
            Whether a side chain is attached.
        """
        return self.side_chains[position - 1] is not None

    @property
    def has_side_chains(self) -> bool:
        """Whether any bead carries a side chain."""
        return any(s is not None for s in self.side_chains)

    def beads(self) -> tuple[Bead, ...]:
        """All beads in chain order, each side-chain bead right after its host."""
        beads: list[Bead] = []
        for position in range(1, len(self) + 1):
            beads.append(Bead(position))
            if self.has_side_chain(position):
                beads.append(Bead(position, side=True))
        return tuple(beads)

    def species(self, bead: BeadLike) -> str:
        """Species of a bead.

        Parameters:
            bead: The bead.

        Returns:
            Its one-letter code.
        """
        bead = as_bead(bead)
        if bead.side:
            species = self.side_chains[bead.position - 1]
            if species is None:
                raise LayoutError(f"Bead {bead.position} has no side chain")
            return species
        return self.main_chain[bead.position - 1]

    def neighbors(self, bead: BeadLike) -> tuple[Bead, ...]:
        """Chain neighbors of a bead: `{i-1, i+1, i^(1)}` for main beads, the host for side beads.

        Parameters:
            bead: The bead.

        Returns:
            The bonded beads.
        """
        bead = as_bead(bead)
        if bead.side:
            return (Bead(bead.position),)
        found = []
        if bead.position > 1:
            found.append(Bead(bead.position - 1))
        if bead.position < len(self):
            found.append(Bead(bead.position + 1))
        if self.has_side_chain(bead.position):
            found.append(Bead(bead.position, side=True))
        return tuple(found)


class EncodingScheme(Enum):
    """How a turn is written on qubits."""

    SPARSE = "sparse"
    """One-hot over four qubits, bit `a` set for axis `a`."""
    DENSE = "dense"
    """Binary over two qubits `(q', q'')`, axis `2q' + q''`."""

    @property
    def qubits_per_turn(self) -> int:
        """Number of qubits per turn."""
        return 4 if self is EncodingScheme.SPARSE else 2

    def bits_for(self, axis: int) -> tuple[int, ...]:
        """Bits encoding an axis.

        Parameters:
            axis: The axis.

        Returns:
            The turn bits.
        """
        if self is EncodingScheme.SPARSE:
            return tuple(int(a == axis) for a in AXES)
        return (axis >> 1, axis & 1)


def turn_indicator(axis: int, bits: Sequence[int], scheme: EncodingScheme) -> int:
    """Evaluate the turn indicator `f_a` on the bits of one turn.

    Parameters:
        axis: The axis `a`.
        bits: The turn's own bits (2 for dense, 4 for sparse).
        scheme: The encoding.

    Returns:
        1 if the turn uses axis `a`, else 0.
    """
    if len(bits) != scheme.qubits_per_turn:
        raise ValueError(f"Expected {scheme.qubits_per_turn} bits per turn, got {len(bits)}")
    if scheme is EncodingScheme.SPARSE:
        return int(bits[axis])
    high, low = int(bits[0]), int(bits[1])
    return (
        (1 - high) * (1 - low),
        low * (1 - high),
        high * (1 - low),
        high * low,
    )[axis]


def required_side_turn(position: int, previous: int, current: int) -> int | None:
    """Side-chain axis imposed by chirality at a bead.

    Parameters:
        position: Host bead position.
        previous: Turn `t_{i-1}`.
        current: Turn `t_i`.

    Returns:
        The required axis, or `None` when the main chain backtracks.
    """
    if previous == current:
        return None
    key = (previous, current) if position % 2 == 0 else (current, previous)
    return CHIRALITY_TABLE[key]


def _axis_label(position: int, axis: int) -> str:
    if axis == INVALID_TURN:
        return "?"
    return f"{axis}̄" if position % 2 else str(axis)


@dataclass(frozen=True)
class TurnSequence:
    """Turns of a conformation, main chain first then side chains."""

    main: tuple[int, ...]
    """Turns `t_1..t_{N-1}`; odd positions are read as barred axes."""
    side: tuple[int | None, ...] = ()
    """Side-chain turn of each main bead (`None` without a side chain). Empty means no side chains."""

    def __post_init__(self) -> None:
        if not self.side:
            object.__setattr__(self, "side", (None,) * (len(self.main) + 1))
        if len(self.side) != len(self.main) + 1:
            raise ValueError("Side-chain turns must cover every main-chain bead")

    @property
    def length(self) -> int:
        """Number of main-chain beads."""
        return len(self.main) + 1

    @property
    def is_valid(self) -> bool:
        """Whether every turn decoded to an axis."""
        return INVALID_TURN not in self.main and INVALID_TURN not in self.side

    def turn(self, turn: Turn) -> int:
        """Axis of a bond.

        Parameters:
            turn: The bond.

        Returns:
            Its axis (or `INVALID_TURN`).
        """
        if turn.side:
            axis = self.side[turn.position - 1]
            if axis is None:
                raise KeyError(f"No side chain at bead {turn.position}")
            return axis
        return self.main[turn.position - 1]

    def backtracks(self) -> bool:
        """Whether two consecutive bonds share an axis, folding the chain back onto itself."""
        if any(a == b for a, b in zip(self.main, self.main[1:])):
            return True
        for position, axis in enumerate(self.side, start=1):
            if axis is None:
                continue
            if axis in (self.main[position - 2], self.main[position - 1]):
                return True
        return False

    def chirality_ok(self) -> bool:
        """Whether every side-chain turn matches the chirality table."""
        for position, axis in enumerate(self.side, start=1):
            if axis is None:
                continue
            if axis != required_side_turn(position, self.main[position - 2], self.main[position - 1]):
                return False
        return True

    def __str__(self) -> str:
        main = " ".join(_axis_label(k, a) for k, a in enumerate(self.main, start=1))
        sides = [f"{k}:{_axis_label(k, a)}" for k, a in enumerate(self.side, start=1) if a is not None]
        return f"{main} | {' '.join(sides)}" if sides else main


def _bond_vector(position: int, axis: int) -> NDArray[np.int64]:
    sign = 1 if position % 2 == 0 else -1
    return sign * TETRAHEDRAL_VECTORS[axis]


def index_from_squared(squared: int) -> int:
    """Convert a scaled squared distance (`3 r^2`) into the distance index `d`.

    Parameters:
        squared: Squared distance in scaled units.

    Returns:
        The index `d`, using `3 r^2 = 4d - s^2` with `s^2 = d mod 2`.
    """
    return (squared + 1) // 4


def euclidean_from_index(index: int) -> float:
    """Through-space distance, in bond units, of a distance index.

    Parameters:
        index: The index `d`.

    Returns:
        The distance `sqrt((4d - (d mod 2)) / 3)`.
    """
    return math.sqrt((4 * index - index % 2) / 3)


@dataclass(frozen=True, eq=False)
class Conformation:
    """A grown chain: the turns plus integer lattice coordinates of every bead."""

    turns: TurnSequence
    """The turns it was grown from."""
    beads: tuple[Bead, ...]
    """Beads in chain order."""
    coordinates: NDArray[np.int64] = field(repr=False)
    """Scaled integer coordinates, one row per bead."""

    @cached_property
    def _rows(self) -> dict[Bead, int]:
        return {bead: row for row, bead in enumerate(self.beads)}

    def position(self, bead: BeadLike) -> NDArray[np.int64]:
        """Scaled coordinates of a bead.

        Parameters:
            bead: The bead.

        Returns:
            A 3-vector.
        """
        return self.coordinates[self._rows[as_bead(bead)]]

    @staticmethod
    def sublattice(bead: BeadLike) -> str:
        """Sublattice tag of a bead.

        Parameters:
            bead: The bead.

        Returns:
            `"A"` or `"B"`.
        """
        bead = as_bead(bead)
        even = bead.position % 2 == 0
        return "A" if even != bead.side else "B"

    def squared_distance(self, first: BeadLike, second: BeadLike) -> int:
        """Squared distance between two beads, in scaled units (a bond is 3).

        Parameters:
            first: A bead.
            second: Another bead.

        Returns:
            The squared distance.
        """
        delta = self.position(first) - self.position(second)
        return int(delta @ delta)

    def distance(self, first: BeadLike, second: BeadLike) -> float:
        """Euclidean distance in bond units.

        Parameters:
            first: A bead.
            second: Another bead.

        Returns:
            The distance.
        """
        return math.sqrt(self.squared_distance(first, second) / BOND_SQUARED)

    def is_self_avoiding(self) -> bool:
        """Whether no two beads share a site."""
        return len({tuple(row) for row in self.coordinates.tolist()}) == len(self.beads)

    def cartesian(self) -> NDArray[np.float64]:
        """Coordinates in bond units."""
        return self.coordinates / math.sqrt(BOND_SQUARED)


def grow(turns: TurnSequence) -> Conformation:
    """Place every bead on the lattice.

    Parameters:
        turns: A valid turn sequence.

    Returns:
        The conformation. Overlaps are allowed.
    """
    if not turns.is_valid:
        raise ValueError(f"Cannot grow an invalid turn sequence: {turns}")
    beads: list[Bead] = []
    rows: list[NDArray[np.int64]] = []
    current = np.zeros(3, dtype=np.int64)
    for position in range(1, turns.length + 1):
        beads.append(Bead(position))
        rows.append(current)
        side_axis = turns.side[position - 1]
        if side_axis is not None:
            beads.append(Bead(position, side=True))
            rows.append(current + _bond_vector(position, side_axis))
        if position < turns.length:
            current = current + _bond_vector(position, turns.main[position - 1])
    return Conformation(turns, tuple(beads), np.array(rows, dtype=np.int64))


def axis_counts(turns: TurnSequence, first: BeadLike, second: BeadLike) -> NDArray[np.int64]:
    """Signed axis counts `Delta n_a` between two beads, computed from the turns alone.

    Parameters:
        turns: The turn sequence.
        first: Start bead.
        second: End bead.

    Returns:
        The 4-vector `x` such that the displacement is `sum_a x_a u_a`.
    """
    counts = np.zeros(4, dtype=np.int64)
    for bond, coefficient in path_bonds(first, second):
        counts[turns.turn(bond)] += coefficient
    return counts


def path_bonds(first: BeadLike, second: BeadLike) -> tuple[tuple[Turn, int], ...]:
    """Bonds separating two beads with their signed contribution to `Delta n`.

    Parameters:
        first: Start bead.
        second: End bead.

    Returns:
        Pairs `(bond, coefficient)` with `Delta n_a = sum coefficient * f_a(bond)`.
    """
    first, second = as_bead(first), as_bead(second)
    bonds: list[tuple[Turn, int]] = []
    low, high = sorted((first.position, second.position))
    direction = 1 if second.position >= first.position else -1
    bonds.extend((Turn(k), direction * (-1) ** k) for k in range(low, high))
    if second.side:
        bonds.append((Turn(second.position, side=True), (-1) ** second.position))
    if first.side:
        bonds.append((Turn(first.position, side=True), -((-1) ** first.position)))
    return tuple(bonds)


def distance_index(conformation: Conformation, first: BeadLike, second: BeadLike) -> int:
    """Distance index `d = sum_a Delta n_a^2` between two beads.

    Parameters:
        conformation: The conformation.
        first: A bead.
        second: Another bead.

    Returns:
        The index `d`.
    """
    counts = axis_counts(conformation.turns, first, second)
    return int(counts @ counts)


class TurnRegister(NamedTuple):
    """Qubits holding one turn; fixed bits have no qubit."""

    turn: Turn
    """The bond."""
    qubits: tuple[int | None, ...]
    """Qubit index of each bit, `None` when the bit is fixed."""
    fixed: tuple[int, ...]
    """Value of each fixed bit (0 for free bits)."""

    @property
    def free_qubits(self) -> tuple[int, ...]:
        """Indices of the free bits."""
        return tuple(q for q in self.qubits if q is not None)

    def bits(self, assignment: Sequence[int]) -> tuple[int, ...]:
        """Read the turn's bits from a full assignment.

        Parameters:
            assignment: Bits indexed by qubit.

        Returns:
            The turn bits.
        """
        return tuple(int(assignment[q]) if q is not None else v for q, v in zip(self.qubits, self.fixed))


class Contact(NamedTuple):
    """An interaction qubit: an l-th nearest-neighbour contact, optionally restricted to a geometry class."""

    order: int
    """Interaction order `l`."""
    first: Bead
    """Earlier bead."""
    second: Bead
    """Later bead."""
    targets: tuple[int, ...] = ()
    """Target distance indices of the chain neighbors of `second` (2-NN classes only)."""

    def __str__(self) -> str:
        label = f"q({self.order})_{{{self.first},{self.second}}}"
        return label + (f"[{','.join(map(str, self.targets))}]" if self.targets else "")


def _class_targets(arity: int) -> Iterator[tuple[int, ...]]:
    for targets in product((3, 5), repeat=arity):
        if targets.count(5) <= 1 and targets.count(3) <= 2:  # noqa: PLR2004
            yield targets


def admissible_contacts(peptide: Peptide, max_l: int) -> tuple[Contact, ...]:
    """Contacts that can be realized on the lattice.

    Parameters:
        peptide: The peptide.
        max_l: Highest interaction order.

    Returns:
        Contacts sorted by `(order, first, second, targets)`.
    """
    contacts = [
        Contact(1, first, second)
        for first, second in combinations(peptide.beads(), 2)
        if first.position != second.position and separation(first, second) >= 5 and separation(first, second) % 2  # noqa: PLR2004
    ]
    if max_l >= 2:  # noqa: PLR2004
        for i, j in combinations(range(1, len(peptide) + 1), 2):
            if j - i >= 4 and (j - i) % 2 == 0:  # noqa: PLR2004
                arity = len(peptide.neighbors(j))
                contacts.extend(Contact(2, Bead(i), Bead(j), targets) for targets in _class_targets(arity))
    return tuple(sorted(contacts))


@dataclass(frozen=True)
class RegisterLayout:
    """Assignment of configuration and contact qubits to indices."""

    peptide: Peptide
    """The peptide."""
    scheme: EncodingScheme
    """The turn encoding."""
    max_l: int
    """Highest interaction order."""
    q6_saving: bool
    """Whether the second bit of turn 3 is pinned to 1."""
    registers: tuple[TurnRegister, ...]
    """Turn registers in chain order."""
    contacts: tuple[Contact, ...]
    """Contact qubits, in qubit order."""
    n_conf: int
    """Number of configuration qubits."""

    @property
    def n_int(self) -> int:
        """Number of interaction qubits."""
        return len(self.contacts)

    @property
    def n(self) -> int:
        """Total number of qubits."""
        return self.n_conf + self.n_int

    @cached_property
    def _registers(self) -> dict[Turn, TurnRegister]:
        return {register.turn: register for register in self.registers}

    @cached_property
    def _contacts(self) -> dict[Contact, int]:
        return {contact: self.n_conf + k for k, contact in enumerate(self.contacts)}

    def register(self, turn: Turn) -> TurnRegister:
        """Register of a bond.

        Parameters:
            turn: The bond.

        Returns:
            Its register.
        """
        return self._registers[turn]

    def conf_index(self, turn: Turn) -> tuple[int, ...]:
        """Free qubit indices of a bond.

        Parameters:
            turn: The bond.

        Returns:
            The indices (empty for fixed turns).
        """
        return self._registers[turn].free_qubits

    def contact_index(self, contact: Contact) -> int:
        """Qubit index of a contact.

        Parameters:
            contact: The contact.

        Returns:
            The index.
        """
        return self._contacts[contact]

    def has_contact(self, contact: Contact) -> bool:
        """Tell whether a contact has a qubit.

        Parameters:
            contact: The contact.

        Returns:
            Whether it is in the layout.
        """
        return contact in self._contacts

    def first_shell_contact(self, first: BeadLike, second: BeadLike) -> Contact | None:
        """The 1-NN contact between two beads, if admissible.

        Parameters:
            first: A bead.
            second: Another bead.

        Returns:
            The contact or `None`.
        """
        low, high = sorted((as_bead(first), as_bead(second)))
        contact = Contact(1, low, high)
        return contact if contact in self._contacts else None

    def free_turn_values(self, turn: Turn) -> tuple[int, ...]:
        """Axes a turn can take on this register.

        Parameters:
            turn: The bond.

        Returns:
            Axes whose encoding matches the fixed bits.
        """
        register = self._registers[turn]
        return tuple(
            axis
            for axis in AXES
            if all(q is not None or b == v for b, q, v in zip(self.scheme.bits_for(axis), register.qubits, register.fixed))
        )

    def contact_bits(self, bits: Sequence[int] | str) -> str:
        """Interaction part of a full bitstring.

        Parameters:
            bits: A full assignment.

        Returns:
            The contact bitstring, in contact-qubit order.
        """
        return "".join(str(int(b)) for b in list(bits)[self.n_conf : self.n])


def build_layout(
    peptide: Peptide,
    scheme: EncodingScheme,
    max_l: int = 1,
    q6_saving: bool | None = None,  # noqa: FBT001
) -> RegisterLayout:
    """Lay out the qubit registers of an instance.

    Configuration qubits come first in chain order (main turn `k`, then the side turn of bead `k`),
    then the contact qubits sorted by `(l, first, second, class)`.

    Parameters:
        peptide: The peptide.
        scheme: Turn encoding.
        max_l: Highest interaction order, 1 or 2.
        q6_saving: Pin the second bit of turn 3 (dense only). `None` enables it when bead 2 has no side chain.

    Returns:
        The layout.
    """
    if max_l not in (1, 2):
        raise LayoutError(f"Unsupported interaction order: {max_l} (expected 1 or 2)")
    dense = scheme is EncodingScheme.DENSE
    if q6_saving is None:
        q6_saving = dense and not peptide.has_side_chain(2)
    if q6_saving and not dense:
        raise LayoutError("The turn-3 qubit saving only applies to the dense encoding")
    if q6_saving and peptide.has_side_chain(2):
        raise LayoutError("The turn-3 qubit saving breaks the chirality of a side chain on bead 2")

    registers: list[TurnRegister] = []
    next_qubit = 0

    def free_register(turn: Turn, pinned: dict[int, int] | None = None) -> TurnRegister:
        nonlocal next_qubit
        pinned = pinned or {}
        qubits: list[int | None] = []
        fixed: list[int] = []
        for bit in range(scheme.qubits_per_turn):
            if bit in pinned:
                qubits.append(None)
                fixed.append(pinned[bit])
            else:
                qubits.append(next_qubit)
                fixed.append(0)
                next_qubit += 1
        return TurnRegister(turn, tuple(qubits), tuple(fixed))

    for position in range(1, len(peptide)):
        if position <= len(FIXED_TURNS):
            bits = scheme.bits_for(FIXED_TURNS[position - 1])
            registers.append(TurnRegister(Turn(position), (None,) * len(bits), bits))
        elif position == 3 and q6_saving:  # noqa: PLR2004
            registers.append(free_register(Turn(position), {1: 1}))
        else:
            registers.append(free_register(Turn(position)))
        if peptide.has_side_chain(position):
            registers.append(free_register(Turn(position, side=True)))

    layout = RegisterLayout(
        peptide=peptide,
        scheme=scheme,
        max_l=max_l,
        q6_saving=bool(q6_saving),
        registers=tuple(registers),
        contacts=admissible_contacts(peptide, max_l),
        n_conf=next_qubit,
    )
    log.debug(f"{peptide}: {layout.n_conf} configuration + {layout.n_int} interaction qubits ({scheme.value})")
    return layout


def _as_bits(bitstring: Sequence[int] | str) -> list[int]:
    bits = [int(b) for b in bitstring]
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"Not a bitstring: {bitstring!r}")
    return bits


def _read_axis(bits: tuple[int, ...], scheme: EncodingScheme) -> int:
    if scheme is EncodingScheme.SPARSE:
        return bits.index(1) if sum(bits) == 1 else INVALID_TURN
    return 2 * bits[0] + bits[1]


def decode(bitstring: Sequence[int] | str, layout: RegisterLayout) -> TurnSequence:
    """Read the turns out of a bitstring.

    Parameters:
        bitstring: Configuration bits (contact bits, if present, are ignored).
        layout: The register layout.

    Returns:
        The turns; non-one-hot sparse turns are marked `INVALID_TURN`.
    """
    bits = _as_bits(bitstring)
    if len(bits) not in (layout.n_conf, layout.n):
        raise ValueError(f"Expected {layout.n_conf} configuration bits, got {len(bits)}")
    length = len(layout.peptide)
    main = [INVALID_TURN] * (length - 1)
    side: list[int | None] = [None] * length
    for register in layout.registers:
        axis = _read_axis(register.bits(bits), layout.scheme)
        if register.turn.side:
            side[register.turn.position - 1] = axis
        else:
            main[register.turn.position - 1] = axis
    return TurnSequence(tuple(main), tuple(side))


def encode(turns: TurnSequence, layout: RegisterLayout) -> tuple[int, ...]:
    """Write turns onto the configuration register.

    Parameters:
        turns: The turns.
        layout: The register layout.

    Returns:
        The `n_conf` configuration bits.
    """
    if turns.length != len(layout.peptide):
        raise ValueError(f"Turns describe {turns.length} beads, the layout {len(layout.peptide)}")
    bits = [0] * layout.n_conf
    for register in layout.registers:
        axis = turns.turn(register.turn)
        for bit, qubit, fixed in zip(layout.scheme.bits_for(axis), register.qubits, register.fixed):
            if qubit is not None:
                bits[qubit] = bit
            elif bit != fixed:
                raise ValueError(f"Turn {register.turn} = {axis} is not representable on this layout")
    return tuple(bits)
