"""Pairwise interaction energies: Miyazawa-Jernigan contact matrices and contact-map overrides."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Mapping, Union

import numpy as np
import pandas as pd

from tetrafold.lattice import AMINO_ACIDS, BeadLike, Peptide, TetrafoldError, admissible_contacts, as_bead
from tetrafold.loggers import get_logger

if TYPE_CHECKING:
    from os import PathLike

log = get_logger(__name__)

PathType = Union[str, "PathLike[str]", Path]

_MJ_RESOURCE = "mj_contact_energies.csv"
_CONTACT_MAP_COLUMNS = ("i", "j", "l", "epsilon")


class InteractionError(TetrafoldError):
    """Unusable interaction matrix or contact map."""


def _validate_matrix(matrix: pd.DataFrame, source: str) -> pd.DataFrame:
    matrix = matrix.copy()
    matrix.index = matrix.index.map(lambda code: str(code).strip().upper())
    matrix.columns = matrix.columns.map(lambda code: str(code).strip().upper())
    if set(matrix.index) != set(matrix.columns):
        raise InteractionError(f"{source}: row and column residue codes differ")
    unknown = set(matrix.index) - AMINO_ACIDS
    if unknown:
        raise InteractionError(f"{source}: unknown residue codes {sorted(unknown)}")
    codes = sorted(matrix.index)
    matrix = matrix.loc[codes, codes].astype(float)
    values = matrix.to_numpy()
    matrix = pd.DataFrame(np.where(np.isnan(values), values.T, values), index=codes, columns=codes)
    if matrix.isna().to_numpy().any():
        raise InteractionError(f"{source}: missing entries even after mirroring the triangle")
    if (matrix.to_numpy() != matrix.T.to_numpy()).any():
        raise InteractionError(f"{source}: matrix is not symmetric")
    if (matrix.to_numpy() > 0).any():
        raise InteractionError(f"{source}: repulsive (positive) energies cannot be encoded by contact qubits")
    return matrix


def load_contact_matrix(path: PathType | None = None) -> pd.DataFrame:
    """Read a residue-residue energy matrix keyed by one-letter codes.

    A lower (or upper) triangle is enough; the missing half is mirrored.

    Parameters:
        path: CSV file with a header row of codes and codes in the first column.
            Defaults to the bundled Miyazawa-Jernigan contact energies.

    Returns:
        The symmetric matrix.
    """
    if path is None:
        with resources.files("tetrafold").joinpath("data", _MJ_RESOURCE).open("r", encoding="utf-8") as file:
            matrix = pd.read_csv(file, index_col=0)
        source = _MJ_RESOURCE
    else:
        matrix = pd.read_csv(path, index_col=0)
        source = str(path)
    matrix = _validate_matrix(matrix, source)
    log.debug(f"Loaded {len(matrix)}x{len(matrix)} contact energies from {source}")
    return matrix


def load_contact_map(path: PathType) -> dict[tuple[int, int, int], float]:
    """Read per-pair energy overrides from CSV rows `i,j,l,epsilon`.

    Parameters:
        path: The CSV file.

    Returns:
        Energies keyed by `(l, i, j)` with `i < j`.
    """
    frame = pd.read_csv(path)
    missing = set(_CONTACT_MAP_COLUMNS) - set(frame.columns)
    if missing:
        raise InteractionError(f"{path}: missing columns {sorted(missing)}")
    overrides: dict[tuple[int, int, int], float] = {}
    for row in frame.itertuples(index=False):
        i, j = sorted((int(row.i), int(row.j)))
        order = int(row.l)
        if i == j or order not in (1, 2):
            raise InteractionError(f"{path}: invalid contact ({row.i}, {row.j}, l={row.l})")
        overrides[(order, i, j)] = float(row.epsilon)
    return overrides


@dataclass(frozen=True, eq=False)
class InteractionModel:
    """Contact energies by interaction order. Attractive contacts are negative."""

    first_shell: pd.DataFrame | None = None
    """Energies of touching residues, by species. `None` means zero."""
    second_shell: pd.DataFrame | None = None
    """Energies of second-nearest neighbours. `None` falls back to `first_shell`."""
    max_l: int = 1
    """Highest interaction order."""
    overrides: Mapping[tuple[int, int, int], float] = field(default_factory=dict)
    """Per-pair energies keyed by `(l, i, j)` on main-chain positions; they replace matrix values."""

    def __post_init__(self) -> None:
        if self.max_l not in (1, 2):
            raise InteractionError(f"Unsupported interaction order: {self.max_l}")
        for key, value in self.overrides.items():
            if value > 0:
                raise InteractionError(f"Contact {key} is repulsive ({value}); only attractive energies are supported")
            if not math.isfinite(value):
                raise InteractionError(f"Contact {key} has a non-finite energy")

    @classmethod
    def miyazawa_jernigan(cls, max_l: int = 1, second_shell: pd.DataFrame | None = None) -> InteractionModel:
        """The bundled Miyazawa-Jernigan model.

        Parameters:
            max_l: Highest interaction order.
            second_shell: Optional distinct energies for second-nearest neighbours.

        Returns:
            The model.
        """
        return cls(load_contact_matrix(), second_shell, max_l)

    @classmethod
    def from_contact_map(cls, overrides: Mapping[tuple[int, int, int], float], max_l: int | None = None) -> InteractionModel:
        """A model made only of explicit contacts, every other pair at zero.

        Parameters:
            overrides: Energies keyed by `(l, i, j)`.
            max_l: Highest interaction order; defaults to the highest order in the map.

        Returns:
            The model.
        """
        order = max_l if max_l is not None else max((key[0] for key in overrides), default=1)
        return cls(None, None, order, dict(overrides))

    def epsilon(self, order: int, first: str, second: str) -> float:
        """Species energy of an order-`l` contact.

        Parameters:
            order: Interaction order.
            first: Species of one bead.
            second: Species of the other.

        Returns:
            The energy.
        """
        matrix = self.first_shell if order == 1 or self.second_shell is None else self.second_shell
        if order > self.max_l or matrix is None:
            return 0.0
        return float(matrix.at[first, second])

    def pair_energy(self, peptide: Peptide, order: int, first: BeadLike, second: BeadLike) -> float:
        """Energy of an order-`l` contact between two beads of a peptide.

        Parameters:
            peptide: The peptide.
            order: Interaction order.
            first: A bead.
            second: Another bead.

        Returns:
            The override when present, else the species energy.
        """
        low, high = sorted((as_bead(first), as_bead(second)))
        if order > self.max_l:
            return 0.0
        if not low.side and not high.side:
            key = (order, low.position, high.position)
            if key in self.overrides:
                return self.overrides[key]
        return self.epsilon(order, peptide.species(low), peptide.species(high))

    def scale(self, peptide: Peptide) -> float:
        """Largest energy magnitude over the peptide's admissible contacts.

        Parameters:
            peptide: The peptide.

        Returns:
            The scale, or 1 when every energy vanishes.
        """
        magnitudes = [
            abs(self.pair_energy(peptide, contact.order, contact.first, contact.second))
            for contact in admissible_contacts(peptide, self.max_l)
        ]
        largest = max(magnitudes, default=0.0)
        if largest == 0.0:
            log.warning(f"All interaction energies vanish for {peptide}; penalties use unit scale")
            return 1.0
        return largest
