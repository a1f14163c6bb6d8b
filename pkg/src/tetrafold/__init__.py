"""Tetrafold package.

Protein folding on the tetrahedral lattice: qubit encodings, Hamiltonians, an exact oracle and a CVaR-VQE optimizer.
"""

from __future__ import annotations

from tetrafold.evolution import DEConfig, FoldResult, TieBreak, run
from tetrafold.hamiltonian import FoldingHamiltonian, PenaltyAuditError, PenaltyConfig, assemble
from tetrafold.interactions import InteractionModel
from tetrafold.lattice import (
    Conformation,
    EncodingScheme,
    LayoutError,
    Peptide,
    RegisterLayout,
    TetrafoldError,
    TurnSequence,
    build_layout,
    decode,
    encode,
    grow,
)
from tetrafold.oracle import EnumerationLimitError, certify, enumerate_spectrum, ground_truth_probability
from tetrafold.polynomial import PauliHamiltonian, PBPoly, to_pauli
from tetrafold.vqe import AnsatzSpec, CVaRConfig, CVaREngine, cvar, prepare_state, sample

__all__: list[str] = [
    "AnsatzSpec",
    "CVaRConfig",
    "CVaREngine",
    "Conformation",
    "DEConfig",
    "EncodingScheme",
    "EnumerationLimitError",
    "FoldResult",
    "FoldingHamiltonian",
    "InteractionModel",
    "LayoutError",
    "PBPoly",
    "PauliHamiltonian",
    "PenaltyAuditError",
    "PenaltyConfig",
    "Peptide",
    "RegisterLayout",
    "TetrafoldError",
    "TieBreak",
    "TurnSequence",
    "assemble",
    "build_layout",
    "certify",
    "cvar",
    "decode",
    "encode",
    "enumerate_spectrum",
    "ground_truth_probability",
    "grow",
    "prepare_state",
    "run",
    "sample",
    "to_pauli",
]
