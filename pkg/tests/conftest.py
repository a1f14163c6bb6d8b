"""Configuration for the pytest test suite."""

from __future__ import annotations

import pytest

from tetrafold.hamiltonian import FoldingHamiltonian, assemble
from tetrafold.interactions import InteractionModel
from tetrafold.lattice import EncodingScheme, Peptide
from tests import APRLRFY


@pytest.fixture(scope="session")
def mj_model() -> InteractionModel:
    """Return the bundled Miyazawa-Jernigan model, nearest neighbours only."""
    return InteractionModel.miyazawa_jernigan()


@pytest.fixture(scope="session")
def mj_model_second_shell() -> InteractionModel:
    """Return the bundled Miyazawa-Jernigan model with second-nearest neighbours."""
    return InteractionModel.miyazawa_jernigan(max_l=2)


@pytest.fixture(scope="session")
def aprlrfy() -> Peptide:
    """Return the 7-residue benchmark peptide."""
    return Peptide.from_string(APRLRFY)


@pytest.fixture(scope="session")
def aprlrfy_hamiltonian(aprlrfy: Peptide, mj_model: InteractionModel) -> FoldingHamiltonian:
    """Return the dense 9-qubit Hamiltonian of APRLRFY."""
    return assemble(aprlrfy, EncodingScheme.DENSE, mj_model)
