"""Tests for the result files."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from tetrafold.artifacts import (
    ArtifactError,
    format_xyz,
    read_hamiltonian,
    read_histogram,
    read_spectrum,
    read_trajectory,
    read_xyz,
    write_hamiltonian,
    write_histogram,
    write_spectrum,
    write_trajectory,
)
from tetrafold.evolution import GenerationRecord, HistogramBin
from tetrafold.hamiltonian import FoldingHamiltonian
from tetrafold.lattice import Peptide, TurnSequence, grow
from tetrafold.oracle import spectrum_of_layout


def test_hamiltonian_export(tmp_path: Path, aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """The JSON export carries the layout, the weights and every Pauli string."""
    json_path, text_path = write_hamiltonian(aprlrfy_hamiltonian, tmp_path)
    meta, pauli = read_hamiltonian(json_path)
    assert meta["n"] == 9
    assert meta["contacts"] == ["q(1)_{1,6}", "q(1)_{2,7}"]
    assert meta["penalties"]["audit_passed"] is True
    assert pauli == aprlrfy_hamiltonian.pauli
    assert meta["term_count"] == len(pauli)
    assert len(text_path.read_text(encoding="utf-8").splitlines()) == len(pauli)


def test_spectrum_export(tmp_path: Path, aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """A spectrum read back has the same levels and representatives."""
    spectrum = spectrum_of_layout(aprlrfy_hamiltonian.layout, aprlrfy_hamiltonian.model)
    restored = read_spectrum(write_spectrum(spectrum, tmp_path / "spectrum.json"))
    assert [e.energy for e in restored] == [e.energy for e in spectrum]
    assert restored.ground.contacts == spectrum.ground.contacts
    assert restored.ground.representative.turns == spectrum.ground.representative.turns


def test_xyz(tmp_path: Path) -> None:
    """Coordinates are written in bond-length units with species labels."""
    peptide = Peptide.from_string("AP[L]RLY")
    conformation = grow(TurnSequence((1, 0, 2, 3), (None, 3, None, None, None)))
    text = format_xyz(conformation, peptide, "test")
    assert text.splitlines()[:2] == ["6", "test"]
    path = tmp_path / "fold.xyz"
    path.write_text(text, encoding="utf-8")
    labels, coordinates = read_xyz(path)
    assert labels == ["A", "P", "L", "R", "L", "Y"]
    assert np.linalg.norm(coordinates[1] - coordinates[0]) == pytest.approx(1.0, abs=1e-6)


def test_trajectory_without_probabilities(tmp_path: Path) -> None:
    """Missing `P0` values come back as `None`."""
    records = [GenerationRecord(0, -1.0, -2.0), GenerationRecord(1, -1.5, -2.5, 0.1, 0.4)]
    restored = read_trajectory(write_trajectory(records, tmp_path / "trajectory.csv"))
    assert restored == records


def test_histogram(tmp_path: Path) -> None:
    """Histogram bins are keyed by contact bitstring."""
    histogram = {"10": HistogramBin(3, 0.75, -4.81), "00": HistogramBin(1, 0.25, 0.0)}
    restored = read_histogram(write_histogram(histogram, tmp_path / "histogram.json"))
    assert list(restored) == ["00", "10"]
    assert restored["10"] == histogram["10"]


def test_corrupt_files(tmp_path: Path) -> None:
    """Missing and malformed files raise artifact errors."""
    with pytest.raises(ArtifactError, match="Missing"):
        read_trajectory(tmp_path / "nothing.csv")
    path = tmp_path / "histogram.json"
    path.write_text(json.dumps({"10": {"shots": 3}}), encoding="utf-8")
    with pytest.raises(ArtifactError, match="Corrupt"):
        read_histogram(path)
    path.write_text("{", encoding="utf-8")
    with pytest.raises(ArtifactError, match="Corrupt"):
        read_spectrum(path)
