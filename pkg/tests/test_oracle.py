"""Tests for the brute-force oracle and the Hamiltonian certificate."""

from __future__ import annotations

import dataclasses
from itertools import combinations

import numpy as np
import pytest

from tetrafold.hamiltonian import FoldingHamiltonian, PenaltyConfig, assemble
from tetrafold.interactions import InteractionModel, load_contact_map
from tetrafold.lattice import (
    EncodingScheme,
    Peptide,
    TurnSequence,
    build_layout,
    distance_index,
    grow,
    separation,
)
from tetrafold.oracle import (
    EnumerationLimitError,
    canonical_key,
    certify,
    certify_hamiltonian,
    enumerate_spectrum,
    ground_truth_probability,
    iter_turn_sequences,
    level_probabilities,
    spectrum_of_layout,
    turn_space_size,
)
from tetrafold.polynomial import PBPoly
from tests import ANGIOTENSIN, APRLRFY, FIXTURES_DIR


def test_four_beads_have_one_level(mj_model: InteractionModel) -> None:
    """Without admissible contacts every fold scores 0."""
    spectrum = enumerate_spectrum(Peptide.from_string("AAAA"), EncodingScheme.SPARSE, mj_model)
    assert len(spectrum) == 1
    assert spectrum.ground.energy == 0
    assert spectrum.ground.contact_bits == ""
    assert spectrum.total == 3


def test_benchmark_spectrum(aprlrfy: Peptide, mj_model: InteractionModel) -> None:
    """APRLRFY folds around the A-F contact, as a mirror pair."""
    spectrum = enumerate_spectrum(aprlrfy, EncodingScheme.DENSE, mj_model)
    ground = spectrum.ground
    assert ground.energy == pytest.approx(-4.81)
    assert ground.contact_bits == "10"
    assert ground.contact_set == (("1", "6", 1),)
    assert ground.degeneracy == 2
    assert 1 <= ground.distinct <= ground.degeneracy
    assert spectrum.levels[:2] == pytest.approx((-4.81, -3.19))
    assert spectrum.total == 2 * 27


def test_turn_three_saving_halves_the_ground(aprlrfy: Peptide, mj_model: InteractionModel) -> None:
    """Without the pinned bit, both mirror images of each ground fold are enumerated."""
    spectrum = enumerate_spectrum(aprlrfy, EncodingScheme.DENSE, mj_model, q6_saving=False)
    assert spectrum.ground.energy == pytest.approx(-4.81)
    assert spectrum.ground.degeneracy == 4
    assert spectrum.total == 3 * 27


def test_enumeration_cap(aprlrfy: Peptide, mj_model: InteractionModel) -> None:
    """Turn spaces above the cap are refused."""
    layout = build_layout(aprlrfy, EncodingScheme.DENSE)
    assert turn_space_size(layout) == 2 * 4**3
    with pytest.raises(EnumerationLimitError, match="exceed"):
        enumerate_spectrum(aprlrfy, EncodingScheme.DENSE, mj_model, cap=100)


def test_canonical_key_identifies_mirrors() -> None:
    """Swapping the two unused axes gives the same key."""
    assert canonical_key(TurnSequence((1, 0, 2, 3))) == canonical_key(TurnSequence((1, 0, 3, 2)))
    assert canonical_key(TurnSequence((1, 0, 2, 3))) != canonical_key(TurnSequence((1, 0, 1, 2)))


def test_odd_separation_means_odd_distance() -> None:
    """Beads an odd number of bonds apart sit on opposite sublattices."""
    layout = build_layout(Peptide.from_string("AAAAAAA"), EncodingScheme.SPARSE)
    for turns in iter_turn_sequences(layout):
        conformation = grow(turns)
        for first, second in combinations(conformation.beads, 2):
            if separation(first, second) % 2:
                assert distance_index(conformation, first, second) % 2 == 1


def test_certify_benchmark(aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """The 9-qubit Hamiltonian reproduces every geometric energy."""
    certificate = certify_hamiltonian(aprlrfy_hamiltonian)
    assert certificate.passed, certificate.counterexample
    assert certificate.exhaustive
    assert certificate.ground_energy == pytest.approx(-4.81)
    assert certificate.violation_margin > 0
    assert certificate.checked > 0


def test_certify_second_shell(mj_model_second_shell: InteractionModel) -> None:
    """Second-neighbour classes claim their energies exactly on their geometry."""
    peptide = Peptide.from_string("AAAAAA")
    hamiltonian = assemble(peptide, EncodingScheme.DENSE, mj_model_second_shell)
    assert (hamiltonian.layout.n_conf, hamiltonian.layout.n_int, hamiltonian.n) == (5, 6, 11)
    certificate = certify_hamiltonian(hamiltonian)
    assert certificate.passed, certificate.counterexample


def test_certify_sparse(mj_model: InteractionModel) -> None:
    """Sparse turns give the same energies on every valid conformation."""
    certificate = certify(Peptide.from_string("APRLRF"), EncodingScheme.SPARSE, mj_model)
    assert not certificate.mismatches, certificate.counterexample


def test_certify_catches_weak_penalties(aprlrfy: Peptide, mj_model: InteractionModel) -> None:
    """A tiny distance weight lets contact qubits claim energy without a contact."""
    config = PenaltyConfig(lambda_1=1e-6, enforce_audit=False)
    certificate = certify(aprlrfy, EncodingScheme.DENSE, mj_model, config)
    assert not certificate.passed
    assert certificate.counterexample is not None


def test_certify_catches_mutations(aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """A tampered coefficient is detected."""
    qubit = aprlrfy_hamiltonian.layout.n_conf
    polynomial = aprlrfy_hamiltonian.polynomial + (-100) * PBPoly.variable(qubit)
    mutated = dataclasses.replace(aprlrfy_hamiltonian, polynomial=polynomial)
    certificate = certify_hamiltonian(mutated)
    assert not certificate.passed
    assert certificate.mismatches


@pytest.mark.parametrize(
    ("fixture", "pairs"),
    [
        ("helix_contacts.csv", {(1, 6), (4, 9)}),
        ("sheet_contacts.csv", {(1, 10), (3, 8)}),
    ],
)
def test_secondary_structure_maps(fixture: str, pairs: set[tuple[int, int]]) -> None:
    """The ground fold realizes every contact of the map."""
    model = InteractionModel.from_contact_map(load_contact_map(FIXTURES_DIR / fixture))
    spectrum = enumerate_spectrum(Peptide.from_string("A" * 10), EncodingScheme.DENSE, model)
    assert spectrum.total == 2 * 3**6
    ground = spectrum.ground
    assert ground.energy == pytest.approx(-2.0)
    assert {(c.first.position, c.second.position) for c in ground.contacts} == pairs


def test_helix_contacts_run_parallel_to_the_diagonal() -> None:
    """Helix contacts share `j - i`, sheet contacts share `i + j`."""
    helix = load_contact_map(FIXTURES_DIR / "helix_contacts.csv")
    sheet = load_contact_map(FIXTURES_DIR / "sheet_contacts.csv")
    assert len({j - i for _, i, j in helix}) == 1
    assert len({i + j for _, i, j in sheet}) == 1


def test_uniform_ground_probability(aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """Every bitstring once: `P_0` counts the ground bitstrings."""
    spectrum = spectrum_of_layout(aprlrfy_hamiltonian.layout, aprlrfy_hamiltonian.model)
    n = aprlrfy_hamiltonian.n
    samples = [format(index, f"0{n}b") for index in range(1 << n)]
    probabilities = ground_truth_probability(samples, spectrum, aprlrfy_hamiltonian)
    assert probabilities.ground == pytest.approx(2 / 512)
    assert sum(probabilities.probabilities) + probabilities.remainder == pytest.approx(1.0)


def test_level_probabilities() -> None:
    """Frequencies are weighted by counts and unmatched energies go to the remainder."""
    probabilities = level_probabilities([-2.0, -1.0, 5.0], [3, 1, 4], [-2.0, -1.0])
    assert probabilities.probabilities == pytest.approx((3 / 8, 1 / 8))
    assert probabilities.remainder == pytest.approx(0.5)
    assert probabilities.ground == pytest.approx(3 / 8)
    with pytest.raises(ValueError, match="empty"):
        level_probabilities(np.zeros(0), np.zeros(0), [0.0])
    with pytest.raises(ValueError, match="No samples"):
        ground_truth_probability([], None, None)  # type: ignore[arg-type]


@pytest.mark.slow
def test_angiotensin_ground_matches_hamiltonian(mj_model: InteractionModel) -> None:
    """The 22-qubit Hamiltonian agrees with the oracle on every conformation."""
    hamiltonian = assemble(Peptide.from_string(ANGIOTENSIN), EncodingScheme.DENSE, mj_model)
    certificate = certify_hamiltonian(hamiltonian)
    assert not certificate.mismatches, certificate.counterexample
    spectrum = spectrum_of_layout(hamiltonian.layout, mj_model)
    assert certificate.ground_energy == pytest.approx(spectrum.ground.energy)


def test_overlapping_conformations_are_separate_levels(mj_model: InteractionModel) -> None:
    """Overlaps are enumerated but never chosen as the ground fold."""
    spectrum = enumerate_spectrum(Peptide.from_string(APRLRFY), EncodingScheme.SPARSE, mj_model)
    assert spectrum.ground.self_avoiding
    assert all(level in {e.energy for e in spectrum if e.self_avoiding} for level in spectrum.levels)
