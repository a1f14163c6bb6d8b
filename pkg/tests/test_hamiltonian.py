"""Tests for the Hamiltonian builder."""

from __future__ import annotations

import math

import numpy as np
import pytest

from tetrafold.hamiltonian import (
    FoldingHamiltonian,
    PenaltyAuditError,
    PenaltyConfig,
    assemble,
    build_honehot,
    delta_n_poly,
    distance_poly,
)
from tetrafold.interactions import InteractionModel
from tetrafold.lattice import (
    Bead,
    Contact,
    EncodingScheme,
    Peptide,
    TurnSequence,
    distance_index,
    encode,
    grow,
    required_side_turn,
)
from tetrafold.oracle import iter_turn_sequences
from tetrafold.polynomial import evaluate, indices_to_bits


def test_locality(aprlrfy: Peptide, mj_model: InteractionModel, aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """1-NN terms are 3-local with sparse turns and 5-local with dense turns."""
    sparse = assemble(aprlrfy, EncodingScheme.SPARSE, mj_model)
    assert sparse.resources().max_locality == 3
    assert set(sparse.resources().locality_histogram) <= {0, 1, 2, 3}
    assert aprlrfy_hamiltonian.resources().max_locality == 5


def test_pauli_form_matches_polynomial(aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """The Z-string expansion has the same diagonal as the polynomial."""
    n = aprlrfy_hamiltonian.n
    energies = aprlrfy_hamiltonian.evaluate_indices(np.arange(1 << n))
    pauli = aprlrfy_hamiltonian.pauli
    expected = [pauli.evaluate(row) for row in indices_to_bits(np.arange(1 << n), n).tolist()]
    assert energies == pytest.approx(expected)


def test_parts_add_up(aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """The polynomial is the sum of its named parts."""
    assert set(aprlrfy_hamiltonian.parts) == {"growth", "chirality", "first_shell", "second_shell"}
    total = sum(aprlrfy_hamiltonian.parts.values(), 0.0)
    assert total == aprlrfy_hamiltonian.polynomial
    assert len(aprlrfy_hamiltonian.parts["chirality"]) == 0
    assert len(aprlrfy_hamiltonian.parts["second_shell"]) == 0


def test_automatic_weights(aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """Weights scale with the largest contact energy."""
    weights = aprlrfy_hamiltonian.weights
    assert weights.second == pytest.approx(48.1)
    assert weights.back == pytest.approx(240.5)
    first = Contact(1, Bead(1), Bead(6))
    assert weights.first_shell[first] == pytest.approx(36 * 48.1 + 4.81 + 48.1)
    assert aprlrfy_hamiltonian.audit.passed


def test_weak_weights_fail_the_audit(aprlrfy: Peptide, mj_model: InteractionModel) -> None:
    """A tiny distance weight breaks the dominance inequality."""
    with pytest.raises(PenaltyAuditError, match="lambda_1"):
        assemble(aprlrfy, EncodingScheme.DENSE, mj_model, PenaltyConfig(lambda_1=1e-6))
    hamiltonian = assemble(aprlrfy, EncodingScheme.DENSE, mj_model, PenaltyConfig(lambda_1=1e-6, enforce_audit=False))
    assert not hamiltonian.audit.passed
    assert all(inequality.margin < 0 for inequality in hamiltonian.audit.violations)


def test_one_hot_needs_sparse_turns(aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """The one-hot constraint is undefined for dense turns."""
    with pytest.raises(ValueError, match="sparse"):
        build_honehot(aprlrfy_hamiltonian.layout, aprlrfy_hamiltonian.weights)


def test_one_hot_penalty(aprlrfy: Peptide, mj_model: InteractionModel) -> None:
    """Sparse turns pay for every missing or extra set bit."""
    hamiltonian = assemble(aprlrfy, EncodingScheme.SPARSE, mj_model)
    onehot = hamiltonian.parts["onehot"]
    layout = hamiltonian.layout
    good = encode(TurnSequence((1, 0, 2, 1, 0, 1)), layout)
    assert evaluate(onehot, (*good, 0, 0), hamiltonian.n) == 0
    broken = list(good)
    broken[0] = 1 - broken[0]
    assert evaluate(onehot, (*broken, 0, 0), hamiltonian.n) == pytest.approx(hamiltonian.weights.onehot)


def test_growth_penalty(aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """Each repeated axis costs `lambda_back`."""
    layout = aprlrfy_hamiltonian.layout
    growth = aprlrfy_hamiltonian.parts["growth"]
    legal = encode(TurnSequence((1, 0, 3, 1, 0, 1)), layout)
    assert evaluate(growth, (*legal, 0, 0)) == 0
    backtracking = encode(TurnSequence((1, 0, 1, 1, 0, 0)), layout)
    assert evaluate(growth, (*backtracking, 0, 0)) == pytest.approx(2 * aprlrfy_hamiltonian.weights.back)


def test_chirality_penalty(mj_model: InteractionModel) -> None:
    """A side chain on the wrong axis costs `lambda_chirality`."""
    hamiltonian = assemble(Peptide.from_string("APR[L]LRFY"), EncodingScheme.DENSE, mj_model)
    layout = hamiltonian.layout
    chirality = hamiltonian.parts["chirality"]
    main = (1, 0, 3, 1, 0, 2)
    required = required_side_turn(3, 0, 3)
    assert required is not None
    contacts = (0,) * layout.n_int
    for side, expected in ((required, 0.0), (3 - required, hamiltonian.weights.chirality)):
        turns = TurnSequence(main, (None, None, side, None, None, None, None))
        assert evaluate(chirality, (*encode(turns, layout), *contacts)) == pytest.approx(expected)


def test_distance_polynomials_match_geometry(aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """Distance and step-count polynomials agree with the grown coordinates."""
    layout = aprlrfy_hamiltonian.layout
    for turns in iter_turn_sequences(layout):
        bits = (*encode(turns, layout), 0, 0)
        conformation = grow(turns)
        assert evaluate(distance_poly(1, 6, layout), bits) == distance_index(conformation, 1, 6)
        assert evaluate(distance_poly(7, 2, layout), bits) == distance_index(conformation, 2, 7)
        steps = [evaluate(delta_n_poly(axis, 1, 4, layout), bits) for axis in range(4)]
        assert sum(value * value for value in steps) == distance_index(conformation, 1, 4)


def _conformation_supports(hamiltonian: FoldingHamiltonian) -> int:
    sizes = [(1 << len(register.free_qubits)) - 1 for register in hamiltonian.layout.registers]
    sizes = [size for size in sizes if size]
    pairs = sum(a * b for k, a in enumerate(sizes) for b in sizes[k + 1 :])
    return 1 + sum(sizes) + pairs


def test_term_count_scaling(mj_model: InteractionModel) -> None:
    """Term counts stay within the two-turn bound and grow at most like N^4.5.

    Below N = 10 the count is dominated by the contact register switching on,
    so the slope is fitted on N = 10..20.
    """
    counts = {}
    for length in range(6, 21):
        hamiltonian = assemble(Peptide.from_string("A" * length), EncodingScheme.DENSE, mj_model)
        counts[length] = hamiltonian.resources().term_count
        bound = (hamiltonian.layout.n_int + 1) * _conformation_supports(hamiltonian)
        assert counts[length] <= bound
    lengths = list(range(10, 21))
    slope = np.polyfit([math.log(n) for n in lengths], [math.log(counts[n]) for n in lengths], 1)[0]
    assert slope <= 4.5
