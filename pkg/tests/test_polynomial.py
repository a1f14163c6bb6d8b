"""Tests for the polynomial module."""

from __future__ import annotations

from itertools import product

import numpy as np
import pytest

from tetrafold.polynomial import (
    PauliHamiltonian,
    PBPoly,
    bits_to_index,
    evaluate,
    evaluate_batch,
    indices_to_bits,
    resource_report,
    to_pauli,
)


@pytest.fixture
def poly() -> PBPoly:
    """Return a small mixed-degree polynomial."""
    q0, q1, q2, q3 = (PBPoly.variable(i) for i in range(4))
    return 1.5 - 2 * q0 + 3 * q1 * q2 + 0.25 * (q0 - q3) * (q1 + q2) * q3 + q0 * q1 * q2 * q3


def test_binary_variables_are_idempotent() -> None:
    """`q * q = q` and `(1 - q) q = 0`."""
    q = PBPoly.variable(3)
    assert q * q == q
    assert len((1 - q) * q) == 0


def test_constants_and_degree(poly: PBPoly) -> None:
    """Expose the constant term, degree and variables."""
    assert poly.constant == 1.5
    assert poly.degree == 4
    assert poly.variables == (0, 1, 2, 3)


def test_power() -> None:
    """Powers are repeated products."""
    q0, q1 = PBPoly.variable(0), PBPoly.variable(1)
    assert (q0 + q1) ** 2 == q0 + q1 + 2 * q0 * q1
    with pytest.raises(ValueError, match="Negative"):
        q0 ** -1  # noqa: B018


def test_pauli_expansion_of_a_variable() -> None:
    """`q = (1 - Z) / 2`."""
    pauli = to_pauli(PBPoly.variable(2))
    assert dict(pauli) == {(): 0.5, (2,): -0.5}


def test_pauli_expansion_agrees_on_every_basis_state(poly: PBPoly) -> None:
    """The Z-string form takes the same values as the polynomial."""
    pauli = to_pauli(poly)
    for bits in product((0, 1), repeat=4):
        assert pauli.evaluate(bits) == pytest.approx(evaluate(poly, bits))


def test_batch_evaluation(poly: PBPoly) -> None:
    """Vectorized evaluation matches the scalar one."""
    bits = indices_to_bits(np.arange(16), 4)
    expected = [evaluate(poly, row) for row in bits.tolist()]
    assert evaluate_batch(poly, bits) == pytest.approx(expected)


def test_evaluation_checks_lengths(poly: PBPoly) -> None:
    """Assignments must cover every variable and match the register size."""
    with pytest.raises(ValueError, match="at least"):
        evaluate(poly, "01")
    with pytest.raises(ValueError, match="Expected 5 bits"):
        evaluate(poly, "0101", 5)
    with pytest.raises(ValueError, match="two-dimensional"):
        evaluate_batch(poly, np.zeros(4))


def test_big_endian_indices() -> None:
    """Qubit 0 is the most significant bit."""
    assert indices_to_bits([1, 4], 3).tolist() == [[0, 0, 1], [1, 0, 0]]
    assert bits_to_index("100") == 4
    assert bits_to_index("") == 0


def test_resource_report_counts_every_string(poly: PBPoly) -> None:
    """The term count includes the identity string."""
    pauli = to_pauli(poly)
    report = resource_report(pauli)
    assert report.max_locality == 4
    assert report.term_count == len(pauli) == sum(report.locality_histogram.values())
    assert report.locality_histogram[0] == 1
    assert report.operator_count == report.term_count - 1


def test_term_count_of_a_product() -> None:
    """`q0 q1 = (I - Z0 - Z1 + Z0 Z1) / 4` stores four strings."""
    report = resource_report(to_pauli(PBPoly.variable(0) * PBPoly.variable(1)))
    assert report.term_count == 4
    assert report.operator_count == 3
    assert report.locality_histogram == {0: 1, 1: 2, 2: 1}


def test_pauli_records(poly: PBPoly) -> None:
    """Records list the identity first and rebuild the same operator."""
    pauli = to_pauli(poly)
    records = pauli.to_records()
    assert records[0]["gamma"] == []
    assert PauliHamiltonian.from_records(records) == pauli


def test_pauli_dump() -> None:
    """The text listing has one line per term."""
    pauli = to_pauli(2 * PBPoly.variable(0) * PBPoly.variable(1))
    lines = pauli.dump().splitlines()
    assert lines[0].endswith(" I")
    assert lines[-1].endswith("Z0 Z1")
    assert len(lines) == 4


def test_tiny_coefficients_are_dropped() -> None:
    """Cancelling terms disappear."""
    q = PBPoly.variable(0)
    assert len(q + 0.1 - q - 0.1) == 0
