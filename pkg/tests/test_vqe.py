"""Tests for the circuit simulator and the CVaR objective."""

from __future__ import annotations

import math
from functools import reduce

import numpy as np
import pytest

from tetrafold.hamiltonian import FoldingHamiltonian
from tetrafold.vqe import (
    AnsatzSpec,
    CVaRConfig,
    CVaREngine,
    Entangler,
    SampleBatch,
    cvar,
    prepare_state,
    sample,
    tail_size,
)


def _gate(n: int, qubit: int, matrix: np.ndarray) -> np.ndarray:
    factors = [matrix if k == qubit else np.eye(2) for k in range(n)]
    return reduce(np.kron, factors)


def _cnot(n: int, control: int, target: int) -> np.ndarray:
    size = 1 << n
    matrix = np.zeros((size, size))
    for index in range(size):
        flip = (index >> (n - 1 - control)) & 1
        matrix[index ^ (flip << (n - 1 - target)), index] = 1
    return matrix


def _ry(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]])


def _reference_state(ansatz: AnsatzSpec, theta: np.ndarray) -> np.ndarray:
    n = ansatz.n
    state = np.zeros(1 << n)
    state[0] = 1
    hadamard = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    for qubit in range(n):
        state = _gate(n, qubit, hadamard) @ state
    for qubit in range(n):
        state = _gate(n, qubit, _ry(theta[qubit])) @ state
    for control, target in ansatz.cnot_pairs():
        state = _cnot(n, control, target) @ state
    for qubit in range(n):
        state = _gate(n, qubit, _ry(theta[n + qubit])) @ state
    return state


def test_zero_angles_give_uniform_state() -> None:
    """With every angle at 0 the circuit is Hadamards and CNOTs."""
    state = prepare_state(AnsatzSpec(5), np.zeros(10))
    assert state == pytest.approx(np.full(32, 1 / math.sqrt(32)))


def test_single_qubit() -> None:
    """One qubit: `RY(b) RY(a) H |0>`."""
    a, b = 0.3, 1.1
    angle = (a + b) / 2 + math.pi / 4
    assert prepare_state(AnsatzSpec(1), [a, b]) == pytest.approx([math.cos(angle), math.sin(angle)])


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("entangler", list(Entangler))
def test_matches_dense_matrices(n: int, entangler: Entangler) -> None:
    """The fast simulator agrees with explicit gate matrices."""
    ansatz = AnsatzSpec(n, entangler)
    theta = np.random.default_rng(n).uniform(0, 2 * math.pi, ansatz.num_parameters)
    assert prepare_state(ansatz, theta) == pytest.approx(_reference_state(ansatz, theta))


def test_cnot_patterns() -> None:
    """Ring closes on three or more qubits; all-to-all is lexicographic."""
    assert AnsatzSpec(2).cnot_pairs() == ((0, 1),)
    assert AnsatzSpec(3).cnot_pairs() == ((0, 1), (1, 2), (2, 0))
    assert AnsatzSpec(3, Entangler.ALL_TO_ALL).cnot_pairs() == ((0, 1), (0, 2), (1, 2))


def test_reject_wrong_angle_count() -> None:
    """The angle vector has `2n` entries."""
    with pytest.raises(ValueError, match="Expected 6 angles"):
        prepare_state(AnsatzSpec(3), np.zeros(5))


def test_sampling_is_deterministic() -> None:
    """The same seed gives the same shots."""
    state = prepare_state(AnsatzSpec(4), np.linspace(0, 3, 8))
    first, second = sample(state, 500, 11), sample(state, 500, 11)
    assert first.indices.tolist() == second.indices.tolist()
    assert first.counts.tolist() == second.counts.tolist()
    assert first.shots == 500


def test_basis_state_sampling() -> None:
    """A basis state is always measured the same way."""
    state = np.zeros(8)
    state[5] = 1
    batch = sample(state, 100, 0)
    assert batch.bitstrings() == ["101"]
    assert batch.counts.tolist() == [100]


def test_sampling_statistics() -> None:
    """Frequencies approach the squared amplitudes."""
    state = prepare_state(AnsatzSpec(2), [0.4, 1.3, 0.7, 2.1])
    batch = sample(state, 200_000, 3)
    frequencies = np.zeros(4)
    frequencies[batch.indices] = batch.counts / batch.shots
    assert frequencies == pytest.approx(state**2, abs=5e-3)


def test_reject_bad_states() -> None:
    """States must be normalized with a power-of-two length."""
    with pytest.raises(ValueError, match="power-of-two"):
        sample(np.ones(3) / math.sqrt(3), 10)
    with pytest.raises(ValueError, match="normalized"):
        sample(np.ones(4), 10)


def test_tail_size() -> None:
    """The tail rounds up and keeps at least one shot."""
    assert tail_size(0.05, 1024) == 52
    assert tail_size(0.1, 10) == 1
    assert tail_size(1e-6, 10) == 1
    assert tail_size(1.0, 7) == 7
    with pytest.raises(ValueError, match="alpha"):
        tail_size(0.0, 10)


def test_cvar_splits_the_cut_level() -> None:
    """Shots at the cut count individually."""
    batch = SampleBatch(2, np.array([0, 1, 2]), np.array([1, 3, 6])).scored(np.array([-3.0, -1.0, 2.0]))
    assert cvar(batch, 0.2) == pytest.approx(-2.0)
    assert cvar(batch, 0.1) == pytest.approx(-3.0)
    assert cvar(batch, 1.0) == pytest.approx((-3 - 3 + 12) / 10)


def test_cvar_is_monotone_in_alpha() -> None:
    """Larger tails average higher energies."""
    rng = np.random.default_rng(0)
    batch = SampleBatch(4, np.arange(16), rng.integers(1, 20, 16)).scored(rng.normal(size=16))
    values = [cvar(batch, alpha) for alpha in (0.05, 0.2, 0.5, 1.0)]
    assert values == sorted(values)
    assert values[-1] == pytest.approx(float(batch.energies @ batch.counts) / batch.shots)


def test_unscored_batches() -> None:
    """Energies must be attached first."""
    batch = SampleBatch(1, np.array([0]), np.array([4]))
    with pytest.raises(ValueError, match="scored"):
        cvar(batch, 0.5)
    with pytest.raises(ValueError, match="scored"):
        batch.lowest()
    with pytest.raises(ValueError, match="scored"):
        batch.shots_at_or_below(0.0)


def test_shots_at_or_below() -> None:
    """Shots are counted up to the level, within the tolerance."""
    batch = SampleBatch(2, np.array([0, 1, 2]), np.array([2, 3, 4])).scored(np.array([-1.0, 0.0, -1.0 + 1e-12]))
    assert batch.shots_at_or_below(-1.0) == 6
    assert batch.shots_at_or_below(-2.0) == 0
    assert batch.shots_at_or_below(0.0) == 9


def test_engine(aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """The engine scores shots with the Hamiltonian diagonal."""
    ansatz = AnsatzSpec(aprlrfy_hamiltonian.n)
    engine = CVaREngine(aprlrfy_hamiltonian, ansatz, CVaRConfig(alpha=0.1, shots=256, seed=4))
    theta = np.random.default_rng(1).uniform(0, 2 * math.pi, ansatz.num_parameters)
    evaluation = engine.evaluate(theta)
    assert evaluation.batch.shots == 256
    assert evaluation.batch.energies == pytest.approx(aprlrfy_hamiltonian.evaluate_indices(evaluation.batch.indices))
    assert engine.evaluate(theta).cvar == evaluation.cvar
    bitstring, energy = evaluation.batch.lowest()
    assert aprlrfy_hamiltonian.evaluate(bitstring) == pytest.approx(energy)
    assert evaluation.cvar >= energy


def test_engine_checks_sizes(aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """Ansatz and Hamiltonian sizes must agree."""
    with pytest.raises(ValueError, match="qubits"):
        CVaREngine(aprlrfy_hamiltonian, AnsatzSpec(3))


def test_energy_cache_is_bounded(aprlrfy_hamiltonian: FoldingHamiltonian) -> None:
    """Without a precomputed diagonal, the cache keeps only the most recent energies."""
    ansatz = AnsatzSpec(aprlrfy_hamiltonian.n)
    engine = CVaREngine(aprlrfy_hamiltonian, ansatz, diagonal_qubits=0, cache_limit=8)
    expected = aprlrfy_hamiltonian.evaluate_indices(np.arange(512))
    for start in range(0, 512, 20):
        indices = np.arange(start, min(start + 20, 512))
        assert engine.energies(indices) == pytest.approx(expected[indices])
        assert engine.cache_size <= 8
    assert engine.energies(np.array([3, 3, 500])) == pytest.approx(expected[[3, 3, 500]])
    with pytest.raises(ValueError, match="room"):
        CVaREngine(aprlrfy_hamiltonian, ansatz, cache_limit=0)
