"""Tests for the statevector simulator."""

import os
import sys
from functools import reduce

import numpy as np
import pytest

root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, root)

from src.errors import ConfigurationError, NumericError, QubitIndexError  # noqa: E402
from src.simulator import (  # noqa: E402
    Gate,
    GateKind,
    StateVector,
    apply_gate,
    apply_matrices,
    check_norms,
    expectation_z,
    gate_matrix,
    rotation_matrices,
    tensor_product,
    zero_state,
)

_I = np.eye(2, dtype=complex)
_P0 = np.diag([1.0, 0.0]).astype(complex)
_P1 = np.diag([0.0, 1.0]).astype(complex)


def _kron_all(blocks):
    return reduce(np.kron, blocks)


def dense_oracle(gate: Gate, n_qubits: int) -> np.ndarray:
    """Full 2^n x 2^n unitary, qubit 0 leftmost in the Kronecker product."""
    block = gate_matrix(gate) if gate.control is None else gate_matrix(gate)[2:, 2:]
    if gate.control is None:
        return _kron_all([block if q == gate.target else _I for q in range(n_qubits)])
    idle = [_P0 if q == gate.control else _I for q in range(n_qubits)]
    active = [
        _P1 if q == gate.control else block if q == gate.target else _I
        for q in range(n_qubits)
    ]
    return _kron_all(idle) + _kron_all(active)


def random_state(n_qubits: int, rng: np.random.Generator) -> StateVector:
    amps = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return StateVector(n_qubits, amps / np.linalg.norm(amps))


def random_gate(n_qubits: int, rng: np.random.Generator) -> Gate:
    kinds = [GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.H]
    if n_qubits >= 2:
        kinds += [GateKind.CNOT, GateKind.CZ]
    kind = kinds[rng.integers(len(kinds))]
    target = int(rng.integers(n_qubits))
    if kind in (GateKind.CNOT, GateKind.CZ):
        control = int(rng.choice([q for q in range(n_qubits) if q != target]))
        return Gate(kind, target, control=control)
    if kind is GateKind.H:
        return Gate(kind, target)
    return Gate(kind, target, angle=float(rng.uniform(-2 * np.pi, 2 * np.pi)))


def test_zero_state():
    state = zero_state(3)
    assert state.n_qubits == 3
    assert state.amplitudes[0] == 1.0
    assert np.count_nonzero(state.amplitudes) == 1


@pytest.mark.parametrize("n", [0, 13])
def test_zero_state_rejects_qubit_count(n):
    with pytest.raises(ConfigurationError):
        zero_state(n)


def test_apply_gate_matches_dense_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n = int(rng.integers(1, 5))
        state = random_state(n, rng)
        gate = random_gate(n, rng)
        expected = dense_oracle(gate, n) @ state.amplitudes
        got = apply_gate(state, gate).amplitudes
        np.testing.assert_allclose(got, expected, rtol=0, atol=1e-12)


def test_hadamard_gives_equal_superposition():
    state = apply_gate(zero_state(1), Gate(GateKind.H, 0))
    np.testing.assert_allclose(state.amplitudes, [2**-0.5, 2**-0.5], atol=1e-15)


def test_cnot_flips_target_when_control_set():
    # |10> with qubit 0 as the most significant bit is index 2
    state = StateVector(2, [0, 0, 1, 0])
    out = apply_gate(state, Gate(GateKind.CNOT, target=1, control=0))
    np.testing.assert_allclose(out.amplitudes, [0, 0, 0, 1])
    untouched = apply_gate(zero_state(2), Gate(GateKind.CNOT, target=1, control=0))
    np.testing.assert_allclose(untouched.amplitudes, [1, 0, 0, 0])


def test_cnot_with_control_below_target_index():
    # control 2, target 0 on |001> -> |101>
    state = StateVector(3, np.eye(8)[1])
    out = apply_gate(state, Gate(GateKind.CNOT, target=0, control=2))
    np.testing.assert_allclose(out.amplitudes, np.eye(8)[5])


def test_qubit_index_out_of_range():
    with pytest.raises(QubitIndexError):
        apply_gate(zero_state(2), Gate(GateKind.RX, 2, angle=0.1))
    with pytest.raises(QubitIndexError):
        apply_gate(zero_state(2), Gate(GateKind.CZ, 0, control=5))
    with pytest.raises(QubitIndexError):
        expectation_z(zero_state(2), -1)


def test_gate_validation():
    with pytest.raises(ConfigurationError):
        Gate(GateKind.RY, 0)
    with pytest.raises(ConfigurationError):
        Gate(GateKind.H, 0, angle=0.3)
    with pytest.raises(ConfigurationError):
        Gate(GateKind.CNOT, 1, control=1)
    with pytest.raises(ConfigurationError):
        Gate(GateKind.CZ, 1)


def test_norm_is_preserved():
    rng = np.random.default_rng(7)
    state = random_state(4, rng)
    for _ in range(50):
        state = apply_gate(state, random_gate(4, rng))
    assert abs(state.norm() - 1.0) < 1e-10


def test_check_norms_flags_drift_and_nan():
    good = zero_state(2).amplitudes[None, :]
    check_norms(good)
    with pytest.raises(NumericError):
        check_norms(good * 1.001)
    with pytest.raises(NumericError):
        check_norms(np.full((1, 4), np.nan, dtype=complex))


def test_tensor_product_is_kron():
    rng = np.random.default_rng(3)
    a, b = random_state(1, rng), random_state(2, rng)
    out = tensor_product(a, b)
    assert out.n_qubits == 3
    np.testing.assert_allclose(out.amplitudes, np.kron(a.amplitudes, b.amplitudes))


def test_tensor_product_respects_cap():
    with pytest.raises(ConfigurationError):
        tensor_product(zero_state(7), zero_state(6))


def test_expectation_z_values():
    assert expectation_z(zero_state(1), 0) == pytest.approx(1.0)
    flipped = apply_gate(zero_state(2), Gate(GateKind.RX, 1, angle=np.pi))
    assert expectation_z(flipped, 1) == pytest.approx(-1.0)
    assert expectation_z(flipped, 0) == pytest.approx(1.0)
    plus = apply_gate(zero_state(1), Gate(GateKind.H, 0))
    assert expectation_z(plus, 0) == pytest.approx(0.0, abs=1e-15)


def test_ry_rotation_expectation():
    for theta in np.linspace(-np.pi, np.pi, 9):
        state = apply_gate(zero_state(1), Gate(GateKind.RY, 0, angle=theta))
        assert expectation_z(state, 0) == pytest.approx(np.cos(theta))


def test_state_vector_does_not_alias_input():
    raw = np.array([1.0, 0.0], dtype=complex)
    state = StateVector(1, raw)
    raw[0] = 0.0
    assert state.amplitudes[0] == 1.0
    assert raw.flags.writeable


def test_from_amplitudes_needs_power_of_two():
    assert StateVector.from_amplitudes([0, 0, 0, 1]).n_qubits == 2
    with pytest.raises(ConfigurationError):
        StateVector.from_amplitudes([1, 0, 0])


def test_batched_rows_match_single_state_application():
    rng = np.random.default_rng(11)
    states = np.stack([random_state(3, rng).amplitudes for _ in range(5)])
    angles = rng.uniform(-np.pi, np.pi, size=5)
    batched = apply_matrices(states, 3, rotation_matrices(GateKind.RY, angles), target=1)
    for i in range(5):
        single = apply_gate(StateVector(3, states[i]), Gate(GateKind.RY, 1, angle=angles[i]))
        np.testing.assert_allclose(batched[i], single.amplitudes, atol=1e-12)


def test_gate_matrices_are_unitary():
    rng = np.random.default_rng(5)
    for _ in range(100):
        kind = GateKind(rng.choice([k.value for k in GateKind]))
        if kind in (GateKind.CNOT, GateKind.CZ):
            gate = Gate(kind, 1, control=0)
        elif kind is GateKind.H:
            gate = Gate(kind, 0)
        else:
            gate = Gate(kind, 0, angle=float(rng.uniform(-4 * np.pi, 4 * np.pi)))
        u = gate_matrix(gate)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-12)


def test_rz_angles_compose():
    a, b = 0.3, 1.1
    composed = gate_matrix(Gate(GateKind.RZ, 0, angle=a)) @ gate_matrix(
        Gate(GateKind.RZ, 0, angle=b)
    )
    np.testing.assert_allclose(composed, gate_matrix(Gate(GateKind.RZ, 0, angle=a + b)))


def test_ry_pi_flips_zero_to_one():
    state = apply_gate(zero_state(1), Gate(GateKind.RY, 0, angle=np.pi))
    np.testing.assert_allclose(state.probabilities(), [0.0, 1.0], atol=1e-15)


def test_tensor_product_worked_example():
    out = tensor_product(StateVector(1, [0.6, 0.8]), StateVector(1, [1.0, 0.0]))
    np.testing.assert_allclose(out.amplitudes, [0.6, 0.0, 0.8, 0.0])
