"""
Dense statevector simulation for small registers.

Qubit 0 is the most significant bit of the basis index, so the amplitude of
|q0 q1 ... q(n-1)> sits at index q0*2^(n-1) + ... + q(n-1).

The kernels work on a batch of states (rows of a 2-D array) and accept one
matrix per row, so a whole mini-batch, including every parameter shift, runs
through a circuit in one pass. The single-state API (zero_state, apply_gate,
tensor_product, expectation_z) wraps those kernels.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from src.errors import ConfigurationError, NumericError, QubitIndexError

MAX_QUBITS = 12
NORM_TOLERANCE = 1e-10


class GateKind(str, Enum):
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CNOT = "CNOT"
    CZ = "CZ"
    H = "H"


ROTATION_KINDS = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ})
CONTROLLED_KINDS = frozenset({GateKind.CNOT, GateKind.CZ})

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    target: int
    control: Optional[int] = None
    angle: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", GateKind(self.kind))
        if self.kind in ROTATION_KINDS and self.angle is None:
            raise ConfigurationError(f"{self.kind.value} needs an angle")
        if self.kind not in ROTATION_KINDS and self.angle is not None:
            raise ConfigurationError(f"{self.kind.value} takes no angle")
        if self.kind in CONTROLLED_KINDS:
            if self.control is None:
                raise ConfigurationError(f"{self.kind.value} needs a control qubit")
            if self.control == self.target:
                raise ConfigurationError(
                    f"control and target must differ, both are {self.target}"
                )
        elif self.control is not None:
            raise ConfigurationError(f"{self.kind.value} takes no control qubit")

    def qubits(self) -> tuple:
        if self.control is None:
            return (self.target,)
        return (self.control, self.target)


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != 2**self.n_qubits:
            raise ConfigurationError(
                f"{self.n_qubits} qubits need {2 ** self.n_qubits} amplitudes, "
                f"got {amps.shape[0]}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes: Sequence[complex]) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        size = amps.shape[0]
        if size < 2 or size & (size - 1):
            raise ConfigurationError(f"amplitude count must be a power of 2, got {size}")
        return cls(int(size).bit_length() - 1, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def check_qubit_count(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigurationError(
            f"qubit count must be in [1, {MAX_QUBITS}], got {n_qubits}"
        )


def check_qubit_index(qubit: int, n_qubits: int) -> None:
    if not 0 <= qubit < n_qubits:
        raise QubitIndexError(f"qubit {qubit} outside register of {n_qubits}")


def rotation_matrices(kind: Union[GateKind, str], angles) -> np.ndarray:
    """Stack of 2x2 rotation matrices exp(-i*angle*P/2), one per angle."""
    kind = GateKind(kind)
    theta = np.asarray(angles, dtype=float).reshape(-1)
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    out = np.zeros((theta.shape[0], 2, 2), dtype=complex)
    if kind is GateKind.RX:
        out[:, 0, 0] = c
        out[:, 0, 1] = -1j * s
        out[:, 1, 0] = -1j * s
        out[:, 1, 1] = c
    elif kind is GateKind.RY:
        out[:, 0, 0] = c
        out[:, 0, 1] = -s
        out[:, 1, 0] = s
        out[:, 1, 1] = c
    elif kind is GateKind.RZ:
        out[:, 0, 0] = np.exp(-0.5j * theta)
        out[:, 1, 1] = np.exp(0.5j * theta)
    else:
        raise ConfigurationError(f"{kind.value} is not a rotation")
    return out


def target_matrix(gate: Gate) -> np.ndarray:
    """The 2x2 block a gate applies to its target (under the control, if any)."""
    if gate.kind in ROTATION_KINDS:
        return rotation_matrices(gate.kind, [gate.angle])[0]
    if gate.kind is GateKind.H:
        return _H
    if gate.kind is GateKind.CNOT:
        return _X
    return _Z


def gate_matrix(gate: Gate) -> np.ndarray:
    """2x2 unitary for single-qubit gates; 4x4 on (control, target) for CNOT/CZ."""
    block = target_matrix(gate)
    if gate.control is None:
        return block.copy()
    full = np.eye(4, dtype=complex)
    full[2:, 2:] = block
    return full


def apply_matrices(
    states: np.ndarray,
    n_qubits: int,
    matrices: np.ndarray,
    target: int,
    control: Optional[int] = None,
) -> np.ndarray:
    """
    Apply a 2x2 block to `target` on every row of `states` (shape (M, 2^n)).

    `matrices` is either one (2, 2) block shared by all rows or an (M, 2, 2)
    stack. With `control`, the block only acts where the control bit is 1.
    Returns a new array.
    """
    rows = states.shape[0]
    psi = np.array(states, dtype=complex).reshape((rows,) + (2,) * n_qubits)
    if control is None:
        psi = _apply_block(psi, matrices, 1 + target)
        return psi.reshape(rows, -1)

    index = [slice(None)] * (n_qubits + 1)
    index[1 + control] = 1
    index = tuple(index)
    axis = 1 + target if target < control else target
    psi[index] = _apply_block(psi[index], matrices, axis)
    return psi.reshape(rows, -1)


def _apply_block(psi: np.ndarray, matrices: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(psi, axis, -1)
    shape = moved.shape
    flat = moved.reshape(shape[0], -1, 2)
    if matrices.ndim == 2:
        out = flat @ matrices.T
    else:
        out = flat @ np.transpose(matrices, (0, 2, 1))
    return np.moveaxis(out.reshape(shape), -1, axis)


def expectation_z_rows(states: np.ndarray, n_qubits: int, qubit: int) -> np.ndarray:
    """<Z_qubit> for every row of `states`."""
    probs = np.abs(states) ** 2
    probs = probs.reshape(states.shape[0], 2**qubit, 2, 2 ** (n_qubits - qubit - 1))
    p0 = probs[:, :, 0, :].sum(axis=(1, 2))
    p1 = probs[:, :, 1, :].sum(axis=(1, 2))
    return np.clip(p0 - p1, -1.0, 1.0)


def check_norms(states: np.ndarray, tol: float = NORM_TOLERANCE) -> None:
    """Raise NumericError when any row drifted off the unit sphere."""
    norms = np.linalg.norm(states, axis=1)
    if not np.all(np.isfinite(norms)):
        raise NumericError("statevector contains non-finite amplitudes")
    worst = float(np.max(np.abs(norms - 1.0)))
    if worst > tol:
        raise NumericError(f"statevector norm drifted by {worst:.3e} (tolerance {tol:g})")


def zero_state(n_qubits: int) -> StateVector:
    check_qubit_count(n_qubits)
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    for q in gate.qubits():
        check_qubit_index(q, state.n_qubits)
    out = apply_matrices(
        state.amplitudes[None, :],
        state.n_qubits,
        target_matrix(gate),
        gate.target,
        gate.control,
    )
    check_norms(out)
    return StateVector(state.n_qubits, out[0])


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    n = a.n_qubits + b.n_qubits
    if n > MAX_QUBITS:
        raise ConfigurationError(
            f"tensor product would need {n} qubits (cap {MAX_QUBITS})"
        )
    return StateVector(n, np.kron(a.amplitudes, b.amplitudes))


def expectation_z(state: StateVector, qubit: int) -> float:
    check_qubit_index(qubit, state.n_qubits)
    return float(expectation_z_rows(state.amplitudes[None, :], state.n_qubits, qubit)[0])
