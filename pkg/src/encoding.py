"""
Data encoders: amplitude, angle, and ST-VQC duplication.

Each encoder has a single-sample form returning a StateVector and a row form
(`*_rows`) that encodes a whole (B, input_dim) batch into a (B, 2^n) array.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.errors import ConfigurationError, DomainError, EncodingError, ShapeError
from src.simulator import MAX_QUBITS, StateVector, check_qubit_count

MIN_INPUT_NORM = 1e-6


class EncoderKind(str, Enum):
    AMPLITUDE = "amplitude"
    ANGLE = "angle"
    STVQC = "stvqc"


def address_qubits(input_dim: int) -> int:
    """Qubits holding one amplitude-encoded copy: ceil(log2(d)), at least 1."""
    if input_dim < 1:
        raise ConfigurationError(f"input_dim must be >= 1, got {input_dim}")
    return max(1, math.ceil(math.log2(input_dim)))


@dataclass(frozen=True)
class EncoderSpec:
    kind: EncoderKind
    input_dim: int
    duplications: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", EncoderKind(self.kind))
        if self.input_dim < 1:
            raise ConfigurationError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.duplications < 0:
            raise ConfigurationError(
                f"duplications must be >= 0, got {self.duplications}"
            )
        if self.kind is not EncoderKind.STVQC and self.duplications:
            raise ConfigurationError(f"{self.kind.value} encoding takes no duplications")
        if self.n_qubits > MAX_QUBITS:
            raise ConfigurationError(
                f"{self.label} on {self.input_dim} inputs needs {self.n_qubits} "
                f"qubits (cap {MAX_QUBITS})"
            )

    @property
    def n_qubits(self) -> int:
        if self.kind is EncoderKind.ANGLE:
            return self.input_dim
        copies = self.duplications + 1 if self.kind is EncoderKind.STVQC else 1
        return copies * address_qubits(self.input_dim)

    @property
    def label(self) -> str:
        if self.kind is EncoderKind.AMPLITUDE:
            return "Amplitude"
        if self.kind is EncoderKind.ANGLE:
            return "Angle"
        return f"ST-VQC({self.duplications} dup.)"


def _as_rows(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] == 0:
        raise ShapeError(f"expected a vector or (batch, dim) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("input contains non-finite values")
    return arr


def amplitude_rows(x) -> np.ndarray:
    rows = _as_rows(x)
    width = 2 ** address_qubits(rows.shape[1])
    padded = np.zeros((rows.shape[0], width), dtype=float)
    padded[:, : rows.shape[1]] = rows
    norms = np.linalg.norm(padded, axis=1)
    if np.any(norms < MIN_INPUT_NORM):
        raise EncodingError(
            f"input norm {float(norms.min()):.3e} below {MIN_INPUT_NORM:g}; "
            "amplitude encoding is undefined"
        )
    return (padded / norms[:, None]).astype(complex)


def angle_rows(x) -> np.ndarray:
    rows = _as_rows(x)
    if np.any(np.abs(rows) > 1.0):
        raise DomainError(
            f"angle encoding needs |x_i| <= 1, got max {float(np.abs(rows).max()):.6g}"
        )
    check_qubit_count(rows.shape[1])
    half = (rows + 1.0) * math.pi / 4.0
    states = np.ones((rows.shape[0], 1), dtype=complex)
    for i in range(rows.shape[1]):
        qubit = np.stack([np.cos(half[:, i]), np.sin(half[:, i])], axis=1)
        states = (states[:, :, None] * qubit[:, None, :]).reshape(rows.shape[0], -1)
    return states


def stvqc_rows(x, duplications: int) -> np.ndarray:
    if duplications < 0:
        raise ConfigurationError(f"duplications must be >= 0, got {duplications}")
    rows = _as_rows(x)
    n = (duplications + 1) * address_qubits(rows.shape[1])
    if n > MAX_QUBITS:
        raise ConfigurationError(
            f"{duplications} duplications of {rows.shape[1]} inputs need {n} qubits "
            f"(cap {MAX_QUBITS})"
        )
    copy = amplitude_rows(rows)
    states = copy
    for _ in range(duplications):
        states = (states[:, :, None] * copy[:, None, :]).reshape(rows.shape[0], -1)
    return states


def encode_rows(spec: EncoderSpec, x) -> np.ndarray:
    rows = _as_rows(x)
    if rows.shape[1] != spec.input_dim:
        raise ShapeError(f"encoder expects {spec.input_dim} inputs, got {rows.shape[1]}")
    if spec.kind is EncoderKind.AMPLITUDE:
        return amplitude_rows(rows)
    if spec.kind is EncoderKind.ANGLE:
        return angle_rows(rows)
    return stvqc_rows(rows, spec.duplications)


def _single(states: np.ndarray) -> StateVector:
    return StateVector.from_amplitudes(states[0])


def amplitude_encode(x) -> StateVector:
    return _single(amplitude_rows(np.asarray(x, dtype=float).reshape(-1)))


def angle_encode(x) -> StateVector:
    return _single(angle_rows(np.asarray(x, dtype=float).reshape(-1)))


def stvqc_encode(x, duplications: int) -> StateVector:
    return _single(stvqc_rows(np.asarray(x, dtype=float).reshape(-1), duplications))


def encode(spec: EncoderSpec, x) -> StateVector:
    return _single(encode_rows(spec, np.asarray(x, dtype=float).reshape(-1)))
