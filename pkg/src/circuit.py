"""
Parameterized circuits, the hardware-efficient ansatz, and the VQC forward pass.

A VQC design has three parts: the encoder (src.encoding), the trainable
ansatz built here, and the measurement, which is <Z> on one qubit mapped to
(1 + <Z>) / 2 so predictions live in [0, 1].
"""

from dataclasses import asdict, dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.encoding import EncoderKind, EncoderSpec, encode_rows
from src.errors import ConfigurationError, ShapeError
from src.simulator import (
    ROTATION_KINDS,
    Gate,
    GateKind,
    apply_matrices,
    check_norms,
    check_qubit_index,
    expectation_z_rows,
    rotation_matrices,
    target_matrix,
)


class EntanglerKind(str, Enum):
    CNOT_RING = "cnot-ring"
    CZ_RING = "cz-ring"


_RING_GATE = {EntanglerKind.CNOT_RING: GateKind.CNOT, EntanglerKind.CZ_RING: GateKind.CZ}


@dataclass(frozen=True)
class GateTemplate:
    """One circuit op: a fixed gate, or a rotation whose angle comes from `slot`."""

    kind: GateKind
    target: int
    control: Optional[int] = None
    slot: Optional[int] = None
    angle: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", GateKind(self.kind))
        if self.slot is not None and self.kind not in ROTATION_KINDS:
            raise ConfigurationError(f"{self.kind.value} cannot carry a parameter slot")
        if self.slot is None:
            # validates kind/control/angle combinations
            self.fixed_gate()

    @property
    def parametric(self) -> bool:
        return self.slot is not None

    def qubits(self) -> tuple:
        if self.control is None:
            return (self.target,)
        return (self.control, self.target)

    def fixed_gate(self) -> Gate:
        return Gate(self.kind, self.target, self.control, self.angle)


@dataclass(frozen=True)
class ParamCircuit:
    n_qubits: int
    ops: Tuple[GateTemplate, ...]
    n_params: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            for q in op.qubits():
                check_qubit_index(q, self.n_qubits)
        used = sorted({op.slot for op in self.ops if op.parametric})
        if used != list(range(self.n_params)):
            raise ConfigurationError(
                f"parameter slots must be exactly 0..{self.n_params - 1}, got {used}"
            )

    @property
    def slots(self) -> np.ndarray:
        """Slot index of every parametric op occurrence, in op order."""
        return np.array([op.slot for op in self.ops if op.parametric], dtype=int)

    def occurrence_angles(self, params_rows: np.ndarray) -> np.ndarray:
        return np.asarray(params_rows, dtype=float)[:, self.slots]

    def execute_rows(self, states: np.ndarray, angles: np.ndarray) -> np.ndarray:
        """Run the circuit on every row; `angles` is (rows, occurrences)."""
        k = 0
        for op in self.ops:
            if op.parametric:
                matrices = rotation_matrices(op.kind, angles[:, k])
                k += 1
            else:
                matrices = target_matrix(op.fixed_gate())
            states = apply_matrices(states, self.n_qubits, matrices, op.target, op.control)
        return states


@lru_cache(maxsize=None)
def build_ansatz(
    n_qubits: int, layers: int, entangler: EntanglerKind = EntanglerKind.CNOT_RING
) -> ParamCircuit:
    if n_qubits < 1 or layers < 1:
        raise ConfigurationError(
            f"ansatz needs n_qubits >= 1 and layers >= 1, got {n_qubits}, {layers}"
        )
    ring = _RING_GATE[EntanglerKind(entangler)]
    ops = []
    slot = 0
    for _ in range(layers):
        for q in range(n_qubits):
            ops.append(GateTemplate(GateKind.RY, q, slot=slot))
            ops.append(GateTemplate(GateKind.RZ, q, slot=slot + 1))
            slot += 2
        if n_qubits >= 2:
            for q in range(n_qubits):
                ops.append(GateTemplate(ring, (q + 1) % n_qubits, control=q))
    return ParamCircuit(n_qubits, tuple(ops), slot)


def circuit_depth(circuit: ParamCircuit) -> int:
    """As-soon-as-possible layering: longest chain of ops sharing qubits."""
    level = [0] * circuit.n_qubits
    for op in circuit.ops:
        d = max(level[q] for q in op.qubits()) + 1
        for q in op.qubits():
            level[q] = d
    return max(level) if circuit.ops else 0


@dataclass(frozen=True)
class VqcDesign:
    encoder: EncoderKind
    input_dim: int
    ansatz_layers: int = 5
    duplications: int = 0
    measured_qubit: int = 0
    entangler: EntanglerKind = EntanglerKind.CNOT_RING
    _spec: EncoderSpec = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "encoder", EncoderKind(self.encoder))
        object.__setattr__(self, "entangler", EntanglerKind(self.entangler))
        object.__setattr__(
            self, "_spec", EncoderSpec(self.encoder, self.input_dim, self.duplications)
        )
        if self.ansatz_layers < 1:
            raise ConfigurationError(f"ansatz_layers must be >= 1, got {self.ansatz_layers}")
        if not 0 <= self.measured_qubit < self.n_qubits:
            raise ConfigurationError(
                f"measured_qubit {self.measured_qubit} outside {self.n_qubits}-qubit register"
            )

    @property
    def encoder_spec(self) -> EncoderSpec:
        return self._spec

    @property
    def n_qubits(self) -> int:
        return self._spec.n_qubits

    @property
    def ansatz(self) -> ParamCircuit:
        return build_ansatz(self.n_qubits, self.ansatz_layers, self.entangler)

    @property
    def n_params(self) -> int:
        return self.ansatz.n_params

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out.pop("_spec", None)
        out["encoder"] = self.encoder.value
        out["entangler"] = self.entangler.value
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VqcDesign":
        return cls(**data)


@dataclass(frozen=True)
class DesignProperties:
    n_qubits: int
    n_params: int
    depth: int
    encoder_label: str
    theoretical_order: int


def theoretical_order(design: VqcDesign) -> int:
    """Polynomial order the measurement can express in the encoded inputs."""
    if design.encoder is EncoderKind.STVQC:
        return 2 * (design.duplications + 1)
    return 2


def describe_design(design: VqcDesign) -> DesignProperties:
    return DesignProperties(
        n_qubits=design.n_qubits,
        n_params=design.n_params,
        depth=circuit_depth(design.ansatz),
        encoder_label=design.encoder_spec.label,
        theoretical_order=theoretical_order(design),
    )


def output_map(z: np.ndarray) -> np.ndarray:
    return (1.0 + z) / 2.0


def check_params(design: VqcDesign, params) -> np.ndarray:
    theta = np.asarray(params, dtype=float).reshape(-1)
    if theta.shape[0] != design.n_params:
        raise ShapeError(f"design has {design.n_params} parameters, got {theta.shape[0]}")
    return theta


def measure_rows(design: VqcDesign, states: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """Run the ansatz on encoded rows and return <Z> on the measured qubit."""
    final = design.ansatz.execute_rows(states, angles)
    check_norms(final)
    return expectation_z_rows(final, design.n_qubits, design.measured_qubit)


def predict(design: VqcDesign, params, x) -> np.ndarray:
    """Predictions for a (B, input_dim) batch under one parameter vector."""
    theta = check_params(design, params)
    states = encode_rows(design.encoder_spec, x)
    angles = np.repeat(design.ansatz.occurrence_angles(theta[None, :]), states.shape[0], axis=0)
    return output_map(measure_rows(design, states, angles))


def forward(design: VqcDesign, params, x) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != design.input_dim:
        raise ShapeError(f"design expects {design.input_dim} inputs, got {x.shape[0]}")
    return float(predict(design, params, x[None, :])[0])
