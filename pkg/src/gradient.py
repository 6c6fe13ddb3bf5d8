"""
Gradients of the mean squared error with respect to circuit parameters.

parameter_shift_grad is exact for the RX/RY/RZ generators: every rotation
occurrence is shifted by +-pi/2 on its own and the contributions are summed
into its parameter slot. finite_difference_grad is the central-difference
oracle used to check it.
"""

from typing import Callable, Sequence, Tuple, Union

import numpy as np

from src.circuit import VqcDesign, check_params, measure_rows, output_map
from src.encoding import encode_rows
from src.errors import ConfigurationError, NumericError, ShapeError

SHIFT = np.pi / 2.0
# rows * amplitudes handled per simulator call
_CHUNK_CELLS = 1 << 22

# A gradient is a float vector of length n_params, units d(loss)/d(radian).
GradientVector = np.ndarray
Batch = Union[Sequence[Tuple[Sequence[float], float]], Tuple[np.ndarray, np.ndarray]]
LossFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def mse_loss(predictions: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Per-row mean squared error; `predictions` is (rows, batch)."""
    return np.mean((predictions - targets[None, :]) ** 2, axis=1)


def unpack_batch(batch: Batch) -> Tuple[np.ndarray, np.ndarray]:
    """Accept a list of (x, y) pairs or an (X, y) array pair."""
    if isinstance(batch, tuple) and len(batch) == 2 and isinstance(batch[0], np.ndarray):
        x, y = batch
    else:
        pairs = list(batch)
        if not pairs:
            raise ShapeError("batch is empty")
        x = np.array([np.asarray(p[0], dtype=float).reshape(-1) for p in pairs])
        y = np.array([float(p[1]) for p in pairs])
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] == 0:
        raise ShapeError("batch is empty")
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"{x.shape[0]} inputs but {y.shape[0]} targets")
    return x, y


def _predict_many(design: VqcDesign, angle_sets: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Predictions for every (angle set, sample) pair, shape (sets, batch)."""
    n_sets, n_samples = angle_sets.shape[0], states.shape[0]
    per_chunk = max(1, _CHUNK_CELLS // (n_samples * states.shape[1]))
    out = np.empty((n_sets, n_samples))
    for start in range(0, n_sets, per_chunk):
        chunk = angle_sets[start : start + per_chunk]
        rows = np.tile(states, (chunk.shape[0], 1))
        angles = np.repeat(chunk, n_samples, axis=0)
        z = measure_rows(design, rows, angles)
        out[start : start + chunk.shape[0]] = output_map(z).reshape(chunk.shape[0], n_samples)
    return out


def loss(design: VqcDesign, params, batch: Batch, loss_fn: LossFn = mse_loss) -> float:
    theta = check_params(design, params)
    x, y = unpack_batch(batch)
    states = encode_rows(design.encoder_spec, x)
    angles = design.ansatz.occurrence_angles(theta[None, :])
    return float(loss_fn(_predict_many(design, angles, states), y)[0])


def parameter_shift_grad(design: VqcDesign, params, batch: Batch) -> GradientVector:
    theta = check_params(design, params)
    x, y = unpack_batch(batch)
    states = encode_rows(design.encoder_spec, x)
    circuit = design.ansatz
    base = circuit.occurrence_angles(theta[None, :])[0]
    k = base.shape[0]

    shifts = np.zeros((1 + 2 * k, k))
    shifts[1 : k + 1] = np.eye(k) * SHIFT
    shifts[k + 1 :] = -np.eye(k) * SHIFT
    preds = _predict_many(design, base[None, :] + shifts, states)

    residual = preds[0] - y
    # pred = (1 + z)/2, so the shift rule gives d(pred) = (p+ - p-)/2
    dpred = (preds[1 : k + 1] - preds[k + 1 :]) / 2.0
    per_occurrence = np.mean(2.0 * residual[None, :] * dpred, axis=1)

    grad = np.zeros(design.n_params)
    np.add.at(grad, circuit.slots, per_occurrence)
    if not np.all(np.isfinite(grad)):
        raise NumericError("parameter-shift gradient is not finite")
    return grad


def finite_difference_grad(
    design: VqcDesign,
    params,
    batch: Batch,
    h: float = 1e-5,
    loss_fn: LossFn = mse_loss,
) -> GradientVector:
    if not 1e-7 <= h <= 1e-3:
        raise ConfigurationError(f"finite-difference step must be in [1e-7, 1e-3], got {h}")
    theta = check_params(design, params)
    x, y = unpack_batch(batch)
    states = encode_rows(design.encoder_spec, x)
    p = theta.shape[0]
    param_sets = np.vstack([theta + h * np.eye(p), theta - h * np.eye(p)])
    angles = design.ansatz.occurrence_angles(param_sets)
    losses = loss_fn(_predict_many(design, angles, states), y)
    return (losses[:p] - losses[p:]) / (2.0 * h)
