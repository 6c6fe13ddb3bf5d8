"""
Mini-batch training of a VQC on one dataset and evaluation to RMSE / R².

Training is deterministic given (design, dataset, config): the parameter
initialization and every epoch's shuffle come from one generator seeded with
TrainConfig.seed.
"""

import logging
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from src.circuit import VqcDesign, check_params, predict
from src.datagen import Dataset, Split
from src.errors import ConfigurationError, NumericError, ShapeError
from src.gradient import loss, parameter_shift_grad
from src.metrics import EvalScores
from src.optim import OptimizerKind, make_optimizer

logger = logging.getLogger("vqcbench")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 64
    learning_rate: float = 0.05
    optimizer: OptimizerKind = OptimizerKind.ADAM
    init_scale: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "optimizer", OptimizerKind(self.optimizer))
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ConfigurationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.init_scale < 0:
            raise ConfigurationError(f"init_scale must be >= 0, got {self.init_scale}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be >= 0, got {self.seed}")

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, seed=int(seed))

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["optimizer"] = self.optimizer.value
        return out


@dataclass
class TrainHistory:
    losses: List[float]
    params: np.ndarray
    initial_loss: float
    steps: int = 0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"epoch": range(1, len(self.losses) + 1), "loss": self.losses})

    def to_csv(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        return path


def init_params(design: VqcDesign, cfg: TrainConfig, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-cfg.init_scale, cfg.init_scale, size=design.n_params)


def _training_split(design: VqcDesign, dataset: Dataset) -> Split:
    if dataset.train is None or dataset.train.y_norm is None:
        raise ConfigurationError("dataset must be split and normalized before training")
    if dataset.input_dim != design.input_dim:
        raise ShapeError(
            f"design takes {design.input_dim} inputs, dataset has {dataset.input_dim}"
        )
    return dataset.train


def train(
    design: VqcDesign,
    dataset: Dataset,
    cfg: TrainConfig,
    initial_params: Optional[np.ndarray] = None,
) -> TrainHistory:
    part = _training_split(design, dataset)
    n = len(part)
    if cfg.batch_size > n:
        raise ConfigurationError(f"batch_size {cfg.batch_size} exceeds training size {n}")

    rng = np.random.default_rng(cfg.seed)
    if initial_params is None:
        params = init_params(design, cfg, rng)
    else:
        params = check_params(design, initial_params).copy()
    optimizer = make_optimizer(cfg.optimizer, cfg.learning_rate)

    x, y = part.x, part.y_norm
    initial = loss(design, params, (x, y))
    losses: List[float] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            optimizer.step(params, parameter_shift_grad(design, params, (x[idx], y[idx])))
        epoch_loss = loss(design, params, (x, y))
        if not np.isfinite(epoch_loss):
            raise NumericError(f"training loss became non-finite at epoch {epoch + 1}")
        losses.append(epoch_loss)
        logger.debug("epoch  %d/%d  loss=%.6f", epoch + 1, cfg.epochs, epoch_loss)

    return TrainHistory(
        losses=losses,
        params=params,
        initial_loss=initial,
        steps=optimizer.t,
    )


def evaluate(design: VqcDesign, params, part: Split) -> EvalScores:
    if len(part) == 0:
        raise ShapeError("cannot evaluate on an empty split")
    predictions = predict(design, params, part.x)
    return EvalScores.from_predictions(predictions, part.targets)
