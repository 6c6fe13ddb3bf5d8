"""
Scoring: RMSE / R² primitives, the approximability score, group aggregation,
and the linear-baseline NL metric.

All scores are computed on the test split in normalized-target space.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from src.datagen import Dataset, DatasetGroup, Split
from src.errors import DegenerateDatasetError, NumericError, ShapeError

RMSE_WEIGHT = 0.5
R2_WEIGHT = 0.5
RIDGE_JITTER = 1e-10
DEFAULT_ORDER_THRESHOLD = 0.9


def _pair(pred, actual):
    pred = np.asarray(pred, dtype=float).reshape(-1)
    actual = np.asarray(actual, dtype=float).reshape(-1)
    if pred.shape != actual.shape:
        raise ShapeError(f"{pred.shape[0]} predictions for {actual.shape[0]} targets")
    if pred.shape[0] == 0:
        raise ShapeError("cannot score an empty prediction vector")
    return pred, actual


def rmse(pred, actual) -> float:
    pred, actual = _pair(pred, actual)
    return float(np.sqrt(np.mean((pred - actual) ** 2)))


def r2(pred, actual) -> float:
    pred, actual = _pair(pred, actual)
    ss_tot = float(np.sum((actual - actual.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateDatasetError("R² is undefined for constant targets")
    ss_res = float(np.sum((pred - actual) ** 2))
    return 1.0 - ss_res / ss_tot


def approximability_score(rmse_value: float, r2_value: float) -> float:
    return RMSE_WEIGHT * (1.0 - rmse_value) + R2_WEIGHT * r2_value


@dataclass(frozen=True)
class EvalScores:
    rmse: float
    r2: float
    approximability: float

    @classmethod
    def from_predictions(cls, pred, actual) -> "EvalScores":
        e, r = rmse(pred, actual), r2(pred, actual)
        return cls(rmse=e, r2=r, approximability=approximability_score(e, r))

    def to_dict(self) -> Dict[str, float]:
        return {"rmse": self.rmse, "r2": self.r2, "approximability": self.approximability}


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    intercept: float

    def predict(self, x) -> np.ndarray:
        rows = np.asarray(x, dtype=float)
        if rows.ndim == 1:
            rows = rows[:, None]
        return rows @ self.weights + self.intercept


def fit_linear_baseline(train: Split) -> LinearModel:
    """OLS with intercept on (x, target), via ridge-jittered normal equations."""
    x = np.asarray(train.x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, d = x.shape
    if n <= d + 1:
        raise ShapeError(f"OLS needs more than {d + 1} samples, got {n}")
    design = np.hstack([np.ones((n, 1)), x])
    gram = design.T @ design + RIDGE_JITTER * np.eye(d + 1)
    try:
        beta = np.linalg.solve(gram, design.T @ train.targets)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"normal equations are singular: {exc}") from exc
    if not np.all(np.isfinite(beta)):
        raise NumericError("OLS produced non-finite coefficients")
    return LinearModel(weights=beta[1:], intercept=float(beta[0]))


def linear_baseline_score(dataset: Dataset) -> EvalScores:
    model = fit_linear_baseline(dataset.train)
    return EvalScores.from_predictions(model.predict(dataset.test.x), dataset.test.targets)


def linear_baseline_scores(group: DatasetGroup) -> List[EvalScores]:
    return [linear_baseline_score(ds) for ds in group.datasets]


def group_score(per_dataset: Sequence[Union[EvalScores, float]]) -> float:
    """Arithmetic mean of per-dataset approximability scores."""
    if not per_dataset:
        raise ShapeError("group_score needs at least one dataset score")
    values = [s.approximability if isinstance(s, EvalScores) else float(s) for s in per_dataset]
    return float(np.mean(values))


def nl_metric(group: DatasetGroup) -> float:
    return group_score(linear_baseline_scores(group))


@dataclass(frozen=True)
class GroupScore:
    """A design's scores on one dataset group, next to that group's NL metric."""

    group_index: int
    per_dataset: Sequence[EvalScores]
    mean_approximability: Optional[float]
    nl_metric: Optional[float] = None

    @classmethod
    def from_scores(
        cls, group_index: int, per_dataset: Sequence[EvalScores], nl: Optional[float] = None
    ) -> "GroupScore":
        mean = group_score(per_dataset) if per_dataset else None
        return cls(group_index, tuple(per_dataset), mean, nl)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "group_index": self.group_index,
            "per_dataset": [s.to_dict() for s in self.per_dataset],
            "mean_approximability": self.mean_approximability,
            "nl_metric": self.nl_metric,
        }


def estimated_order(
    group_means: Mapping[int, Optional[float]], threshold: float = DEFAULT_ORDER_THRESHOLD
) -> int:
    """Largest 2X such that every group up to G<X> scores at least `threshold`."""
    order = 0
    for index in sorted(group_means):
        score = group_means[index]
        if score is None or score < threshold:
            break
        order = 2 * index
    return order
