"""
Synthetic polynomial regression datasets of controlled degree.

A dataset group G<X> holds datasets whose generating polynomials have maximum
total degree 2X. Inputs are drawn uniformly from [-1, 1]^d, rejecting points
with norm below 0.1, and targets are mapped affinely to [0.1, 0.9] with a
scaler fitted on the training split only.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.preprocessing import PolynomialFeatures

from src.errors import ConfigurationError, DegenerateDatasetError, ShapeError

logger = logging.getLogger("vqcbench")

KEEP_PROBABILITY = 0.5
TOP_COEFFICIENT_FLOOR = 0.2
MIN_SAMPLE_NORM = 0.1
TARGET_RANGE = (0.1, 0.9)
MAX_GROUP_INDEX = 4
_MAX_ATTEMPTS = 10
_FLOAT_FORMAT = "%.17g"

Exponents = Tuple[int, ...]


def monomial_universe(input_dim: int, max_degree: int) -> np.ndarray:
    """All exponent vectors with total degree <= max_degree, one per row."""
    if input_dim < 1 or max_degree < 1:
        raise ConfigurationError(
            f"need input_dim >= 1 and max_degree >= 1, got {input_dim}, {max_degree}"
        )
    features = PolynomialFeatures(degree=max_degree, include_bias=True)
    features.fit(np.zeros((1, input_dim)))
    return np.asarray(features.powers_, dtype=int)


@dataclass(frozen=True)
class PolynomialSpec:
    input_dim: int
    max_degree: int
    terms: Tuple[Tuple[Exponents, float], ...]

    def __post_init__(self) -> None:
        terms = tuple((tuple(int(e) for e in exp), float(c)) for exp, c in self.terms)
        object.__setattr__(self, "terms", terms)
        seen = set()
        for exp, _ in terms:
            if len(exp) != self.input_dim:
                raise ConfigurationError(
                    f"exponent {exp} does not match input_dim {self.input_dim}"
                )
            if exp in seen:
                raise ConfigurationError(f"duplicate exponent vector {exp}")
            if min(exp) < 0 or sum(exp) > self.max_degree:
                raise ConfigurationError(f"exponent {exp} outside degree {self.max_degree}")
            seen.add(exp)
        if not any(
            sum(exp) == self.max_degree and abs(c) >= TOP_COEFFICIENT_FLOOR for exp, c in terms
        ):
            raise ConfigurationError(
                f"no term attains degree {self.max_degree} with |coefficient| >= "
                f"{TOP_COEFFICIENT_FLOOR}"
            )

    @classmethod
    def from_mapping(cls, terms: Mapping[Exponents, float]) -> "PolynomialSpec":
        items = [(tuple(exp), c) for exp, c in terms.items()]
        input_dim = len(items[0][0])
        return cls(input_dim, max(sum(exp) for exp, _ in items), tuple(items))

    @property
    def exponents(self) -> np.ndarray:
        return np.array([exp for exp, _ in self.terms], dtype=int).reshape(-1, self.input_dim)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.terms], dtype=float)

    def evaluate(self, x) -> np.ndarray:
        """Polynomial value for each row of a (n, input_dim) array."""
        rows = np.asarray(x, dtype=float)
        if rows.ndim == 1:
            rows = rows[None, :]
        if rows.shape[1] != self.input_dim:
            raise ShapeError(f"polynomial takes {self.input_dim} inputs, got {rows.shape[1]}")
        monomials = np.prod(rows[:, None, :] ** self.exponents[None, :, :], axis=2)
        return monomials @ self.coefficients

    def to_dict(self) -> Dict[str, Any]:
        return {
            "input_dim": self.input_dim,
            "max_degree": self.max_degree,
            "terms": [{"exponents": list(exp), "coefficient": c} for exp, c in self.terms],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PolynomialSpec":
        terms = tuple((tuple(t["exponents"]), t["coefficient"]) for t in data["terms"])
        return cls(int(data["input_dim"]), int(data["max_degree"]), terms)


def sample_polynomial_spec(
    input_dim: int, max_degree: int, rng: np.random.Generator
) -> PolynomialSpec:
    universe = monomial_universe(input_dim, max_degree)
    top = universe.sum(axis=1) == max_degree
    keep = rng.random(universe.shape[0]) < KEEP_PROBABILITY
    if not np.any(keep & top):
        keep[rng.choice(np.flatnonzero(top))] = True

    coefficients = rng.uniform(-1.0, 1.0, size=universe.shape[0])
    magnitude = rng.uniform(TOP_COEFFICIENT_FLOOR, 1.0, size=universe.shape[0])
    sign = np.where(rng.random(universe.shape[0]) < 0.5, -1.0, 1.0)
    coefficients = np.where(top, sign * magnitude, coefficients)

    terms = tuple(
        (tuple(int(e) for e in universe[i]), float(coefficients[i]))
        for i in np.flatnonzero(keep)
    )
    return PolynomialSpec(input_dim, max_degree, terms)


def evaluate_polynomial(spec: PolynomialSpec, x) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    return float(spec.evaluate(x[None, :])[0])


@dataclass(frozen=True)
class Sample:
    x: np.ndarray
    y: float
    y_norm: Optional[float] = None


@dataclass(frozen=True)
class Split:
    x: np.ndarray
    y: np.ndarray
    y_norm: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return int(self.y.shape[0])

    def samples(self) -> Iterator[Sample]:
        for i in range(len(self)):
            y_norm = None if self.y_norm is None else float(self.y_norm[i])
            yield Sample(self.x[i], float(self.y[i]), y_norm)

    @property
    def targets(self) -> np.ndarray:
        """Normalized targets when available, raw otherwise."""
        return self.y if self.y_norm is None else self.y_norm


@dataclass(frozen=True)
class TargetScaler:
    y_min: float
    y_max: float
    low: float = TARGET_RANGE[0]
    high: float = TARGET_RANGE[1]

    def transform(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return self.low + (y - self.y_min) * (self.high - self.low) / (self.y_max - self.y_min)

    def inverse(self, y_norm) -> np.ndarray:
        y_norm = np.asarray(y_norm, dtype=float)
        return self.y_min + (y_norm - self.low) * (self.y_max - self.y_min) / (self.high - self.low)

    def to_dict(self) -> Dict[str, float]:
        return {"y_min": self.y_min, "y_max": self.y_max, "low": self.low, "high": self.high}


@dataclass(frozen=True)
class Dataset:
    """Generated samples; `train`, `test` and `scaler` are set once prepared."""

    spec: PolynomialSpec
    x: np.ndarray
    y: np.ndarray
    seed: int
    train: Optional[Split] = None
    test: Optional[Split] = None
    scaler: Optional[TargetScaler] = None

    def __len__(self) -> int:
        return int(self.y.shape[0])

    @property
    def input_dim(self) -> int:
        return self.spec.input_dim


def _sample_inputs(input_dim: int, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    accepted: List[np.ndarray] = []
    count = 0
    while count < n_samples:
        draw = rng.uniform(-1.0, 1.0, size=(n_samples, input_dim))
        draw = draw[np.linalg.norm(draw, axis=1) >= MIN_SAMPLE_NORM]
        accepted.append(draw)
        count += draw.shape[0]
    return np.concatenate(accepted)[:n_samples]


def generate_dataset(spec: PolynomialSpec, n_samples: int, rng: np.random.Generator) -> Dataset:
    if n_samples < 10:
        raise ConfigurationError(f"n_samples must be >= 10, got {n_samples}")
    x = _sample_inputs(spec.input_dim, n_samples, rng)
    seed = int(rng.integers(0, 2**32))
    return Dataset(spec=spec, x=x, y=spec.evaluate(x), seed=seed)


def train_size(n_samples: int, train_fraction: float) -> int:
    return int(np.floor(n_samples * train_fraction))


def split(dataset: Dataset, train_fraction: float) -> Tuple[Split, Split]:
    if not 0.0 < train_fraction < 1.0:
        raise ConfigurationError(f"train_fraction must be in (0, 1), got {train_fraction}")
    order = np.random.default_rng(dataset.seed).permutation(len(dataset))
    cut = train_size(len(dataset), train_fraction)
    train_idx, test_idx = order[:cut], order[cut:]
    return (
        Split(dataset.x[train_idx], dataset.y[train_idx]),
        Split(dataset.x[test_idx], dataset.y[test_idx]),
    )


def normalize_targets(train: Split, test: Split) -> Tuple[Split, Split, TargetScaler]:
    if len(train) == 0:
        raise ShapeError("cannot fit a target scaler on an empty training split")
    y_min, y_max = float(train.y.min()), float(train.y.max())
    if not y_max > y_min:
        raise DegenerateDatasetError(f"training targets are constant ({y_min})")
    scaler = TargetScaler(y_min, y_max)
    return (
        replace(train, y_norm=scaler.transform(train.y)),
        replace(test, y_norm=scaler.transform(test.y)),
        scaler,
    )


def prepare_dataset(dataset: Dataset, train_fraction: float) -> Dataset:
    train, test = split(dataset, train_fraction)
    train, test, scaler = normalize_targets(train, test)
    return replace(dataset, train=train, test=test, scaler=scaler)


@dataclass(frozen=True)
class DatasetProfile:
    """One dataset family (D1, D2, ...): input width and the sampling protocol sizes."""

    name: str
    input_dim: int
    groups: Tuple[int, ...] = (1, 2, 3, 4)
    datasets_per_group: int = 10
    samples_per_dataset: int = 400
    train_fraction: float = 0.8

    def __post_init__(self) -> None:
        object.__setattr__(self, "groups", tuple(int(g) for g in self.groups))
        if self.input_dim < 1:
            raise ConfigurationError(f"profile {self.name}: input_dim must be >= 1")
        if not self.groups or any(not 1 <= g <= MAX_GROUP_INDEX for g in self.groups):
            raise ConfigurationError(
                f"profile {self.name}: groups must be a non-empty subset of 1..{MAX_GROUP_INDEX}"
            )
        if len(set(self.groups)) != len(self.groups):
            raise ConfigurationError(f"profile {self.name}: duplicate group indices")
        if self.datasets_per_group < 1:
            raise ConfigurationError(f"profile {self.name}: datasets_per_group must be >= 1")
        if self.samples_per_dataset < 10:
            raise ConfigurationError(f"profile {self.name}: samples_per_dataset must be >= 10")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigurationError(f"profile {self.name}: train_fraction must be in (0, 1)")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "input_dim": self.input_dim,
            "groups": list(self.groups),
            "datasets_per_group": self.datasets_per_group,
            "samples_per_dataset": self.samples_per_dataset,
            "train_fraction": self.train_fraction,
        }

    @property
    def n_train(self) -> int:
        return train_size(self.samples_per_dataset, self.train_fraction)


@dataclass(frozen=True)
class DatasetGroup:
    group_index: int
    degree: int
    datasets: Tuple[Dataset, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.datasets)


def dataset_rng(
    master_seed: int, input_dim: int, group_index: int, dataset_index: int, attempt: int = 0
) -> np.random.Generator:
    """Independent stream per dataset, derived from the master seed."""
    if master_seed < 0:
        raise ConfigurationError(f"master seed must be >= 0, got {master_seed}")
    entropy = [int(master_seed), input_dim, group_index, dataset_index, attempt]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def generate_group(
    profile: DatasetProfile,
    group_index: int,
    master_seed: int,
    degree: Optional[int] = None,
) -> DatasetGroup:
    """Datasets of group G<group_index>; `degree` overrides the 2X law."""
    degree = 2 * group_index if degree is None else degree
    datasets = []
    for i in range(profile.datasets_per_group):
        for attempt in range(_MAX_ATTEMPTS):
            rng = dataset_rng(master_seed, profile.input_dim, group_index, i, attempt)
            spec = sample_polynomial_spec(profile.input_dim, degree, rng)
            raw = generate_dataset(spec, profile.samples_per_dataset, rng)
            try:
                datasets.append(prepare_dataset(raw, profile.train_fraction))
                break
            except DegenerateDatasetError as exc:
                logger.warning(
                    "degenerate  profile=%s  group=G%d  dataset=%d  attempt=%d  %s",
                    profile.name, group_index, i, attempt, exc,
                )
        else:
            raise DegenerateDatasetError(
                f"profile {profile.name} G{group_index} dataset {i}: "
                f"{_MAX_ATTEMPTS} degenerate draws in a row"
            )
    return DatasetGroup(group_index, degree, tuple(datasets))


def generate_groups(profile: DatasetProfile, master_seed: int) -> List[DatasetGroup]:
    return [generate_group(profile, g, master_seed) for g in profile.groups]


# -----------------------------------------------------------------------------
# Serialization: CSV (x_0..x_{d-1}, y, y_norm, split) + JSON sidecar
# -----------------------------------------------------------------------------


def to_frame(dataset: Dataset) -> pd.DataFrame:
    if dataset.train is None or dataset.test is None:
        raise ConfigurationError("dataset must be prepared before serialization")
    frames = []
    for name, part in (("train", dataset.train), ("test", dataset.test)):
        frame = pd.DataFrame(part.x, columns=[f"x_{i}" for i in range(dataset.input_dim)])
        frame["y"] = part.y
        frame["y_norm"] = part.y_norm
        frame["split"] = name
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def to_csv_text(dataset: Dataset) -> str:
    return to_frame(dataset).to_csv(index=False, float_format=_FLOAT_FORMAT, lineterminator="\n")


def dataset_digest(dataset: Dataset) -> str:
    return hashlib.sha256(to_csv_text(dataset).encode("utf-8")).hexdigest()


def sidecar(dataset: Dataset) -> Dict[str, Any]:
    return {
        "spec": dataset.spec.to_dict(),
        "scaler": dataset.scaler.to_dict() if dataset.scaler else None,
        "seed": dataset.seed,
        "n_samples": len(dataset),
    }


def save_dataset(dataset: Dataset, csv_path: Path) -> Path:
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(to_csv_text(dataset), encoding="utf-8")
    csv_path.with_suffix(".json").write_text(
        json.dumps(sidecar(dataset), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return csv_path


def load_dataset(csv_path: Path) -> Dataset:
    csv_path = Path(csv_path)
    meta = json.loads(csv_path.with_suffix(".json").read_text(encoding="utf-8"))
    frame = pd.read_csv(csv_path, float_precision="round_trip")
    spec = PolynomialSpec.from_dict(meta["spec"])
    x_cols = [f"x_{i}" for i in range(spec.input_dim)]
    parts = {}
    for name in ("train", "test"):
        rows = frame[frame["split"] == name]
        parts[name] = Split(
            rows[x_cols].to_numpy(dtype=float),
            rows["y"].to_numpy(dtype=float),
            rows["y_norm"].to_numpy(dtype=float),
        )
    scaler = TargetScaler(**meta["scaler"]) if meta.get("scaler") else None
    return Dataset(
        spec=spec,
        x=frame[x_cols].to_numpy(dtype=float),
        y=frame["y"].to_numpy(dtype=float),
        seed=int(meta["seed"]),
        train=parts["train"],
        test=parts["test"],
        scaler=scaler,
    )


def group_paths(
    root: Path, profile: DatasetProfile, master_seed: int, group_index: int
) -> Sequence[Path]:
    base = Path(root) / profile.name / f"seed_{master_seed}" / f"G{group_index}"
    return [base / f"dataset_{i:02d}.csv" for i in range(profile.datasets_per_group)]


def save_group(
    group: DatasetGroup, root: Path, profile: DatasetProfile, master_seed: int
) -> List[Path]:
    paths = group_paths(root, profile, master_seed, group.group_index)
    return [save_dataset(ds, path) for ds, path in zip(group.datasets, paths)]
