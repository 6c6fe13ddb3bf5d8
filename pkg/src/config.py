"""
Benchmark configuration: JSON file -> frozen dataclasses.

Field reference: config/bench.schema.json. Output directory precedence:
--out flag, then VQCBENCH_OUTPUT_DIR (a .env file is honoured), then the
config's output_dir, then ./results.
"""

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

from src.circuit import EntanglerKind, VqcDesign
from src.datagen import DatasetProfile
from src.encoding import EncoderKind
from src.errors import ConfigurationError
from src.metrics import DEFAULT_ORDER_THRESHOLD
from src.trainer import TrainConfig

try:
    from dotenv import load_dotenv
except ImportError:
    load_dotenv = None  # type: ignore[assignment]

OUTPUT_ENV_VAR = "VQCBENCH_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "results"

_TOP_KEYS = {"designs", "profiles", "train", "seeds", "output_dir", "workers", "order_threshold"}
_DESIGN_KEYS = {
    "label", "encoder", "duplications", "ansatz_layers", "measured_qubit", "entangler", "profiles",
}
_PROFILE_KEYS = {
    "name", "input_dim", "groups", "datasets_per_group", "samples_per_dataset", "train_fraction",
}
_TRAIN_KEYS = {"epochs", "batch_size", "learning_rate", "optimizer", "init_scale", "seed"}


@dataclass(frozen=True)
class DesignEntry:
    """A labelled VQC design; the input width comes from each profile it runs on."""

    label: str
    encoder: EncoderKind
    duplications: int = 0
    ansatz_layers: int = 5
    measured_qubit: int = 0
    entangler: EntanglerKind = EntanglerKind.CNOT_RING
    profiles: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "encoder", EncoderKind(self.encoder))
        object.__setattr__(self, "entangler", EntanglerKind(self.entangler))
        if self.profiles is not None:
            object.__setattr__(self, "profiles", tuple(self.profiles))

    def applies_to(self, profile: DatasetProfile) -> bool:
        return self.profiles is None or profile.name in self.profiles

    def design_for(self, profile: DatasetProfile) -> VqcDesign:
        return VqcDesign(
            encoder=self.encoder,
            input_dim=profile.input_dim,
            ansatz_layers=self.ansatz_layers,
            duplications=self.duplications,
            measured_qubit=self.measured_qubit,
            entangler=self.entangler,
        )

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "label": self.label,
            "encoder": self.encoder.value,
            "duplications": self.duplications,
            "ansatz_layers": self.ansatz_layers,
            "measured_qubit": self.measured_qubit,
            "entangler": self.entangler.value,
        }
        if self.profiles is not None:
            out["profiles"] = list(self.profiles)
        return out


@dataclass(frozen=True)
class BenchConfig:
    designs: Tuple[DesignEntry, ...]
    profiles: Tuple[DatasetProfile, ...]
    train: TrainConfig = field(default_factory=TrainConfig)
    seeds: Tuple[int, ...] = (0,)
    output_dir: Optional[str] = None
    workers: int = 1
    order_threshold: float = DEFAULT_ORDER_THRESHOLD

    def __post_init__(self) -> None:
        for name in ("designs", "profiles", "seeds"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.designs:
            raise ConfigurationError("config needs at least one design")
        if not self.profiles:
            raise ConfigurationError("config needs at least one dataset profile")
        if not self.seeds:
            raise ConfigurationError("config needs at least one master seed")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        _require_unique("design label", (d.label for d in self.designs))
        _require_unique("profile name", (p.name for p in self.profiles))
        _require_unique("master seed", self.seeds)
        negative = [s for s in self.seeds if s < 0]
        if negative:
            raise ConfigurationError(f"master seeds must be >= 0, got {negative}")
        for profile in self.profiles:
            _check_profile_sizes(profile, self.train)
        names = {p.name for p in self.profiles}
        for entry in self.designs:
            unknown = set(entry.profiles or ()) - names
            if unknown:
                raise ConfigurationError(
                    f"design {entry.label} is scoped to unknown profiles {sorted(unknown)}"
                )
            # every in-scope (design, profile) pair must be buildable
            for profile in self.profiles:
                if entry.applies_to(profile):
                    try:
                        entry.design_for(profile)
                    except ConfigurationError as exc:
                        raise ConfigurationError(
                            f"design {entry.label} on profile {profile.name}: {exc}"
                        ) from exc

    def pairs(self) -> Iterable[Tuple[DesignEntry, DatasetProfile]]:
        for profile in self.profiles:
            for entry in self.designs:
                if entry.applies_to(profile):
                    yield entry, profile

    def design(self, label: str) -> DesignEntry:
        for entry in self.designs:
            if entry.label == label:
                return entry
        raise ConfigurationError(f"no design labelled {label!r}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "designs": [d.to_dict() for d in self.designs],
            "profiles": [p.to_dict() for p in self.profiles],
            "train": self.train.to_dict(),
            "seeds": list(self.seeds),
            "output_dir": self.output_dir,
            "workers": self.workers,
            "order_threshold": self.order_threshold,
        }

    def digest(self) -> str:
        return canonical_digest(self.to_dict())


def canonical_digest(data: Any) -> str:
    text = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _require_unique(what: str, values: Iterable[Any]) -> None:
    seen = set()
    for v in values:
        if v in seen:
            raise ConfigurationError(f"duplicate {what}: {v!r}")
        seen.add(v)


def _check_profile_sizes(profile: DatasetProfile, train: TrainConfig) -> None:
    n_train = profile.n_train
    if train.batch_size > n_train:
        raise ConfigurationError(
            f"profile {profile.name}: batch_size {train.batch_size} exceeds the "
            f"{n_train} training samples per dataset"
        )
    # OLS with intercept needs more rows than coefficients
    if n_train <= profile.input_dim + 1:
        raise ConfigurationError(
            f"profile {profile.name}: {n_train} training samples cannot fit a linear "
            f"baseline on {profile.input_dim} inputs (need > {profile.input_dim + 1})"
        )


def _check_keys(section: str, data: Mapping[str, Any], allowed: set) -> None:
    if not isinstance(data, Mapping):
        raise ConfigurationError(f"{section} must be an object")
    unknown = set(data) - allowed
    if unknown:
        raise ConfigurationError(f"{section}: unknown fields {sorted(unknown)}")


def _build(section: str, cls, data: Mapping[str, Any]):
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{section}: {exc}") from exc


def parse_config(data: Mapping[str, Any]) -> BenchConfig:
    _check_keys("config", data, _TOP_KEYS)
    for required in ("designs", "profiles"):
        if required not in data:
            raise ConfigurationError(f"config: missing required field {required!r}")

    designs = []
    for i, raw in enumerate(data["designs"]):
        _check_keys(f"designs[{i}]", raw, _DESIGN_KEYS)
        if "label" not in raw or "encoder" not in raw:
            raise ConfigurationError(f"designs[{i}]: 'label' and 'encoder' are required")
        designs.append(_build(f"designs[{i}]", DesignEntry, raw))

    profiles = []
    for i, raw in enumerate(data["profiles"]):
        _check_keys(f"profiles[{i}]", raw, _PROFILE_KEYS)
        if "name" not in raw or "input_dim" not in raw:
            raise ConfigurationError(f"profiles[{i}]: 'name' and 'input_dim' are required")
        profiles.append(_build(f"profiles[{i}]", DatasetProfile, raw))

    train_raw = data.get("train", {})
    _check_keys("train", train_raw, _TRAIN_KEYS)
    train = _build("train", TrainConfig, train_raw)

    extras = {k: data[k] for k in ("output_dir", "workers", "order_threshold") if k in data}
    seeds = tuple(int(s) for s in data.get("seeds", (0,)))
    fields = dict(designs=designs, profiles=profiles, train=train, seeds=seeds, **extras)
    return _build("config", BenchConfig, fields)


def load_config(path: Path) -> BenchConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(data)


def resolve_output_dir(config: Optional[BenchConfig] = None, cli_out: Optional[str] = None) -> Path:
    if cli_out:
        return Path(cli_out)
    if load_dotenv is not None:
        load_dotenv(Path.cwd() / ".env")
    env = os.environ.get(OUTPUT_ENV_VAR)
    if env:
        return Path(env)
    if config is not None and config.output_dir:
        return Path(config.output_dir)
    return Path(DEFAULT_OUTPUT_DIR)
