"""
Benchmark orchestration: generate groups, train every cell, assemble the report.

A cell is one (design, profile, master seed, group, dataset) training run.
Datasets are generated once per (profile, seed) and shared by every design.
Cells run through a joblib worker pool; results come back in submission order
and the report is assembled single-threaded, so worker count never changes
the output. A failing cell is recorded with an error marker and the run goes on.
"""

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import joblib
import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src._version import __version__
from src.circuit import VqcDesign, describe_design, predict
from src.config import BenchConfig, DesignEntry, canonical_digest
from src.datagen import (
    MIN_SAMPLE_NORM,
    Dataset,
    DatasetGroup,
    DatasetProfile,
    dataset_digest,
    generate_group,
    generate_groups,
    save_group,
)
from src.errors import ConfigurationError, UnsupportedProfileError
from src.logs import log_jsonl
from src.metrics import (
    EvalScores,
    GroupScore,
    estimated_order,
    group_score,
    linear_baseline_scores,
)
from src.trainer import TrainConfig, TrainHistory, evaluate, train

logger = logging.getLogger("vqcbench")

AGGREGATION = "mean"
REPORT_FORMATS = ("json", "csv", "md")
_REPORT_STEM = "report"


def group_key(index: int) -> str:
    return f"G{index}"


def cell_train_config(cfg: TrainConfig, master_seed: int, group: int, index: int) -> TrainConfig:
    """Per-cell training seed; identical for every design on the same dataset."""
    seq = np.random.SeedSequence([cfg.seed, int(master_seed), group, index])
    return cfg.with_seed(int(seq.generate_state(1)[0]))


# -----------------------------------------------------------------------------
# Report types
# -----------------------------------------------------------------------------


@dataclass
class CellResult:
    seed: int
    group: int
    dataset: int
    dataset_digest: str
    rmse: Optional[float] = None
    r2: Optional[float] = None
    approximability: Optional[float] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "group": self.group,
            "dataset": self.dataset,
            "dataset_digest": self.dataset_digest,
            "rmse": self.rmse,
            "r2": self.r2,
            "approximability": self.approximability,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CellResult":
        return cls(**data)


@dataclass
class ReportRow:
    label: str
    profile: str
    encoder: str
    qubits: int
    params: int
    depth: int
    theoretical_order: int
    estimated_order: int
    group_means: Dict[str, Optional[float]]
    seed_means: Dict[str, Dict[str, Optional[float]]]
    nl_metric: Dict[str, Optional[float]]
    cells: List[CellResult] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "profile": self.profile,
            "encoder": self.encoder,
            "qubits": self.qubits,
            "params": self.params,
            "depth": self.depth,
            "theoretical_order": self.theoretical_order,
            "estimated_order": self.estimated_order,
            "group_means": self.group_means,
            "seed_means": self.seed_means,
            "nl_metric": self.nl_metric,
            "cells": [c.to_dict() for c in self.cells],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ReportRow":
        data = dict(data)
        data["cells"] = [CellResult.from_dict(c) for c in data.get("cells", [])]
        return cls(**data)


@dataclass
class ProfileSummary:
    """Linear-baseline results for one dataset profile (the NL metric table)."""

    name: str
    input_dim: int
    nl_metric: Dict[str, float]
    baselines: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "input_dim": self.input_dim,
            "nl_metric": self.nl_metric,
            "baselines": self.baselines,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ProfileSummary":
        return cls(**data)


@dataclass
class BenchReport:
    version: str
    aggregation: str
    config: Dict[str, Any]
    profiles: List[ProfileSummary]
    rows: List[ReportRow]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "version": self.version,
            "aggregation": self.aggregation,
            "config": self.config,
            "profiles": [p.to_dict() for p in self.profiles],
            "rows": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BenchReport":
        return cls(
            version=data["version"],
            aggregation=data["aggregation"],
            config=data["config"],
            profiles=[ProfileSummary.from_dict(p) for p in data["profiles"]],
            rows=[ReportRow.from_dict(r) for r in data["rows"]],
        )

    def row(self, label: str, profile: str) -> ReportRow:
        for r in self.rows:
            if r.label == label and r.profile == profile:
                return r
        raise KeyError((label, profile))

    def profile(self, name: str) -> ProfileSummary:
        for p in self.profiles:
            if p.name == name:
                return p
        raise KeyError(name)


# -----------------------------------------------------------------------------
# Cell execution
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class CellTask:
    label: str
    profile: str
    seed: int
    group: int
    index: int
    design: VqcDesign
    dataset: Dataset
    digest: str
    cfg: TrainConfig
    key: str


def _execute_cell(task: CellTask) -> Tuple[Dict[str, Any], float]:
    """Train and score one cell; any failure becomes an error marker."""
    started = time.perf_counter()
    try:
        history = train(task.design, task.dataset, task.cfg)
        scores = evaluate(task.design, history.params, task.dataset.test)
        result = scores.to_dict()
        result["error"] = None
    except Exception as exc:
        result = {
            "rmse": None,
            "r2": None,
            "approximability": None,
            "error": f"{type(exc).__name__}: {exc}",
        }
    return result, time.perf_counter() - started


def _cell_key(task_fields: Dict[str, Any]) -> str:
    return canonical_digest({**task_fields, "version": __version__})


class CellCache:
    """Completed cells persisted with joblib under <out>/cells/<digest>.joblib."""

    def __init__(self, root: Optional[Path]):
        self.root = None if root is None else Path(root) / "cells"

    def load(self, key: str) -> Optional[Dict[str, Any]]:
        if self.root is None:
            return None
        path = self.root / f"{key}.joblib"
        if not path.exists():
            return None
        try:
            return joblib.load(path)
        except Exception:
            logger.warning("unreadable cache entry %s; recomputing", path)
            return None

    def store(self, key: str, result: Dict[str, Any]) -> None:
        if self.root is None or result.get("error"):
            return
        self.root.mkdir(parents=True, exist_ok=True)
        joblib.dump(result, self.root / f"{key}.joblib")


def _run_cells(tasks: Sequence[CellTask], workers: int, cache: CellCache,
               journal: Optional[Path]) -> List[Dict[str, Any]]:
    results: List[Optional[Dict[str, Any]]] = [cache.load(t.key) for t in tasks]
    pending = [i for i, r in enumerate(results) if r is None]
    logger.info("cells  total=%d  cached=%d  pending=%d  workers=%d",
                len(tasks), len(tasks) - len(pending), len(pending), workers)

    outputs = Parallel(n_jobs=workers)(delayed(_execute_cell)(tasks[i]) for i in pending)
    for i, (result, elapsed) in zip(pending, outputs):
        task = tasks[i]
        results[i] = result
        cache.store(task.key, result)
        if result["error"]:
            logger.warning("cell failed  design=%s  profile=%s  seed=%d  group=G%d  dataset=%d  %s",
                           task.label, task.profile, task.seed, task.group, task.index,
                           result["error"])
        if journal is not None:
            log_jsonl(journal, {
                "design": task.label,
                "profile": task.profile,
                "seed": task.seed,
                "group": task.group,
                "dataset": task.index,
                "scores": None if result["error"] else
                {k: result[k] for k in ("rmse", "r2", "approximability")},
                "error": result["error"],
                "elapsed_seconds": round(elapsed, 2),
            })
    return results  # type: ignore[return-value]


# -----------------------------------------------------------------------------
# Orchestration
# -----------------------------------------------------------------------------


def _mean_or_none(values: Sequence[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def _baseline_summary(
    profile: DatasetProfile, groups_by_seed: Dict[int, List[DatasetGroup]]
) -> ProfileSummary:
    baselines = []
    per_group: Dict[int, List[EvalScores]] = {g: [] for g in profile.groups}
    for seed, groups in groups_by_seed.items():
        for group in groups:
            scores = linear_baseline_scores(group)
            per_group[group.group_index].extend(scores)
            for i, s in enumerate(scores):
                baselines.append({"seed": seed, "group": group.group_index, "dataset": i,
                                  **s.to_dict()})
    nl = {group_key(g): group_score(per_group[g]) for g in profile.groups}
    return ProfileSummary(profile.name, profile.input_dim, nl, baselines)


def _cell_scores(cells: Sequence[CellResult]) -> List[EvalScores]:
    return [EvalScores(c.rmse, c.r2, c.approximability) for c in cells if c.ok]


def _assemble_row(entry: DesignEntry, profile: DatasetProfile, config: BenchConfig,
                  summary: ProfileSummary, cells: List[CellResult]) -> ReportRow:
    design = entry.design_for(profile)
    props = describe_design(design)
    # failed cells are excluded from the means; they stay visible in `cells`
    scores = [
        GroupScore.from_scores(
            g, _cell_scores([c for c in cells if c.group == g]), summary.nl_metric[group_key(g)]
        )
        for g in profile.groups
    ]
    seed_means = {
        str(seed): {
            group_key(g): GroupScore.from_scores(
                g, _cell_scores([c for c in cells if c.seed == seed and c.group == g])
            ).mean_approximability
            for g in profile.groups
        }
        for seed in config.seeds
    }
    order = estimated_order(
        {s.group_index: s.mean_approximability for s in scores}, config.order_threshold
    )
    return ReportRow(
        label=entry.label,
        profile=profile.name,
        encoder=props.encoder_label,
        qubits=props.n_qubits,
        params=props.n_params,
        depth=props.depth,
        theoretical_order=props.theoretical_order,
        estimated_order=order,
        group_means={group_key(s.group_index): s.mean_approximability for s in scores},
        seed_means=seed_means,
        nl_metric={group_key(s.group_index): s.nl_metric for s in scores},
        cells=cells,
    )


def generate_profile_data(
    config: BenchConfig, profile: DatasetProfile, out_dir: Optional[Path] = None
) -> Dict[int, List[DatasetGroup]]:
    groups_by_seed = {}
    for seed in config.seeds:
        groups = generate_groups(profile, seed)
        groups_by_seed[seed] = groups
        if out_dir is not None:
            for group in groups:
                save_group(group, Path(out_dir) / "datasets", profile, seed)
        logger.info("datasets  profile=%s  seed=%d  groups=%s  per_group=%d",
                    profile.name, seed, list(profile.groups), profile.datasets_per_group)
    return groups_by_seed


def generate_data(config: BenchConfig, out_dir: Path) -> List[Path]:
    """Write every dataset group of every profile and seed; returns the CSV paths."""
    written = []
    for profile in config.profiles:
        for seed, groups in generate_profile_data(config, profile).items():
            for group in groups:
                written.extend(save_group(group, Path(out_dir) / "datasets", profile, seed))
    return written


def run_benchmark(
    config: BenchConfig,
    out_dir: Optional[Path] = None,
    workers: Optional[int] = None,
) -> BenchReport:
    workers = workers or config.workers
    cache = CellCache(out_dir)
    journal = None if out_dir is None else Path(out_dir) / "experiments.jsonl"
    logger.info("run  designs=%d  profiles=%d  seeds=%s  epochs=%d  digest=%s",
                len(config.designs), len(config.profiles), list(config.seeds),
                config.train.epochs, config.digest()[:12])

    summaries = []
    rows = []
    for profile in config.profiles:
        groups_by_seed = generate_profile_data(config, profile, out_dir)
        summaries.append(_baseline_summary(profile, groups_by_seed))

        entries = [entry for entry, p in config.pairs() if p.name == profile.name]
        digests = {
            (seed, group.group_index, i): dataset_digest(dataset)
            for seed, groups in groups_by_seed.items()
            for group in groups
            for i, dataset in enumerate(group.datasets)
        }
        tasks: List[CellTask] = []
        for entry in entries:
            design = entry.design_for(profile)
            for seed, groups in groups_by_seed.items():
                for group in groups:
                    for i, dataset in enumerate(group.datasets):
                        cfg = cell_train_config(config.train, seed, group.group_index, i)
                        digest = digests[(seed, group.group_index, i)]
                        key = _cell_key({
                            "design": design.to_dict(),
                            "dataset_digest": digest,
                            "train": cfg.to_dict(),
                        })
                        tasks.append(CellTask(entry.label, profile.name, seed,
                                              group.group_index, i, design, dataset,
                                              digest, cfg, key))

        results = _run_cells(tasks, workers, cache, journal)
        for entry in entries:
            cells = [
                CellResult(seed=t.seed, group=t.group, dataset=t.index,
                           dataset_digest=t.digest, **r)
                for t, r in zip(tasks, results)
                if t.label == entry.label
            ]
            rows.append(_assemble_row(entry, profile, config, summaries[-1], cells))

    return BenchReport(
        version=__version__,
        aggregation=AGGREGATION,
        config=config.to_dict(),
        profiles=summaries,
        rows=rows,
    )


# -----------------------------------------------------------------------------
# Emission
# -----------------------------------------------------------------------------


def _group_columns(report: BenchReport) -> List[str]:
    indices = sorted({int(k[1:]) for r in report.rows for k in r.group_means}
                     | {int(k[1:]) for p in report.profiles for k in p.nl_metric})
    return [group_key(g) for g in indices]


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.3f}"


def report_frame(report: BenchReport) -> pd.DataFrame:
    """One row per (design, profile, group, seed)."""
    records = []
    nl_by_seed: Dict[Tuple[str, int, int], List[float]] = {}
    for p in report.profiles:
        for b in p.baselines:
            nl_by_seed.setdefault((p.name, b["group"], b["seed"]), []).append(b["approximability"])
    for row in report.rows:
        groups = sorted({c.group for c in row.cells})
        seeds = sorted({c.seed for c in row.cells})
        for g in groups:
            for seed in seeds:
                cells = [c for c in row.cells if c.group == g and c.seed == seed]
                ok = [c for c in cells if c.ok]
                records.append({
                    "design": row.label,
                    "profile": row.profile,
                    "encoder": row.encoder,
                    "qubits": row.qubits,
                    "params": row.params,
                    "depth": row.depth,
                    "group": group_key(g),
                    "seed": seed,
                    "mean_approximability": _mean_or_none([c.approximability for c in ok]),
                    "mean_rmse": _mean_or_none([c.rmse for c in ok]),
                    "mean_r2": _mean_or_none([c.r2 for c in ok]),
                    "nl_metric": _mean_or_none(nl_by_seed.get((row.profile, g, seed), [])),
                    "n_datasets": len(cells),
                    "n_errors": len(cells) - len(ok),
                })
    return pd.DataFrame.from_records(records)


def report_markdown(report: BenchReport) -> str:
    groups = _group_columns(report)
    header = ["Qubits", "Params", "Depth", "Encoder", "Dataset"] + groups
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    for row in report.rows:
        cells = [str(row.qubits), str(row.params), str(row.depth), row.encoder, row.profile]
        cells += [_fmt(row.group_means.get(g)) for g in groups]
        lines.append("| " + " | ".join(cells) + " |")

    lines += ["", "| Dataset | Input | Output | " + " | ".join(groups) + " |",
              "|" + "|".join("---" for _ in range(3 + len(groups))) + "|"]
    for p in report.profiles:
        cells = [p.name, str(p.input_dim), "1"] + [_fmt(p.nl_metric.get(g)) for g in groups]
        lines.append("| " + " | ".join(cells) + " |")

    lines += ["", f"Group scores are the {report.aggregation} approximability over datasets "
              f"and seeds; NL metric is the linear baseline's score. Version {report.version}."]
    return "\n".join(lines) + "\n"


def report_json(report: BenchReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def emit_report(report: BenchReport, out_dir: Path, fmt: str) -> Path:
    if fmt not in REPORT_FORMATS:
        raise ConfigurationError(f"unknown report format {fmt!r}; expected one of {REPORT_FORMATS}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{_REPORT_STEM}.{fmt}"
    if fmt == "json":
        path.write_text(report_json(report), encoding="utf-8")
    elif fmt == "md":
        path.write_text(report_markdown(report), encoding="utf-8")
    else:
        report_frame(report).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def load_report(out_dir: Path) -> BenchReport:
    path = Path(out_dir) / f"{_REPORT_STEM}.json"
    return BenchReport.from_dict(json.loads(path.read_text(encoding="utf-8")))


# -----------------------------------------------------------------------------
# Prediction curves
# -----------------------------------------------------------------------------


def curve_inputs(n_points: int) -> np.ndarray:
    """n_points uniform on [-1, 1], pushed out of the |x| < 0.1 hole onto the shell."""
    x = np.linspace(-1.0, 1.0, n_points)
    inside = np.abs(x) < MIN_SAMPLE_NORM
    x[inside] = np.where(x[inside] < 0, -MIN_SAMPLE_NORM, MIN_SAMPLE_NORM)
    return x


def curve_frame(design: VqcDesign, params, dataset: Dataset, n_points: int = 200) -> pd.DataFrame:
    if dataset.input_dim != 1:
        raise UnsupportedProfileError(
            f"prediction curves need a 1-input dataset, got input_dim={dataset.input_dim}"
        )
    if dataset.scaler is None:
        raise ConfigurationError("dataset must be normalized before exporting curves")
    x = curve_inputs(n_points)
    return pd.DataFrame({
        "x": x,
        "y_true_norm": dataset.scaler.transform(dataset.spec.evaluate(x[:, None])),
        "y_pred": predict(design, params, x[:, None]),
    })


def export_curves(design: VqcDesign, params, dataset: Dataset, n_points: int, path: Path) -> Path:
    frame = curve_frame(design, params, dataset, n_points)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def curves_for_design(
    config: BenchConfig, label: str, out_dir: Path, n_points: int = 200
) -> Tuple[Path, TrainHistory]:
    """Train `label` on G1 dataset 0 of the first 1-input profile."""
    entry = config.design(label)
    profile = next(
        (p for p in config.profiles if p.input_dim == 1 and entry.applies_to(p)), None
    )
    if profile is None:
        raise UnsupportedProfileError(
            f"design {label!r} has no 1-input profile to draw prediction curves on"
        )
    if 1 not in profile.groups:
        raise ConfigurationError(f"profile {profile.name} has no G1 to draw curves on")
    seed = config.seeds[0]
    group = generate_group(profile, 1, seed)
    dataset = group.datasets[0]
    design = entry.design_for(profile)
    history = train(design, dataset, cell_train_config(config.train, seed, group.group_index, 0))
    path = export_curves(design, history.params, dataset, n_points,
                         Path(out_dir) / f"curves_{label}.csv")
    history.to_csv(Path(out_dir) / f"history_{label}.csv")
    logger.info("curves  design=%s  profile=%s  group=G%d  final_loss=%.6f  path=%s",
                label, profile.name, group.group_index, history.losses[-1], path)
    return path, history
