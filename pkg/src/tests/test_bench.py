"""End-to-end tests for the benchmark runner, report emission, curves and CLI."""

import json
import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path.insert(0, root)

import src.bench as bench  # noqa: E402
from src.bench import (  # noqa: E402
    BenchReport,
    curve_inputs,
    curves_for_design,
    emit_report,
    export_curves,
    generate_data,
    run_benchmark,
)
from src.circuit import VqcDesign  # noqa: E402
from src.cli import EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, main  # noqa: E402
from src.config import load_config, parse_config  # noqa: E402
from src.datagen import DatasetProfile, generate_group  # noqa: E402
from src.errors import ConfigurationError, UnsupportedProfileError  # noqa: E402
from src.trainer import TrainConfig, train  # noqa: E402

CONFIG_DIR = Path(root) / "config"
SLOW = os.environ.get("VQCBENCH_SLOW") == "1"

FOUR_DESIGNS = [
    {"label": "amplitude", "encoder": "amplitude", "ansatz_layers": 1},
    {"label": "angle", "encoder": "angle", "ansatz_layers": 1},
    {"label": "stvqc-1", "encoder": "stvqc", "duplications": 1, "ansatz_layers": 1},
    {"label": "stvqc-2", "encoder": "stvqc", "duplications": 2, "ansatz_layers": 1},
]


def tiny_config(designs=None, seeds=(0,), groups=(1, 2, 3, 4), **train_fields):
    return parse_config({
        "designs": designs or FOUR_DESIGNS,
        "profiles": [{
            "name": "D1", "input_dim": 2, "groups": list(groups),
            "datasets_per_group": 1, "samples_per_dataset": 20,
        }],
        "train": {"epochs": 1, "batch_size": 8, **train_fields},
        "seeds": list(seeds),
    })


def test_minimal_config_smoke(tmp_path):
    report = run_benchmark(load_config(CONFIG_DIR / "minimal.json"), out_dir=tmp_path)
    assert len(report.rows) == 1
    row = report.rows[0]
    assert len(row.cells) == 1
    cell = row.cells[0]
    assert cell.ok
    assert cell.approximability == pytest.approx(0.5 * (1 - cell.rmse) + 0.5 * cell.r2)
    assert row.group_means["G1"] == cell.approximability
    assert (tmp_path / "experiments.jsonl").exists()
    assert list((tmp_path / "cells").glob("*.joblib"))


def test_report_layout_for_four_designs():
    report = run_benchmark(tiny_config())
    assert [r.label for r in report.rows] == ["amplitude", "angle", "stvqc-1", "stvqc-2"]
    for row in report.rows:
        assert list(row.group_means) == ["G1", "G2", "G3", "G4"]
        assert len(row.cells) == 4
    assert [r.encoder for r in report.rows] == [
        "Amplitude", "Angle", "ST-VQC(1 dup.)", "ST-VQC(2 dup.)",
    ]
    assert [r.qubits for r in report.rows] == [1, 2, 2, 3]
    assert [r.theoretical_order for r in report.rows] == [2, 2, 4, 6]
    summary = report.profile("D1")
    assert list(summary.nl_metric) == ["G1", "G2", "G3", "G4"]
    assert len(summary.baselines) == 4
    assert report.rows[0].nl_metric == summary.nl_metric
    assert report.aggregation == "mean"


def test_every_design_sees_identical_datasets():
    report = run_benchmark(tiny_config(seeds=(0, 1)))
    by_position = {}
    for row in report.rows:
        for cell in row.cells:
            by_position.setdefault((cell.seed, cell.group, cell.dataset), set()).add(
                cell.dataset_digest
            )
    assert len(by_position) == 2 * 4
    assert all(len(digests) == 1 for digests in by_position.values())


def test_runs_are_byte_identical(tmp_path):
    config = tiny_config(groups=(1, 2), seeds=(0, 1))
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        report = run_benchmark(config, out_dir=out)
        outputs.append(
            [emit_report(report, out, fmt).read_bytes() for fmt in ("json", "csv", "md")]
        )
    assert outputs[0] == outputs[1]


def test_worker_count_does_not_change_results():
    config = tiny_config(groups=(1,), seeds=(0, 1))
    serial = run_benchmark(config, workers=1)
    parallel = run_benchmark(config, workers=2)
    assert serial.to_dict() == parallel.to_dict()


def test_crash_isolation(monkeypatch):
    config = tiny_config(groups=(1, 2))
    clean = run_benchmark(config)
    poisoned_digest = clean.row("angle", "D1").cells[1].dataset_digest

    def poisoned_train(design, dataset, cfg, initial_params=None):
        history = train(design, dataset, cfg, initial_params)
        if design.encoder.value == "angle" and bench.dataset_digest(dataset) == poisoned_digest:
            history.params = np.full_like(history.params, np.nan)
        return history

    monkeypatch.setattr(bench, "train", poisoned_train)
    report = run_benchmark(config, workers=1)

    bad = report.row("angle", "D1").cells[1]
    assert not bad.ok
    assert bad.error.startswith("NumericError: ")
    assert bad.approximability is None
    assert report.row("angle", "D1").group_means["G2"] is None
    for clean_row, row in zip(clean.rows, report.rows):
        for before, after in zip(clean_row.cells, row.cells):
            if after is not bad:
                assert before == after


def test_completed_cells_are_reused(tmp_path, monkeypatch):
    config = tiny_config(groups=(1,))
    first = run_benchmark(config, out_dir=tmp_path)

    def exploding_train(*args, **kwargs):
        raise RuntimeError("should not retrain a cached cell")

    monkeypatch.setattr(bench, "train", exploding_train)
    again = run_benchmark(config, out_dir=tmp_path, workers=1)
    assert again.to_dict() == first.to_dict()

    changed = tiny_config(groups=(1,), epochs=2)
    rerun = run_benchmark(changed, out_dir=tmp_path, workers=1)
    assert all(c.error == "RuntimeError: should not retrain a cached cell"
               for row in rerun.rows for c in row.cells)


def test_failed_cells_are_not_cached(tmp_path, monkeypatch):
    config = tiny_config(designs=FOUR_DESIGNS[1:2], groups=(1,))

    def failing_train(*args, **kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr(bench, "train", failing_train)
    failed = run_benchmark(config, out_dir=tmp_path, workers=1)
    assert not failed.rows[0].cells[0].ok
    monkeypatch.setattr(bench, "train", train)
    assert run_benchmark(config, out_dir=tmp_path, workers=1).rows[0].cells[0].ok


def test_experiment_log_has_one_record_per_cell(tmp_path):
    run_benchmark(tiny_config(groups=(1, 2)), out_dir=tmp_path)
    lines = (tmp_path / "experiments.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 4 * 2
    record = json.loads(lines[0])
    assert {"design", "profile", "seed", "group", "dataset", "scores", "error",
            "elapsed_seconds", "timestamp"} <= set(record)


def test_emit_report_formats(tmp_path):
    report = run_benchmark(tiny_config(seeds=(0, 1)))

    md = emit_report(report, tmp_path, "md").read_text(encoding="utf-8")
    assert md.splitlines()[0] == (
        "| Qubits | Params | Depth | Encoder | Dataset | G1 | G2 | G3 | G4 |"
    )
    assert "| 1 | 2 | 2 | Amplitude | D1 |" in md

    frame = pd.read_csv(emit_report(report, tmp_path, "csv"))
    assert len(frame) == 4 * 1 * 4 * 2
    assert {"design", "profile", "group", "seed", "mean_approximability", "nl_metric"} <= set(
        frame.columns
    )

    text = emit_report(report, tmp_path, "json").read_text(encoding="utf-8")
    assert BenchReport.from_dict(json.loads(text)) == report
    assert "timestamp" not in text


def test_generate_data_writes_every_dataset(tmp_path):
    config = tiny_config(seeds=(0, 1))
    paths = generate_data(config, tmp_path)
    assert len(paths) == 4 * 2
    assert (tmp_path / "datasets" / "D1" / "seed_1" / "G4" / "dataset_00.csv").exists()


def test_curve_inputs_skip_the_hole():
    x = curve_inputs(201)
    assert x.shape == (201,)
    assert np.all(np.abs(x) >= 0.1)
    assert x[0] == -1.0 and x[-1] == 1.0


def test_export_curves(tmp_path):
    profile = DatasetProfile("D0", input_dim=1, groups=(1,), datasets_per_group=1)
    dataset = generate_group(profile, 1, master_seed=0).datasets[0]
    design = VqcDesign("angle", input_dim=1, ansatz_layers=2)
    history = train(design, dataset, TrainConfig(epochs=50, batch_size=64))

    path = export_curves(design, history.params, dataset, 200, tmp_path / "curves.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["x", "y_true_norm", "y_pred"]
    assert len(frame) == 200
    assert frame["y_pred"].between(0.0, 1.0).all()

    model_dev = np.mean(np.abs(frame["y_pred"] - frame["y_true_norm"]))
    const_dev = np.mean(np.abs(dataset.train.y_norm.mean() - frame["y_true_norm"]))
    assert model_dev < const_dev


def test_export_curves_needs_one_input(tmp_path):
    profile = DatasetProfile("D1", input_dim=2, groups=(1,), datasets_per_group=1,
                             samples_per_dataset=20)
    dataset = generate_group(profile, 1, master_seed=0).datasets[0]
    design = VqcDesign("angle", input_dim=2, ansatz_layers=1)
    with pytest.raises(UnsupportedProfileError):
        export_curves(design, np.zeros(design.n_params), dataset, 10, tmp_path / "c.csv")


def test_curves_for_design(tmp_path):
    config = parse_config({
        "designs": [{"label": "angle", "encoder": "angle", "ansatz_layers": 1}],
        "profiles": [{"name": "D0", "input_dim": 1, "groups": [1], "datasets_per_group": 1,
                      "samples_per_dataset": 40}],
        "train": {"epochs": 2, "batch_size": 16},
    })
    path, history = curves_for_design(config, "angle", tmp_path, n_points=50)
    assert path == tmp_path / "curves_angle.csv"
    assert len(pd.read_csv(path)) == 50
    assert (tmp_path / "history_angle.csv").exists()
    with pytest.raises(UnsupportedProfileError):
        curves_for_design(tiny_config(), "angle", tmp_path)



def test_curves_are_drawn_on_g1(tmp_path):
    profile = {"name": "D0", "input_dim": 1, "groups": [3, 1], "datasets_per_group": 1,
               "samples_per_dataset": 40}
    data = {
        "designs": [{"label": "angle", "encoder": "angle", "ansatz_layers": 1}],
        "profiles": [profile],
        "train": {"epochs": 1, "batch_size": 16},
    }
    config = parse_config(data)
    path, _ = curves_for_design(config, "angle", tmp_path, n_points=30)
    frame = pd.read_csv(path)
    dataset = generate_group(config.profiles[0], 1, master_seed=0).datasets[0]
    expected = dataset.scaler.transform(dataset.spec.evaluate(frame["x"].to_numpy()[:, None]))
    np.testing.assert_allclose(frame["y_true_norm"], expected)

    no_g1 = parse_config({**data, "profiles": [{**profile, "groups": [2]}]})
    with pytest.raises(ConfigurationError):
        curves_for_design(no_g1, "angle", tmp_path)


def test_design_scoping_limits_rows():
    config = parse_config({
        "designs": [
            {"label": "angle", "encoder": "angle", "ansatz_layers": 1},
            {"label": "amp", "encoder": "amplitude", "ansatz_layers": 1, "profiles": ["D1"]},
        ],
        "profiles": [
            {"name": "D1", "input_dim": 2, "groups": [1], "datasets_per_group": 1,
             "samples_per_dataset": 20},
            {"name": "D2", "input_dim": 4, "groups": [1], "datasets_per_group": 1,
             "samples_per_dataset": 20},
        ],
        "train": {"epochs": 1, "batch_size": 8},
    })
    report = run_benchmark(config)
    assert [(r.label, r.profile) for r in report.rows] == [
        ("angle", "D1"), ("amp", "D1"), ("angle", "D2"),
    ]


def test_cli_run_and_report(tmp_path):
    out = tmp_path / "out"
    args = ["run", "--config", str(CONFIG_DIR / "minimal.json"), "--out", str(out)]
    assert main(args) == EXIT_OK
    for name in ("report.json", "report.csv", "report.md", "pipeline.log"):
        assert (out / name).exists()
    before = (out / "report.md").read_bytes()
    (out / "report.md").unlink()
    assert main(["report", "--out", str(out), "--format", "md"]) == EXIT_OK
    assert (out / "report.md").read_bytes() == before


def test_cli_gen_data(tmp_path):
    out = tmp_path / "data"
    assert main(["gen-data", "--config", str(CONFIG_DIR / "minimal.json"), "--out", str(out)]) == 0
    assert (out / "datasets" / "D1" / "seed_0" / "G1" / "dataset_00.csv").exists()


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"designs": []}), encoding="utf-8")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["report", "--out", str(tmp_path / "empty")]) == EXIT_CONFIG
    negative = tmp_path / "negative.json"
    negative.write_text(json.dumps({
        "designs": [{"label": "angle", "encoder": "angle"}],
        "profiles": [{"name": "D1", "input_dim": 2}],
        "seeds": [-1],
    }), encoding="utf-8")
    assert main(["run", "--config", str(negative), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["run", "--config", str(CONFIG_DIR / "minimal.json"), "--workers", "0"]) == 2
    curves = ["curves", "--design", "angle", "--config", str(CONFIG_DIR / "minimal.json"),
              "--out", str(tmp_path)]
    assert main(curves) == EXIT_FAILURE


@pytest.mark.skipif(not SLOW, reason="set VQCBENCH_SLOW=1 for trend reproductions")
def test_desk_scale_trends(tmp_path):
    config = load_config(CONFIG_DIR / "desk.json")
    report = run_benchmark(config, out_dir=tmp_path)
    means = {row.label: row.group_means for row in report.rows}
    assert means["amplitude"]["G1"] - means["amplitude"]["G4"] >= 0.15
    assert means["angle"]["G1"] - means["angle"]["G4"] >= 0.15
    assert means["stvqc-1"]["G2"] > means["amplitude"]["G2"]
    assert means["stvqc-2"]["G4"] > means["stvqc-1"]["G4"]

    again = run_benchmark(config, out_dir=tmp_path / "again")
    assert again.to_dict() == report.to_dict()
