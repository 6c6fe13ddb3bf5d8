"""Example: score one VQC design on a single G1 dataset, then compare with the linear baseline."""

from pathlib import Path

# Project root
import sys
sys.path.insert(0, str(Path(__file__).resolve().parent))

from src import TrainConfig, VqcDesign, describe_design, evaluate, generate_group, train
from src.datagen import DatasetProfile
from src.logs import get_logger
from src.metrics import linear_baseline_score


def main():
    log = get_logger()
    profile = DatasetProfile("D1", input_dim=2, groups=(1,), datasets_per_group=1)
    dataset = generate_group(profile, 1, master_seed=0).datasets[0]

    design = VqcDesign("stvqc", input_dim=2, duplications=1, ansatz_layers=5)
    props = describe_design(design)
    log.info("design  encoder=%s  qubits=%d  params=%d  depth=%d",
             props.encoder_label, props.n_qubits, props.n_params, props.depth)

    history = train(design, dataset, TrainConfig(epochs=20))
    scores = evaluate(design, history.params, dataset.test)
    baseline = linear_baseline_score(dataset)

    print("Final training loss:", round(history.losses[-1], 5))
    print("VQC scores:", scores.to_dict())
    print("Linear baseline (NL metric for this dataset):", baseline.to_dict())


if __name__ == "__main__":
    main()
