"""
VQC approximability benchmark.

Statevector simulation of variational quantum circuits with amplitude, angle
and state-duplication (ST-VQC) encoders, parameter-shift training on groups of
random polynomial regression datasets, and the approximability score
0.5·(1 − RMSE) + 0.5·R² reported per group next to a linear-baseline NL metric.
"""

from src._version import __version__
from src.bench import BenchReport, emit_report, export_curves, run_benchmark
from src.circuit import VqcDesign, describe_design, forward, predict
from src.config import BenchConfig, load_config
from src.datagen import DatasetProfile, generate_group, generate_groups
from src.encoding import EncoderKind
from src.metrics import approximability_score, nl_metric, r2, rmse
from src.trainer import TrainConfig, evaluate, train

__all__ = [
    "BenchConfig",
    "BenchReport",
    "DatasetProfile",
    "EncoderKind",
    "TrainConfig",
    "VqcDesign",
    "approximability_score",
    "describe_design",
    "emit_report",
    "evaluate",
    "export_curves",
    "forward",
    "generate_group",
    "generate_groups",
    "load_config",
    "nl_metric",
    "predict",
    "r2",
    "rmse",
    "run_benchmark",
    "train",
    "__version__",
]
