"""Conformal performance-range prediction for probabilistic segmentations."""

from .conformal import (
    ConformalModel,
    PerfRange,
    calibrate,
    conformal_quantile,
    load_model,
    predict_range,
    save_model,
    score,
)
from .dataio import Manifest, ManifestRecord, read_manifest, read_tensor, split_manifest, write_manifest, write_tensor
from .evaluation import (
    CoverageReport,
    PredictionRecord,
    SizeBins,
    build_report,
    conditional_coverage,
    emit_report,
    grouped_coverage,
    mae,
    marginal_coverage,
)
from .metrics import SoftConfusion, apply_temperature, fit_temperature, soft_confusion, soft_dsc, true_dsc
from .plots import emit_case_plot
from .ranges import HeuristicRange, PerfEstimate, estimate_performance, heuristic_range, mean_map
from .synth import SimConfig, generate_ground_truth, generate_stack, simulate_dataset

__version__ = "0.1.0"
