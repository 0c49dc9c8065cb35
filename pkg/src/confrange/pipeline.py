"""Manifest-level glue: estimate, calibrate and predict over a dataset."""

from __future__ import annotations

from dataclasses import dataclass


from .conformal import (
    DEFAULT_ALPHA,
    DEFAULT_SIGMA_FLOOR,
    ConformalModel,
    calibrate,
    predict_range,
)
from .dataio import Manifest, ManifestRecord
from .errors import EmptyCalibrationSet, ShapeMismatch
from .evaluation import PredictionRecord
from .metrics import apply_temperature, fit_temperature, true_dsc
from .ranges import PerfEstimate, estimate_performance, mean_map


@dataclass(frozen=True)
class ImageResult:
    record: ManifestRecord
    estimate: PerfEstimate
    y_true: float


def load_pair(manifest: Manifest, record: ManifestRecord):
    stack = manifest.load_stack(record)
    gt = manifest.load_gt(record)
    if stack.ndim != 3 or stack.shape[1:] != gt.shape:
        raise ShapeMismatch(f"{record.image_id}: stack {stack.shape} does not match mask {gt.shape}")
    return stack, gt


def evaluate_image(stack, gt, temperature: float | None = None) -> tuple[PerfEstimate, float]:
    """Performance estimate and true DSC of the averaged segmentation."""
    if temperature is not None:
        stack = apply_temperature(stack, temperature)
    est = estimate_performance(stack)
    return est, true_dsc(mean_map(stack) > 0.5, gt)


def evaluate_records(manifest: Manifest, records, temperature: float | None = None) -> list[ImageResult]:
    out = []
    for rec in records:
        stack, gt = load_pair(manifest, rec)
        est, y = evaluate_image(stack, gt, temperature)
        out.append(ImageResult(rec, est, y))
    return out


def fit_manifest_temperature(manifest: Manifest, records) -> float:
    """Fit one temperature on every sample map of ``records``."""
    maps, gts = [], []
    for rec in records:
        stack, gt = load_pair(manifest, rec)
        maps.extend(stack)
        gts.extend([gt] * len(stack))
    return fit_temperature(maps, gts)


def calibrate_manifest(
    manifest: Manifest,
    alpha: float = DEFAULT_ALPHA,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
    fit_temp: bool = False,
    created_from: str = "",
) -> ConformalModel:
    calib = manifest.subset("calibration")
    if not calib:
        raise EmptyCalibrationSet("manifest has no calibration records")
    temperature = fit_manifest_temperature(manifest, calib) if fit_temp else None
    results = evaluate_records(manifest, calib, temperature)
    model = calibrate([(r.estimate, r.y_true) for r in results], alpha, sigma_floor, created_from)
    if temperature is not None:
        model = ConformalModel(model.alpha, model.m, model.q_hat, model.sigma_floor, model.created_from, temperature)
    return model


def predict_manifest(manifest: Manifest, model: ConformalModel, split: str = "test") -> list[PredictionRecord]:
    out = []
    for res in evaluate_records(manifest, manifest.subset(split), model.temperature):
        rng = predict_range(res.estimate, model)
        out.append(PredictionRecord(
            res.record.image_id, res.y_true, res.estimate.y_hat, res.estimate.sigma,
            rng.lower, rng.upper, res.record.quality_label,
        ))
    return out
