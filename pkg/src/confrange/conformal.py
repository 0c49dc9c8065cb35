"""Split conformal calibration of heuristic performance ranges."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCalibrationSet, MalformedModelFile
from .ranges import HeuristicRange, PerfEstimate, heuristic_range

DEFAULT_ALPHA = 0.1
DEFAULT_SIGMA_FLOOR = 1e-6
MODEL_KEYS = ("alpha", "m", "q_hat", "sigma_floor", "created_from")


@dataclass(frozen=True)
class ConformalModel:
    alpha: float
    m: int
    q_hat: float
    sigma_floor: float = DEFAULT_SIGMA_FLOOR
    created_from: str = ""
    temperature: float | None = None


@dataclass(frozen=True)
class PerfRange:
    lower: float
    upper: float
    heuristic: HeuristicRange

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def __contains__(self, y: float) -> bool:
        return self.lower <= y <= self.upper


def score(y: float, est: PerfEstimate, sigma_floor: float = DEFAULT_SIGMA_FLOOR) -> float:
    """Standardised residual ``|y - y_hat| / max(sigma, sigma_floor)``."""
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"true performance {y} outside [0, 1]")
    return abs(y - est.y_hat) / max(est.sigma, sigma_floor)


def quantile_rank(m: int, alpha: float) -> int:
    """1-based rank ``ceil((1 - alpha) * (m + 1))`` of the conformal quantile."""
    # guard against (1 - alpha) * (m + 1) landing a hair above an integer
    x = (1.0 - alpha) * (m + 1)
    k = math.ceil(x)
    if k - x > 1 - 1e-9:
        k -= 1
    return k


def conformal_quantile(scores, alpha: float = DEFAULT_ALPHA) -> float:
    """The ``ceil((1-alpha)(M+1))``-th smallest score, or inf if that exceeds M."""
    s = np.asarray(scores, dtype=np.float64).ravel()
    if s.size == 0:
        raise EmptyCalibrationSet("no calibration scores")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if not np.all(np.isfinite(s)) or np.any(s < 0):
        raise ValueError("scores must be finite and non-negative")
    k = quantile_rank(s.size, alpha)
    if k > s.size:
        return math.inf
    return float(np.partition(s, k - 1)[k - 1])


def calibrate(
    calib_records,
    alpha: float = DEFAULT_ALPHA,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
    created_from: str = "",
) -> ConformalModel:
    """Fit the corrective factor on ``(PerfEstimate, true_dsc)`` pairs."""
    calib_records = list(calib_records)
    if not calib_records:
        raise EmptyCalibrationSet("calibration set is empty")
    if not sigma_floor > 0:
        raise ValueError("sigma_floor must be positive")
    scores = [score(y, est, sigma_floor) for est, y in calib_records]
    q_hat = conformal_quantile(scores, alpha)
    return ConformalModel(alpha, len(scores), q_hat, sigma_floor, created_from)


def predict_range(est: PerfEstimate, model: ConformalModel) -> PerfRange:
    """``y_hat -/+ q_hat * sigma`` clamped to [0, 1]."""
    heur = heuristic_range(est)
    if math.isinf(model.q_hat):
        return PerfRange(0.0, 1.0, heur)
    half = model.q_hat * max(est.sigma, model.sigma_floor)
    lower = min(max(est.y_hat - half, 0.0), 1.0)
    upper = min(max(est.y_hat + half, 0.0), 1.0)
    return PerfRange(lower, upper, heur)


def predict_arrays(y_hat, sigma, q_hat: float, sigma_floor: float = DEFAULT_SIGMA_FLOOR):
    """Vectorised :func:`predict_range` returning ``(lower, upper)`` arrays."""
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if math.isinf(q_hat):
        return np.zeros_like(y_hat), np.ones_like(y_hat)
    half = q_hat * np.maximum(np.asarray(sigma, dtype=np.float64), sigma_floor)
    return np.clip(y_hat - half, 0.0, 1.0), np.clip(y_hat + half, 0.0, 1.0)


def model_to_dict(model: ConformalModel) -> dict:
    d = {
        "alpha": model.alpha,
        "m": model.m,
        "q_hat": "inf" if math.isinf(model.q_hat) else model.q_hat,
        "sigma_floor": model.sigma_floor,
        "created_from": model.created_from,
    }
    if model.temperature is not None:
        d["temperature"] = model.temperature
    return d


def model_from_dict(d: dict, source="<dict>") -> ConformalModel:
    if not isinstance(d, dict):
        raise MalformedModelFile(f"{source}: expected a JSON object")
    missing = [k for k in MODEL_KEYS if k not in d]
    if missing:
        raise MalformedModelFile(f"{source}: missing key(s) {', '.join(missing)}")
    try:
        q_hat = math.inf if d["q_hat"] == "inf" else float(d["q_hat"])
        model = ConformalModel(
            alpha=float(d["alpha"]),
            m=int(d["m"]),
            q_hat=q_hat,
            sigma_floor=float(d["sigma_floor"]),
            created_from=str(d["created_from"]),
            temperature=None if d.get("temperature") is None else float(d["temperature"]),
        )
    except (TypeError, ValueError) as exc:
        raise MalformedModelFile(f"{source}: {exc}") from None
    if not 0 < model.alpha < 1 or model.m < 1 or not model.q_hat >= 0 or not model.sigma_floor > 0:
        raise MalformedModelFile(f"{source}: field values out of range")
    return model


def save_model(model: ConformalModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path) -> ConformalModel:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedModelFile(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(data, path)
