"""Per-image performance estimates and heuristic ranges."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyStack, ShapeMismatch
from .metrics import soft_dsc_many


@dataclass(frozen=True)
class PerfEstimate:
    """Point estimate ``y_hat`` plus per-sample estimates and their spread."""

    y_hat: float
    per_sample: tuple[float, ...]
    sigma: float
    mean_map_path: str | None = None


@dataclass(frozen=True)
class HeuristicRange:
    lower: float
    upper: float


def _as_stack(stack) -> np.ndarray:
    if isinstance(stack, (list, tuple)):
        if not stack:
            raise EmptyStack("sample stack is empty")
        shapes = {np.shape(m) for m in stack}
        if len(shapes) > 1:
            raise ShapeMismatch(f"maps in stack have differing shapes {sorted(shapes)}")
    arr = np.asarray(stack)
    if arr.ndim < 2 or arr.shape[0] == 0:
        raise EmptyStack(f"expected a stack of maps with leading sample axis, got shape {arr.shape}")
    return arr


def mean_map(stack) -> np.ndarray:
    """Pixelwise mean over the sample axis."""
    arr = _as_stack(stack)
    return arr.mean(axis=0, dtype=np.float64)


def estimate_performance(stack, mean_map_path: str | None = None) -> PerfEstimate:
    """Soft-DSC estimates for a stack of N >= 2 probability maps.

    ``y_hat`` is the soft DSC of the averaged map; ``sigma`` is the sample
    standard deviation (ddof=1) of the per-sample soft DSCs.
    """
    arr = _as_stack(stack)
    if arr.shape[0] < 2:
        raise EmptyStack(f"need at least 2 samples, got {arr.shape[0]}")
    per_sample = soft_dsc_many(arr)
    y_hat = float(soft_dsc_many(mean_map(arr)[None])[0])
    sigma = 0.0 if np.ptp(per_sample) == 0 else float(np.std(per_sample, ddof=1))
    return PerfEstimate(y_hat, tuple(float(v) for v in per_sample), sigma, mean_map_path)


def heuristic_range(est: PerfEstimate) -> HeuristicRange:
    """``y_hat -/+ sigma``, deliberately left unclamped."""
    return HeuristicRange(est.y_hat - est.sigma, est.y_hat + est.sigma)
