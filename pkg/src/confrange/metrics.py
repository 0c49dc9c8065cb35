"""Soft confusion counts, Dice scores and temperature scaling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCalibrationSet, ShapeMismatch, ValueOutOfRange

THRESHOLD = 0.5
PROB_EPS = 1e-7
LOG_T_BOUNDS = (math.log(0.05), math.log(20.0))


@dataclass(frozen=True)
class SoftConfusion:
    tp: float
    fp: float
    fn_: float
    n_pixels: int


def check_probabilities(p: np.ndarray) -> None:
    bad = ~np.isfinite(p) | (p < 0) | (p > 1)
    if bad.any():
        idx = int(np.flatnonzero(bad.reshape(-1))[0])
        raise ValueOutOfRange(f"probability {p.reshape(-1)[idx]!r} at flat index {idx} outside [0, 1]")


def soft_confusion(prob_map) -> SoftConfusion:
    """Expected TP/FP/FN of the thresholded map under its own probabilities.

    Pixels with ``p > 0.5`` contribute ``p`` to TP and ``1 - p`` to FP;
    the remaining pixels (including ``p == 0.5``) contribute ``p`` to FN.
    """
    p = np.asarray(prob_map, dtype=np.float64)
    check_probabilities(p)
    pos = p > THRESHOLD
    tp = float(p[pos].sum())
    fp = float(np.count_nonzero(pos)) - tp
    fn_ = float(p[~pos].sum())
    return SoftConfusion(tp, fp, fn_, int(p.size))


def dice(tp, fp, fn_):
    """``2tp / (2tp + fp + fn)``, with 1.0 where the denominator is zero.

    Works elementwise on arrays as well as on scalars.
    """
    tp, fp, fn_ = np.asarray(tp, float), np.asarray(fp, float), np.asarray(fn_, float)
    denom = 2 * tp + fp + fn_
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(denom > 0, 2 * tp / np.where(denom > 0, denom, 1.0), 1.0)
    return float(out) if out.ndim == 0 else out


def soft_dsc(conf: SoftConfusion) -> float:
    return dice(conf.tp, conf.fp, conf.fn_)


def soft_dsc_many(maps) -> np.ndarray:
    """Soft DSC of each map along the leading axis of ``maps``."""
    p = np.asarray(maps)
    check_probabilities(p)
    flat = p.reshape(p.shape[0], -1)
    pos = flat > THRESHOLD
    tp = np.where(pos, flat, 0).sum(axis=1, dtype=np.float64)
    fp = pos.sum(axis=1) - tp
    fn_ = np.where(pos, 0, flat).sum(axis=1, dtype=np.float64)
    return np.atleast_1d(dice(tp, fp, fn_))


def true_dsc(pred, gt) -> float:
    """Dice overlap between two binary masks (1.0 if both are empty)."""
    pred = np.asarray(pred).astype(bool)
    gt = np.asarray(gt).astype(bool)
    if pred.shape != gt.shape:
        raise ShapeMismatch(f"prediction {pred.shape} vs ground truth {gt.shape}")
    inter = np.count_nonzero(pred & gt)
    total = np.count_nonzero(pred) + np.count_nonzero(gt)
    return 1.0 if total == 0 else 2.0 * inter / total


def logit(p):
    p = np.clip(p, PROB_EPS, 1 - PROB_EPS)
    return np.log(p) - np.log1p(-p)


def logistic(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x)))


def apply_temperature(prob_map, temperature: float) -> np.ndarray:
    """Rescale logits by ``1 / temperature``; exact 0 and 1 stay fixed."""
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    p = np.asarray(prob_map, dtype=np.float64)
    if temperature == 1.0:
        return p.copy()
    out = logistic(logit(p) / temperature)
    return np.where((p == 0) | (p == 1), p, out)


def _nll(z: np.ndarray, y: np.ndarray, temperature: float) -> float:
    # mean binary cross-entropy of logistic(z / T) against y, in log-space
    s = z / temperature
    return float(np.mean(np.logaddexp(0.0, s) - y * s))


def fit_temperature(maps, gts, iterations: int = 200) -> float:
    """Temperature minimising mean binary cross-entropy against ``gts``.

    Golden-section search over log-temperature on [ln 0.05, ln 20].  When
    both probe points tie, the bracket shrinks from both sides, so a flat
    objective converges to the centre of the range (T = 1).
    """
    maps, gts = list(maps), list(gts)
    if not maps:
        raise EmptyCalibrationSet("no maps to fit a temperature on")
    if len(maps) != len(gts):
        raise ShapeMismatch(f"{len(maps)} maps but {len(gts)} ground truths")
    zs, ys = [], []
    for m, g in zip(maps, gts):
        m = np.asarray(m, dtype=np.float64)
        g = np.asarray(g)
        if m.shape != g.shape:
            raise ShapeMismatch(f"map {m.shape} vs ground truth {g.shape}")
        check_probabilities(m)
        zs.append(logit(m).ravel())
        ys.append(g.astype(np.float64).ravel())
    z, y = np.concatenate(zs), np.concatenate(ys)

    inv_phi = (math.sqrt(5) - 1) / 2
    lo, hi = LOG_T_BOUNDS
    for _ in range(iterations):
        c = hi - inv_phi * (hi - lo)
        d = lo + inv_phi * (hi - lo)
        fc = _nll(z, y, math.exp(c))
        fd = _nll(z, y, math.exp(d))
        if fc < fd:
            hi = d
        elif fd < fc:
            lo = c
        else:
            lo, hi = c, d
    return math.exp(0.5 * (lo + hi))
