"""Repeated calibrate/test experiments on simulated data."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ._rng import sub_seed
from .conformal import DEFAULT_ALPHA, DEFAULT_SIGMA_FLOOR, conformal_quantile, predict_arrays
from .synth import SimConfig, simulate_estimates


def run_trial(
    config: SimConfig,
    n_calib: int,
    alpha: float = DEFAULT_ALPHA,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
) -> dict:
    """Simulate ``config.n_images`` images, calibrate on the first ``n_calib``
    and evaluate on the rest.  Images are i.i.d., so a prefix split is a
    random split."""
    if not 0 < n_calib < config.n_images:
        raise ValueError("need at least one calibration and one test image")
    sim = simulate_estimates(config)
    y, y_hat, sigma = sim["y_true"], sim["y_hat"], sim["sigma"]
    cal, test = slice(0, n_calib), slice(n_calib, None)
    scores = np.abs(y[cal] - y_hat[cal]) / np.maximum(sigma[cal], sigma_floor)
    q_hat = conformal_quantile(scores, alpha)
    lower, upper = predict_arrays(y_hat[test], sigma[test], q_hat, sigma_floor)
    covered = (lower <= y[test]) & (y[test] <= upper)
    return {
        "q_hat": q_hat,
        "coverage": float(covered.mean()),
        "mae": float(np.mean(np.abs(y[test] - y_hat[test]))),
        "mean_width": float(np.mean(upper - lower)),
        "y_true": y[test],
        "y_hat": y_hat[test],
        "width": upper - lower,
    }


def run_coverage_trials(
    n_trials: int,
    n_calib: int,
    n_test: int,
    seed: int = 0,
    alpha: float = DEFAULT_ALPHA,
    sigma_floor: float = DEFAULT_SIGMA_FLOOR,
    **sim_kwargs,
) -> dict[str, np.ndarray]:
    """Independent trials, each with freshly simulated calibration and test sets.

    Returns per-trial arrays ``coverage``, ``q_hat``, ``mae``, ``mean_width``.
    """
    base = SimConfig(n_images=n_calib + n_test, seed=seed, **sim_kwargs)
    keys = ("coverage", "q_hat", "mae", "mean_width")
    out = {k: [] for k in keys}
    for t in range(n_trials):
        res = run_trial(replace(base, seed=sub_seed(seed, t)), n_calib, alpha, sigma_floor)
        for k in keys:
            out[k].append(res[k])
    return {k: np.array(v) for k, v in out.items()}
