"""Exit criteria for the package, one test per criterion.

Run alone with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import math
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from confrange.cli import main
from confrange.conformal import ConformalModel, conformal_quantile, predict_range, score
from confrange.metrics import SoftConfusion, fit_temperature, logistic, logit, soft_confusion, soft_dsc
from confrange.ranges import PerfEstimate
from confrange.trials import run_coverage_trials, run_trial
from confrange.synth import SimConfig
from oracles import quantile_by_sorting

ALPHA = 0.1
COVERAGE_SIM = dict(height=32, width=32, n_samples=20, difficulty_range=(0.5, 3.0))


@pytest.mark.slow
def test_ac1_coverage_guarantee(criterion):
    t0 = time.perf_counter()
    res = run_coverage_trials(100, 500, 500, seed=2024, alpha=ALPHA, miscal_temperature=1.5, **COVERAGE_SIM)
    elapsed = time.perf_counter() - t0
    mean_cov = float(res["coverage"].mean())
    ok = 0.89 <= mean_cov <= 0.915
    criterion(
        "AC1 coverage guarantee",
        ok,
        f"mean marginal coverage {mean_cov:.4f} over 100 trials (target [0.89, 0.915]; "
        f"min {res['coverage'].min():.3f}, max {res['coverage'].max():.3f}; {elapsed:.0f}s)",
    )
    assert ok


def test_ac2_quantile_oracle(criterion):
    rng = np.random.default_rng(7)
    mismatches = infinite = 0
    for _ in range(1000):
        m = int(rng.integers(1, 201))
        alpha = int(rng.integers(1, 51)) / 100
        # coarse grid forces ties
        scores = (rng.integers(0, 50, m) / 10).tolist() if rng.random() < 0.3 else rng.exponential(2.0, m).tolist()
        got = conformal_quantile(scores, alpha)
        want = quantile_by_sorting(scores, alpha)
        infinite += math.isinf(want)
        mismatches += got != want
    ok = mismatches == 0 and infinite > 0
    criterion("AC2 quantile oracle", ok, f"{mismatches} mismatches in 1000 cases ({infinite} +inf boundary cases)")
    assert ok


def test_ac3_soft_dsc_hand_oracle(criterion):
    tol = 1e-12
    c = soft_confusion([0.9, 0.8, 0.3, 0.1])
    checks = [
        abs(c.tp - 1.7) <= tol,
        abs(c.fp - 0.3) <= tol,
        abs(c.fn_ - 0.4) <= tol,
        abs(soft_dsc(c) - 3.4 / 4.1) <= tol,
    ]
    ones = soft_confusion(np.ones(5))
    zeros = soft_confusion(np.zeros(5))
    checks += [
        (ones.tp, ones.fp, ones.fn_) == (5.0, 0.0, 0.0),
        (zeros.tp, zeros.fp, zeros.fn_) == (0.0, 0.0, 0.0),
        soft_dsc(SoftConfusion(5, 0, 0, 5)) == 1.0,
        soft_dsc(SoftConfusion(0, 0, 0, 5)) == 1.0,
    ]
    ok = all(checks)
    criterion("AC3 soft-DSC hand oracle", ok, f"{sum(checks)}/{len(checks)} exact checks within {tol:g}")
    assert ok


def test_ac4_score_interval_duality(criterion):
    rng = np.random.default_rng(11)
    n, disagreements = 0, 0
    while n < 10_000:
        y_hat = rng.random()
        sigma = rng.uniform(1e-3, 0.2)
        q = rng.uniform(0, 5)
        if y_hat - q * sigma < 0 or y_hat + q * sigma > 1:
            continue
        y = rng.random()
        est = PerfEstimate(y_hat, (y_hat, y_hat), sigma)
        r = predict_range(est, ConformalModel(ALPHA, 100, q))
        disagreements += (r.lower <= y <= r.upper) != (score(y, est) <= q)
        n += 1
    ok = disagreements == 0
    criterion("AC4 score/interval duality", ok, f"{disagreements} disagreements in {n} tuples")
    assert ok


@pytest.mark.slow
def test_ac5_miscalibration(criterion):
    out = {}
    for temp in (1.0, 2.5):
        res = run_coverage_trials(60, 250, 250, seed=77, alpha=ALPHA, miscal_temperature=temp, **COVERAGE_SIM)
        out[temp] = (float(res["mae"].mean()), float(res["coverage"].mean()))
    (mae1, cov1), (mae25, cov25) = out[1.0], out[2.5]
    ok = mae25 > mae1 and cov1 >= 0.89 and cov25 >= 0.89
    criterion(
        "AC5 miscalibration motivates ranges",
        ok,
        f"MAE {mae1:.4f} (T=1) -> {mae25:.4f} (T=2.5); coverage {cov1:.4f} / {cov25:.4f} (need >= 0.89)",
    )
    assert ok


def test_ac6_temperature_recovery(criterion):
    rng = np.random.default_rng(3)
    n = 200_000
    errors = {}
    for t_star in (0.5, 1.0, 2.0):
        p_true = logistic(rng.normal(0.0, 2.5, n))
        gt = (rng.random(n) < p_true).astype(np.uint8)
        maps = logistic(t_star * logit(p_true))
        errors[t_star] = fit_temperature([maps], [gt]) - t_star
    ok = all(abs(e) <= 0.05 for e in errors.values())
    detail = ", ".join(f"T*={t:g}: err {e:+.4f}" for t, e in errors.items())
    criterion("AC6 temperature-fit recovery", ok, detail + " (tol 0.05)")
    assert ok


@pytest.mark.slow
def test_ac7_width_tracks_difficulty(criterion):
    cfg = SimConfig(n_images=1000, seed=5, height=32, width=32, n_samples=20,
                    difficulty_range=(0.5, 4.0), miscal_temperature=1.5)
    res = run_trial(cfg, n_calib=500, alpha=ALPHA)
    rho = float(spearmanr(res["width"], 1.0 - res["y_true"])[0])
    ok = rho > 0.3
    criterion("AC7 difficulty/width correlation", ok, f"Spearman rho(width, 1 - DSC) = {rho:.3f} (need > 0.3)")
    assert ok


def _run_pipeline(root):
    d = root / "data"
    steps = [
        ["simulate", "--n-images", "40", "--height", "24", "--width", "24", "--samples", "8", "--seed", "9",
         "--low-quality-fraction", "0.25", "--difficulty-max", "4", "--miscal-temp", "1.5", "--out-dir", str(d)],
        ["split", "--manifest", str(d / "manifest.csv"), "--calib-fraction", "0.5", "--seed", "4"],
        ["calibrate", "--manifest", str(d / "manifest.csv"), "--out", str(root / "model.json")],
        ["predict", "--manifest", str(d / "manifest.csv"), "--model", str(root / "model.json"),
         "--out", str(root / "pred.csv")],
        ["evaluate", "--predictions", str(root / "pred.csv"), "--model", str(root / "model.json"),
         "--report-json", str(root / "report.json"), "--report-csv", str(root / "report.csv"),
         "--plot-svg", str(root / "cases.svg")],
    ]
    for argv in steps:
        assert main(argv) == 0, argv


def test_ac8_determinism(tmp_path, criterion, capsys):
    for name in ("run1", "run2"):
        (tmp_path / name).mkdir()
        _run_pipeline(tmp_path / name)
    capsys.readouterr()
    files = sorted(p.relative_to(tmp_path / "run1") for p in (tmp_path / "run1").rglob("*") if p.is_file())
    differ = [str(f) for f in files if (tmp_path / "run1" / f).read_bytes() != (tmp_path / "run2" / f).read_bytes()]
    kinds = {f.suffix for f in files}
    ok = not differ and {".cprp", ".json", ".csv", ".svg"} <= kinds
    criterion("AC8 determinism", ok, f"{len(files)} files compared, {len(differ)} differ {differ[:3]}")
    assert ok
