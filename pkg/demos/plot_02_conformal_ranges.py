"""
Calibrating ranges with split conformal prediction
==================================================

The heuristic range y_hat +/- sigma is stretched by a factor q_hat fit on
a calibration set, so that at least 90% of test images have their true
Dice inside the predicted range.
"""

import numpy as np

from confrange.conformal import calibrate, predict_range
from confrange.evaluation import PredictionRecord, build_report
from confrange.ranges import PerfEstimate
from confrange.synth import SimConfig, simulate_estimates

###############################################################################
# Simulate 400 images from a miscalibrated segmenter (temperature 1.5) with
# a quarter of the images of low quality.
cfg = SimConfig(n_images=400, height=32, width=32, n_samples=20, seed=3,
                difficulty_range=(0.5, 4.0), miscal_temperature=1.5, low_quality_fraction=0.25)
sim = simulate_estimates(cfg)
estimates = [PerfEstimate(h, (h, h), s) for h, s in zip(sim["y_hat"], sim["sigma"])]

###############################################################################
# First 200 images calibrate, the rest are test images.
cal = list(zip(estimates[:200], sim["y_true"][:200]))
model = calibrate(cal, alpha=0.1)
print(f"M = {model.m}, q_hat = {model.q_hat:.3f}")

records = []
for i in range(200, 400):
    r = predict_range(estimates[i], model)
    records.append(PredictionRecord(f"img{i:03d}", sim["y_true"][i], sim["y_hat"][i],
                                    sim["sigma"][i], r.lower, r.upper, sim["quality"][i]))

###############################################################################
# Marginal coverage, coverage per interval-size bin and per quality group.
report = build_report(records, alpha=0.1)
print(f"marginal coverage {report.marginal_coverage:.3f}, MAE {report.mae:.4f}")
for b in report.per_bin:
    print(f"  {b['bin']:>12}: n={b['count']:3d} coverage={b['coverage']}")
for label, g in report.per_quality.items():
    print(f"  {label:>8}: n={g['count']:3d} coverage={g['marginal_coverage']}")

###############################################################################
# Low-quality images get wider ranges.
w = np.array([r.width for r in records])
q = np.array([r.quality_label for r in records])
print(f"mean width high {w[q == 'high'].mean():.3f} vs low {w[q == 'low'].mean():.3f}")

###############################################################################
# The case plot sorts images by true DSC, best first.
from confrange.plots import emit_case_plot

emit_case_plot(records, "cases.svg")
print("wrote cases.svg")
