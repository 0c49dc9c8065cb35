"""
Miscalibration, temperature scaling and coverage
================================================

Point estimates degrade as the segmenter becomes miscalibrated, while the
conformal ranges keep their coverage by growing wider.

Temperature scaling is fit by likelihood.  The simulator's masks are
fixed given the image, so even its T=1 maps are underconfident pixel by
pixel and the fitted temperature sits well below 1.
"""

from confrange._rng import LCG, sub_seed
from confrange.metrics import apply_temperature, fit_temperature, true_dsc
from confrange.ranges import estimate_performance, mean_map
from confrange.synth import generate_ground_truth, generate_stack
from confrange.trials import run_coverage_trials

###############################################################################
# Coverage and point-estimate error over 20 repeated trials per temperature.
for temp in (1.0, 1.5, 2.5):
    res = run_coverage_trials(20, 200, 200, seed=1, miscal_temperature=temp,
                              height=32, width=32, n_samples=20, difficulty_range=(0.5, 3.0))
    print(f"T={temp}: MAE {res['mae'].mean():.4f}  coverage {res['coverage'].mean():.3f}  "
          f"mean width {res['mean_width'].mean():.3f}")

###############################################################################
# Fit a temperature on maps from a T=2.5 segmenter and undo it.
maps, gts = [], []
for i in range(30):
    rng = LCG(sub_seed(7, i))
    gt = generate_ground_truth(32, 32, rng)
    for m in generate_stack(gt, 1.0, 2.5, 5, rng):
        maps.append(m)
        gts.append(gt)
t_fit = fit_temperature(maps, gts)
print(f"fitted temperature {t_fit:.3f}")

rng = LCG(999)
gt = generate_ground_truth(32, 32, rng)
stack = generate_stack(gt, 1.0, 2.5, 20, rng)
print(f"true DSC {true_dsc(mean_map(stack) > 0.5, gt):.4f}")
print(f"y_hat before scaling {estimate_performance(stack).y_hat:.4f}, "
      f"after {estimate_performance(apply_temperature(stack, t_fit)).y_hat:.4f}")
