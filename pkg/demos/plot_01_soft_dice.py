"""
Soft Dice estimates from a stack of samples
===========================================

A probabilistic segmenter hands us N probability maps per image.  Without
any ground truth we can turn each map into an expected Dice score, and
the spread of those scores gives a first, heuristic range.
"""

import numpy as np

from confrange._rng import LCG
from confrange.metrics import soft_confusion, soft_dsc, true_dsc
from confrange.ranges import estimate_performance, heuristic_range, mean_map
from confrange.synth import generate_ground_truth, generate_stack

###############################################################################
# The expected confusion counts of a tiny map, worked by hand:
# TP = 0.9 + 0.8, FP = 2 - TP, FN = 0.3 + 0.1.
conf = soft_confusion([0.9, 0.8, 0.3, 0.1])
print(conf, "soft DSC =", round(soft_dsc(conf), 6))

###############################################################################
# Now a simulated 64x64 image with 20 samples at moderate difficulty.
rng = LCG(42)
gt = generate_ground_truth(64, 64, rng)
stack = generate_stack(gt, difficulty=2.0, temperature=1.0, n_samples=20, rng=rng)
print("stack shape", stack.shape, "foreground fraction", gt.mean())

est = estimate_performance(stack)
heur = heuristic_range(est)
print(f"y_hat = {est.y_hat:.4f}, sigma = {est.sigma:.4f}")
print(f"heuristic range [{heur.lower:.4f}, {heur.upper:.4f}]")
print("per-sample estimates:", np.round(est.per_sample[:5], 4), "...")

###############################################################################
# The true DSC of the averaged segmentation, for comparison.  The
# heuristic range has no guarantee of containing it.
y = true_dsc(mean_map(stack) > 0.5, gt)
print(f"true DSC = {y:.4f}; inside heuristic range: {heur.lower <= y <= heur.upper}")
