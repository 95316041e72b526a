"""Thinning invariance and the replication harnesses, in miniature.

Independent thinning with retention p maps the model's (alpha, lambda) to
(alpha, lambda * p^alpha): the family is closed under thinning, which is
what makes the multi-p contact-curve fit of demo 02 work.  This script
verifies the parameter map on simulated data, then runs scaled-down
versions of the two built-in replication studies (the 2x2 accuracy table
and the error-vs-thinning curve).  The full-size versions run from the
command line:

    tasproc replicate table1 --reps 50 --out table1_out/
    tasproc replicate fig3 --reps 200 --out fig3.csv
"""

import numpy as np

from tasproc import (
    RandomSource,
    TasParameters,
    UniformInterval,
    Window,
    simulate_tas,
    thin,
)
from tasproc.experiments import replicate_fig3, replicate_table1

# Thinning the pattern matches simulating with the thinned intensity.
params = TasParameters(0.6, 0.4, UniformInterval(1.0))
window = Window([-2000.0], [2000.0])
p = 0.5
rng = RandomSource(21)
n_thinned = len(thin(simulate_tas(params, window, rng, n_max=10 ** 6), p, rng))
mean_direct = []
for rep in range(20):
    thinned_params = TasParameters(0.6, 0.4 * p ** 0.6, UniformInterval(1.0))
    mean_direct.append(len(simulate_tas(thinned_params, window,
                                        RandomSource(22, rep),
                                        n_max=10 ** 6)))
print("points after thinning at p=%.1f: %d; direct simulation at "
      "lambda*p^alpha averages %.0f" % (p, n_thinned,
                                        np.mean(mean_direct)))

# Scaled-down accuracy table: 5 replicates of one cell.
report = replicate_table1(replicates=5, seed=0, cells=[(0.6, 0.4)])
print("\naccuracy table (5 replicates, one cell):")
print(report.summary())

# Scaled-down error-vs-thinning curve: 20 replicates.
p_grid, rel_err = replicate_fig3(replicates=20, seed=3)
print("\nrelative error of the G(1) estimate by retention p "
      "(20 replicates):")
for pv, e in zip(p_grid, rel_err):
    print("  p=%4.2f  error=%.3f" % (pv, e))
print("heavier thinning (small p) leaves fewer points and a noisier, "
      "more biased estimate.")
