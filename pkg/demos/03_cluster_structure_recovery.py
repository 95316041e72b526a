"""Recover the cluster-level structure: alpha from cluster sizes, the
offset law mu0 by EM.

When cluster memberships are observable (or can be approximated), the tail
index alpha is estimable directly from the empirical probability
generating function of the cluster sizes, and the offset distribution mu0
can be reconstructed either empirically (pool recentred clusters) or by
fitting a Gaussian mixture with BIC model selection.
"""

import numpy as np

from tasproc import (
    IsotropicGaussian,
    RandomSource,
    TasParameters,
    Window,
    em_estimate_mu0,
    estimate_alpha_from_cluster_sizes,
    estimate_mu0_empirical,
    simulate_tas,
)

alpha_true = 0.6
params = TasParameters(alpha_true, 0.02, IsotropicGaussian(2, 1.0))
window = Window([-100.0, -100.0], [100.0, 100.0])
pattern = simulate_tas(params, window, RandomSource(12), keep_labels=True,
                       n_max=10 ** 6)
sizes = list(pattern.cluster_sizes().values())
print("simulated %d points in %d clusters (sizes %d ... %d)"
      % (len(pattern), len(sizes), min(sizes), max(sizes)))

est = estimate_alpha_from_cluster_sizes(sizes)
print("alpha from cluster sizes: %.4f (true %.2f)" % (est.alpha, alpha_true))

cloud = estimate_mu0_empirical(pattern)
spread = np.std(cloud.points, axis=0)
print("empirical offset cloud: %d points, per-axis std %s (true sigma 1.0)"
      % (cloud.points.shape[0], np.round(spread, 3)))

# EM reconstruction of mu0 from the points of the largest cluster alone,
# without using the labels of the rest of the pattern.
labels = np.asarray(pattern.labels)
biggest = max(pattern.cluster_sizes(), key=pattern.cluster_sizes().get)
sub = pattern.points[labels == biggest]
sub_pattern = type(pattern)(sub, window)
model = em_estimate_mu0(sub_pattern, k_range=(1, 2, 3), rng=RandomSource(13))
print("EM on the largest cluster (%d points): %d component(s), "
      "mean %s, covariance diagonal %s"
      % (sub.shape[0], len(model.components),
         np.round(model.components[0].mean, 2),
         np.round(np.diag(model.components[0].covariance), 2)))
