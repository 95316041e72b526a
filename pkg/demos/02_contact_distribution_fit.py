"""Estimate (alpha, lambda) from one pattern via the thinned contact curve.

The spherical contact (empty-space) function G(r) of the model has the
closed form exp(-lambda * I(r; alpha)), where I is a coverage integral of
the cluster offset law.  Independent thinning with retention p keeps the
model in the same family with lambda -> lambda * p^alpha, so curves
estimated at several p values jointly pin down both parameters.  The
thinned curves come free from a single pattern: each test point's sorted
nearest-neighbour distances are reweighted by geometric retention
probabilities instead of re-simulating.
"""

import numpy as np

from tasproc import (
    RandomSource,
    TasParameters,
    UniformInterval,
    Window,
    analytic_contact,
    distance_profile,
    empirical_contact,
    fit_void,
    grid_test_points,
    simulate_tas,
)

alpha_true, lam_true = 0.6, 0.4
mu0 = UniformInterval(1.0)
window = Window([-500.0], [500.0])
params = TasParameters(alpha_true, lam_true, mu0)

pattern = simulate_tas(params, window, RandomSource(4), n_max=10 ** 6)
print("simulated %d points on %s" % (len(pattern), window))

test_points = grid_test_points(window, 400)
profile = distance_profile(pattern, test_points, depth=60)

# Empirical curve vs the analytic one at a few radii.
radii = np.array([0.1, 0.5, 1.0, 2.0, 5.0])
emp = empirical_contact(profile, radii)
ana = analytic_contact(params, radii)
print("\n   r    empirical G   analytic G")
for r, e, a in zip(radii, emp.values, ana.values):
    print("%5.2f   %10.4f   %10.4f" % (r, e, a))

# Joint fit over thinning levels p = 0.3 ... 1.0.
fit = fit_void(profile, mu0, p_values=np.round(np.arange(0.3, 1.01, 0.1), 10))
print("\nfit: alpha_hat = %.4f (true %.2f), lambda_hat = %.4f (true %.2f)"
      % (fit.alpha_hat, alpha_true, fit.lambda_hat, lam_true))
print("objective %.3g after %d iterations, converged=%s"
      % (fit.objective_value, fit.n_iterations, fit.converged))
