"""Decay of a bump under the stochastic flow vs bare diffusion.

The paired-path estimator tracks value(t) ~ ||u_t - mean||^2.  For the
hyperbolic flow the fitted rate barely moves across two decades of nu and
stays far above 2*(4 pi^2 nu), the rate the same noise would produce with
the advection switched off.  Reduced budget here (2048 base points and
early fit windows, so the numbers are rough); the `lab decay --config
theorem-sweep` preset runs the full 4096x2 version with frozen windows.
"""

import numpy as np

from anosovlab.flow import DiffusionConfig, l2_decay_curve
from anosovlab.geometry import GroupElement, Observable
from anosovlab.presets import UBAR_BUMP_R12
from anosovlab.rates import envelope_checks, fit_exponential

u0 = Observable(GroupElement.identity(), 1.2)
times = np.round(np.arange(0.0, 6.01, 0.3), 10)

print("  nu      beta_hat    95% CI           2*4pi^2*nu   envelope(C=20)")
for nu, window in ((3e-3, (1.2, 3.6)), (1e-3, (1.5, 4.5))):
    curve = l2_decay_curve(u0, times, DiffusionConfig(nu), n_base=2048,
                           n_paths=2, seed=37, ubar=UBAR_BUMP_R12)
    fit = fit_exponential(curve, window)
    rep = envelope_checks(curve, nu, C_env=20.0)
    print(" %-7g  %6.3f    [%6.3f, %6.3f]    %8.4f     %s (C_needed %.2f)"
          % (nu, fit.beta, fit.ci[0], fit.ci[1], 2 * 4 * np.pi ** 2 * nu,
             "pass" if rep["envelope_pass"] else "FAIL", rep["C_env_needed"]))

print("\nnu-independence of the rate is the whole point: diffusion alone")
print("would slow down 10x per decade of nu, the advected rate does not")
