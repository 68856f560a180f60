"""
What stays constant
===================

Along a geodesic the kinetic energy H, the Joachimsthal product I = A(x) B(y)
and the n Uhlenbeck integrals F_j are all conserved. The drift report
measures how well each survives a long integration.
"""

import numpy as np

from ellgeo import StepControl, drift_report, integrate_direct, sample_state, validate_ellipsoid

e = validate_ellipsoid([4, 3, 2, 1])
s0 = sample_state(e, np.random.default_rng(1))
traj = integrate_direct(e, s0, 100.0, StepControl(rtol=1e-10, atol=1e-12), stride=1.0)

# the F_j add up to |y|^2, so their sum is twice the energy
F0 = traj[0].invariants.F
print("F_j at t=0:", np.round(F0, 6), " sum:", F0.sum(), " |y|^2:", s0.y @ s0.y)

report = drift_report(traj)
for key, value in report.items():
    print(f"{key:>16}: {value:.3e}" if isinstance(value, float) else f"{key:>16}: {value}")
