"""
Connecting two points
=====================

Shooting turns the initial-value solver into a boundary-value solver: pick a
direction and a length, see where the geodesic lands, and correct.
"""

import numpy as np

from ellgeo import ShootingProblem, solve_geodesic_bvp, validate_ellipsoid

# a quarter of a great circle on the unit sphere
sol = solve_geodesic_bvp(ShootingProblem(validate_ellipsoid([1, 1, 1]), [1, 0, 0], [0, 1, 0]))
print(f"sphere: T* = {sol.T:.12f}, pi/2 = {np.pi / 2:.12f}, {sol.iterations} iterations")

# across an ellipse: the chord from (2, 0) to (-2, 0) is normal to the curve,
# so a starting direction has to be supplied
sol = solve_geodesic_bvp(ShootingProblem(validate_ellipsoid([4, 1]), [2, 0], [-2, 0], v0=[0, 1]))
print(f"ellipse: T* = {sol.T:.12f} (half the perimeter)")

# a generic pair on a triaxial ellipsoid, solved both ways round
e = validate_ellipsoid([3, 2, 1])
p = np.array([np.sqrt(3), 0, 0])
q = np.array([0, 1, 1 / np.sqrt(2)])
fwd = solve_geodesic_bvp(ShootingProblem(e, p, q))
back = solve_geodesic_bvp(ShootingProblem(e, q, p))
print(f"triaxial: p->q {fwd.T:.10f}, q->p {back.T:.10f}, chord {np.linalg.norm(q - p):.10f}")
