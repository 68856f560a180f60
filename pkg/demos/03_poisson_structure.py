"""
The Poisson algebra behind the integrals
========================================

In the variables (y, l) with l = x ^ y the Clebsch flow is Hamiltonian for a
linear Poisson bracket. The checks below sample random points of (y, l) space
and report the worst violation of each structural property.
"""

import numpy as np

from ellgeo import poisson, validate_ellipsoid

rng = np.random.default_rng(2)
e = validate_ellipsoid([5, 4, 3, 2, 1])

# the F_j commute with each other
print("max |{F_j, F_k}|      ", poisson.involution_check(e, 500, rng))

# so do the generating functions at any two spectral values
print("max |{G_l, G_m}|      ", poisson.generating_involution_check(e, 10, 50, rng))

# the bracket with H_C reproduces the Clebsch vector field
print("flow residual          ", poisson.hamiltonian_flow_check(e, 500, rng))

# and the bracket really is a Lie bracket
print("Jacobi residual        ", poisson.jacobi_check(e.n, 50, rng))

# a single bracket by hand: {l_12, y_2} = y_1
y, l = rng.uniform(-1, 1, 5), rng.uniform(-1, 1, 10)
print("{l_12, y_2} - y_1      ", poisson.poisson_bracket(poisson.l_generator(5, 0, 1), poisson.y_generator(5, 1), y, l) - y[0])
