import numpy as np
import pytest

from ellgeo.model import validate_ellipsoid

# Ellipse with semi-axes 2 and 1: perimeter 8 E(m=3/4). Agreed to 4e-15 between
# adaptive quadrature of the arc-length integral and scipy.special.ellipe.
ELLIPSE_PERIMETER = 9.688448220547675
ELLIPSE_HALF_PERIMETER = ELLIPSE_PERIMETER / 2

AXES = {
    2: (4.0, 1.0),
    3: (3.0, 2.0, 1.0),
    4: (4.0, 3.0, 2.0, 1.0),
    5: (5.0, 4.0, 3.0, 2.0, 1.0),
    6: (6.0, 5.0, 4.0, 3.0, 2.0, 1.0),
}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=sorted(AXES))
def ellipsoid(request):
    return validate_ellipsoid(AXES[request.param])


def return_time(state_at, t_guess, coord=1, iters=8, tol=1e-13):
    """Newton on ``x[coord](t) = 0`` near ``t_guess``; ``state_at(t) -> (x, y)``."""
    t = t_guess
    for _ in range(iters):
        x, y = state_at(t)
        dt = -x[coord] / y[coord]
        t += dt
        if abs(dt) < tol:
            break
    return t
