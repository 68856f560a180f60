"""Geodesic flow in physical time with the constraint force written out.

``x' = y``, ``y' = -nu x / a`` with ``nu = B(y) / A(x)``. Accepted steps are
projected back onto the tangent bundle every ``project_every`` steps.
"""
from __future__ import annotations

import numpy as np

from .conserved import TrajectorySample, snapshot
from .errors import ConstraintViolation, DegenerateForm
from .model import (
    TOL_CONSTRAINT,
    Ellipsoid,
    PhaseState,
    check_constraints,
    constraint_residuals,
    project_constraints,
)
from .ode import OdeProblem, StepControl, adaptive_integrate, sample_trajectory


def direct_rhs(e: Ellipsoid, s: PhaseState) -> tuple[np.ndarray, np.ndarray]:
    inv = e.inv_a
    A = np.dot(s.x * s.x, inv * inv)
    if A == 0.0:
        raise DegenerateForm("A(x) = 0")
    nu = np.dot(s.y * s.y, inv) / A
    return s.y.copy(), -nu * s.x * inv


def direct_problem(e: Ellipsoid) -> OdeProblem:
    n = e.n
    inv = e.inv_a
    inv2 = inv * inv

    def rhs(t, z):
        x, y = z[:n], z[n:]
        A = np.dot(x * x, inv2)
        if A == 0.0:
            raise DegenerateForm("A(x) = 0")
        nu = np.dot(y * y, inv) / A
        return np.concatenate((y, -nu * x * inv))

    return OdeProblem(dimension=2 * n, rhs=rhs)


def _projector(e: Ellipsoid, project_every: int, tol: float):
    n = e.n
    limit = 1e3 * tol
    count = 0

    def post(t, z):
        nonlocal count
        count += 1
        if count % project_every:
            return z
        s = project_constraints(e, PhaseState(z[:n], z[n:]))
        q_res, t_res = constraint_residuals(e, s)
        if q_res > limit or t_res > limit:
            raise ConstraintViolation(
                f"residual after projection {max(q_res, t_res):.3e} exceeds {limit:.1e} at t={t}"
            )
        return np.concatenate((s.x, s.y))

    return post


def integrate_direct(e: Ellipsoid, s0: PhaseState, t_end: float, ctl: StepControl = StepControl(),
                     project_every: int = 1, stride: float | None = None,
                     tol: float = TOL_CONSTRAINT) -> list[TrajectorySample]:
    """Integrate a geodesic to ``t_end`` and sample it every ``stride`` time units.

    With ``stride=None`` only the two endpoints are returned.
    """
    check_constraints(e, s0, tol)
    if project_every < 1:
        raise ValueError("project_every must be a positive integer")
    stride = t_end if stride is None else stride
    n = e.n
    z0 = np.concatenate((s0.x, s0.y))
    raw = sample_trajectory(direct_problem(e), 0.0, z0, t_end, ctl, stride,
                            post_step=_projector(e, project_every, tol))
    return [TrajectorySample(t=float(t), tau=None, x=z[:n], y=z[n:], invariants=snapshot(e, z[:n], z[n:]))
            for t, z in raw]


def flow_direct(e: Ellipsoid, s0: PhaseState, t_end: float, ctl: StepControl = StepControl(),
                project_every: int = 1, tol: float = TOL_CONSTRAINT) -> PhaseState:
    """Final state only, with no sampling overhead."""
    check_constraints(e, s0, tol)
    n = e.n
    z = adaptive_integrate(direct_problem(e), 0.0, np.concatenate((s0.x, s0.y)), t_end, ctl,
                           post_step=_projector(e, project_every, tol))
    return PhaseState(z[:n].copy(), z[n:].copy())
