"""Two-point geodesics by single shooting over the direct flow.

Unknowns are a unit tangent direction at ``p`` and the arc length ``T``. The
direction is written in an orthonormal basis of the tangent plane at ``p``
and renormalised after every update. The endpoint miss is driven to zero
with Levenberg-Marquardt using a forward-difference Jacobian.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import null_space

from .conserved import TrajectorySample
from .direct import flow_direct, integrate_direct
from .errors import DegenerateChord, NoConvergence, ValidationError
from .model import TOL_CONSTRAINT, Ellipsoid, PhaseState, q0_value
from .ode import StepControl

log = logging.getLogger(__name__)

FD_STEP = 1e-7


@dataclass(frozen=True)
class ShootingProblem:
    e: Ellipsoid
    p: np.ndarray
    q: np.ndarray
    tol_endpoint: float = 1e-8
    max_iter: int = 100
    v0: Optional[np.ndarray] = None  # direction hint, required when q - p has no tangent part at p
    ctl: StepControl = field(default_factory=lambda: StepControl(rtol=1e-12, atol=1e-14))

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        q = np.asarray(self.q, dtype=float)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        for name, pt in (("p", p), ("q", q)):
            if pt.shape != (self.e.n,):
                raise ValidationError(f"{name} must have length {self.e.n}")
            if abs(q0_value(self.e, pt) - 1.0) > TOL_CONSTRAINT:
                raise ValidationError(f"{name} is not on the ellipsoid")
        if np.array_equal(p, q):
            raise ValidationError("p and q must differ")


@dataclass
class BvpSolution:
    v: np.ndarray
    T: float
    iterations: int
    miss: float
    trajectory: list[TrajectorySample]


def tangent_basis(e: Ellipsoid, p: np.ndarray) -> np.ndarray:
    """Columns span the tangent plane of the ellipsoid at ``p``."""
    return null_space((p * e.inv_a)[None, :])


def tangent_part(e: Ellipsoid, p: np.ndarray, w: np.ndarray) -> np.ndarray:
    g = p * e.inv_a
    return w - (np.dot(g, w) / np.dot(g, g)) * g


def shoot(prob: ShootingProblem, v, T: float) -> np.ndarray:
    """Miss vector ``q - x(T)`` for the unit-speed geodesic leaving ``p`` along ``v``.

    Negative ``T`` runs the geodesic backwards.
    """
    v = np.asarray(v, dtype=float)
    if T == 0.0:
        return prob.q - prob.p
    if T < 0:
        v, T = -v, -T
    end = flow_direct(prob.e, PhaseState(prob.p, v), T, prob.ctl)
    return prob.q - end.x


def initial_guess(prob: ShootingProblem) -> tuple[np.ndarray, float]:
    T0 = float(np.linalg.norm(prob.q - prob.p))
    w = prob.v0 if prob.v0 is not None else prob.q - prob.p
    v = tangent_part(prob.e, prob.p, np.asarray(w, dtype=float))
    norm = np.linalg.norm(v)
    if norm < 1e-8 * max(1.0, np.linalg.norm(w)):
        if prob.v0 is not None:
            raise ValidationError("direction hint v0 has no tangent component at p")
        raise DegenerateChord("q - p is normal to the ellipsoid at p; supply a direction hint v0")
    return v / norm, T0


def solve_geodesic_bvp(prob: ShootingProblem) -> BvpSolution:
    """Find a locally shortest geodesic from ``p`` to ``q``.

    No global minimality is claimed; which geodesic is found depends on the
    initial guess (the chord direction, or ``v0`` when given).
    """
    e = prob.e
    E = tangent_basis(e, prob.p)
    v, T = initial_guess(prob)
    c = E.T @ v
    k = c.shape[0]

    def residual(theta):
        cc = theta[:k]
        return shoot(prob, E @ (cc / np.linalg.norm(cc)), theta[k])

    theta = np.append(c, T)
    r = residual(theta)
    cost = float(r @ r)
    mu = None
    it = 0
    while np.linalg.norm(r) >= prob.tol_endpoint:
        if it >= prob.max_iter:
            raise NoConvergence(f"miss {np.linalg.norm(r):.3e} after {it} iterations")
        it += 1
        J = np.empty((r.shape[0], k + 1))
        for i in range(k + 1):
            d = np.zeros(k + 1)
            d[i] = FD_STEP * max(1.0, abs(theta[i]))
            J[:, i] = (residual(theta + d) - r) / d[i]
        JtJ = J.T @ J
        g = J.T @ r
        if mu is None:
            mu = 1e-3 * float(np.max(np.diag(JtJ)))
        while True:
            step = np.linalg.solve(JtJ + mu * np.eye(k + 1), -g)
            trial = theta + step
            trial[:k] /= np.linalg.norm(trial[:k])
            r_new = residual(trial)
            new_cost = float(r_new @ r_new)
            if new_cost < cost:
                theta, r, cost = trial, r_new, new_cost
                mu = max(mu / 3.0, 1e-15)
                break
            mu *= 4.0
            if mu > 1e12:
                raise NoConvergence(f"damping blew up at miss {np.sqrt(cost):.3e}")
        log.debug("bvp iter %d: miss %.3e, T %.12f", it, np.sqrt(cost), theta[k])

    c = theta[:k] / np.linalg.norm(theta[:k])
    v = E @ c
    T = float(theta[k])
    if T < 0:
        v, T = -v, -T
    traj = integrate_direct(e, PhaseState(prob.p, v), T, prob.ctl, stride=T / 200)
    return BvpSolution(v=v, T=T, iterations=it, miss=float(np.sqrt(cost)), trajectory=traj)
