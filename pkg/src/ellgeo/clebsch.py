"""Geodesic flow rewritten as a quadratic system on ``(y, l)`` in local time.

With ``d tau = dt / A(x)`` the velocity and the angular momentum tensor
``l = x ^ y`` evolve by

    dy_j/dtau  = -sum_k omega_jk y_k
    dl_jk/dtau = [l, omega]_jk - (1/a_j - 1/a_k) y_j y_k,   omega_jk = l_jk / (a_j a_k)

Physical time is carried as an extra state component with
``dt/dtau = A = I0 / B(y)``, where ``I0 = A(x0) B(y0)`` is the Joachimsthal
constant fixed at the initial point.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .conserved import TrajectorySample, snapshot
from .errors import NonMonotoneTime, ValidationError, ZeroVelocity
from .model import (
    EPS_B,
    TOL_CONSTRAINT,
    ClebschState,
    Ellipsoid,
    PhaseState,
    B_value,
    joachimsthal,
    n_pairs,
    reconstruct_x,
    to_clebsch,
    triu,
    unpack,
)
from .ode import OdeProblem, StepControl, adaptive_integrate, sample_trajectory


def omega_from_l(e: Ellipsoid, l) -> np.ndarray:
    e.require_distinct()
    j, k = triu(e.n)
    return np.asarray(l, dtype=float) / (e.a[j] * e.a[k])


def _rhs_parts(inv, n, y, lp):
    iu = triu(n)
    L = unpack(lp, n)
    W = inv[:, None] * L * inv[None, :]
    dy = -W @ y
    dinv_yy = np.outer(inv * y, y)
    dL = L @ W - W @ L - (dinv_yy - dinv_yy.T)
    return dy, dL[iu]


def clebsch_rhs(e: Ellipsoid, c: ClebschState) -> tuple[np.ndarray, np.ndarray]:
    e.require_distinct()
    return _rhs_parts(e.inv_a, e.n, np.asarray(c.y, float), np.asarray(c.l, float))


def clebsch_problem(e: Ellipsoid, I0: float, eps_B: float = EPS_B) -> OdeProblem:
    """Augmented system on the flat vector ``[y, packed l, t]``."""
    e.require_distinct()
    n = e.n
    m = n_pairs(n)
    inv = e.inv_a

    def rhs(tau, z):
        y = z[:n]
        B = np.dot(y * y, inv)
        if B <= eps_B:
            raise ZeroVelocity(f"B(y) fell to {B:.3e} at tau={tau}")
        dy, dl = _rhs_parts(inv, n, y, z[n:n + m])
        return np.concatenate((dy, dl, [I0 / B]))

    return OdeProblem(dimension=n + m + 1, rhs=rhs)


def _initial(e: Ellipsoid, s0: PhaseState, tol: float, eps_B: float):
    e.require_distinct()
    c = to_clebsch(e, s0, tol)
    if B_value(e, c.y) <= eps_B:
        raise ZeroVelocity("initial velocity is zero")
    I0 = joachimsthal(e, s0)
    return np.concatenate((c.y, c.l, [0.0])), I0


def _sample(e: Ellipsoid, tau: float, z: np.ndarray, I0: float) -> TrajectorySample:
    n = e.n
    y, lp, t = z[:n].copy(), z[n:-1].copy(), float(z[-1])
    x = reconstruct_x(e, ClebschState(y=y, l=lp, tau=tau, t=t))
    return TrajectorySample(t=t, tau=float(tau), x=x, y=y, invariants=snapshot(e, x, y, lp),
                            dt_dtau=I0 / B_value(e, y))


def integrate_clebsch(e: Ellipsoid, s0: PhaseState, tau_end: float, ctl: StepControl = StepControl(),
                      stride: float | None = None, tol: float = TOL_CONSTRAINT,
                      eps_B: float = EPS_B) -> list[TrajectorySample]:
    """Integrate in local time up to ``tau_end``, sampling every ``stride`` in tau."""
    z0, I0 = _initial(e, s0, tol, eps_B)
    stride = tau_end if stride is None else stride
    raw = sample_trajectory(clebsch_problem(e, I0, eps_B), 0.0, z0, tau_end, ctl, stride)
    return [_sample(e, tau, z, I0) for tau, z in raw]


def clebsch_at_times(e: Ellipsoid, s0: PhaseState, times: Sequence[float], ctl: StepControl = StepControl(),
                     tol: float = TOL_CONSTRAINT, eps_B: float = EPS_B,
                     t_tol: float = 1e-13, max_newton: int = 8) -> list[TrajectorySample]:
    """Clebsch states at prescribed physical times.

    Each target ``t_k`` is reached by a Newton iteration on the local-time
    increment, restarting every trial from the last exactly-landed state, so
    no interpolation error enters the result.
    """
    z, I0 = _initial(e, s0, tol, eps_B)
    p = clebsch_problem(e, I0, eps_B)
    n = e.n
    tau = 0.0
    out = []
    for target in np.asarray(times, dtype=float):
        if target < z[-1] - t_tol:
            raise ValidationError("times must be non-decreasing and start at or after 0")
        rate = I0 / B_value(e, z[:n])
        dtau = (target - z[-1]) / rate
        trial = z
        for _ in range(max_newton):
            if dtau <= 0:
                trial, dtau = z, 0.0
                break
            trial = adaptive_integrate(p, tau, z, tau + dtau, ctl)
            miss = target - trial[-1]
            if abs(miss) <= t_tol * max(1.0, abs(target)):
                break
            dtau += miss / (I0 / B_value(e, trial[:n]))
        tau, z = tau + dtau, trial
        out.append(_sample(e, tau, z, I0))
    return out


@dataclass(frozen=True)
class TimeMap:
    """Monotone map between local time and physical time.

    Both directions are cubic Hermite interpolants with the exact slopes
    ``dt/dtau = A`` and ``dtau/dt = 1/A`` at every sample.
    """
    tau: np.ndarray
    t: np.ndarray
    _forward: CubicHermiteSpline
    _inverse: CubicHermiteSpline

    def t_of_tau(self, tau):
        return self._forward(tau)

    def tau_of_t(self, t):
        return self._inverse(t)


def time_map(samples: Sequence[TrajectorySample]) -> TimeMap:
    if len(samples) < 2 or any(s.tau is None or s.dt_dtau is None for s in samples):
        raise ValidationError("time_map needs at least two samples from integrate_clebsch")
    tau = np.array([s.tau for s in samples])
    t = np.array([s.t for s in samples])
    rate = np.array([s.dt_dtau for s in samples])
    if np.any(np.diff(t) <= 0) or np.any(np.diff(tau) <= 0):
        raise NonMonotoneTime("physical time is not strictly increasing along the samples")
    return TimeMap(tau=tau, t=t, _forward=CubicHermiteSpline(tau, t, rate),
                   _inverse=CubicHermiteSpline(t, tau, 1.0 / rate))
