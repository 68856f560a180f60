"""First integrals, proof identities and drift bookkeeping.

Summation conventions: the Uhlenbeck integral ``F_j`` sums its pair terms
over every ``k != j``; the ``l``-sums in the generating function and in the
Clebsch Hamiltonian run over unordered pairs ``j < k``. With these choices
``sum_j F_j = |y|^2``, ``G_lambda = sum_j F_j / (a_j - lambda)`` and
``H_C = 1/2 sum_j F_j / a_j`` all hold identically.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .errors import PoleAtAxis
from .model import (
    Ellipsoid,
    PhaseState,
    A_value,
    B_value,
    TOL_CONSTRAINT,
    check_constraints,
    q0_value,
    tangency_value,
    triu,
    unpack,
    wedge,
)


@dataclass(frozen=True)
class InvariantSnapshot:
    H_free: float
    F: Optional[np.ndarray]  # None when axes repeat
    I: float
    q0_residual: float
    tangency_residual: float
    plucker_max_residual: float
    H_clebsch: Optional[float] = None


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    tau: Optional[float]
    x: np.ndarray
    y: np.ndarray
    invariants: InvariantSnapshot
    dt_dtau: Optional[float] = None  # A(x) along Clebsch trajectories


@dataclass(frozen=True)
class IdentityResiduals:
    force: float      # B x_j / a_j  vs  sum_k omega_jk y_k
    energy: float     # B  vs  sum_{j<k} l_jk^2 / (a_j a_k)
    commutator: float # (1/a_j - 1/a_k) B x_j x_k  vs  [l, omega]_jk - (1/a_j - 1/a_k) y_j y_k

    def max(self) -> float:
        return max(self.force, self.energy, self.commutator)


def _pair_gaps(e: Ellipsoid) -> np.ndarray:
    """Matrix ``1 / (a_j - a_k)`` with zero diagonal."""
    d = e.a[:, None] - e.a[None, :]
    np.fill_diagonal(d, 1.0)
    inv = 1.0 / d
    np.fill_diagonal(inv, 0.0)
    return inv


def uhlenbeck_integrals(e: Ellipsoid, y, l) -> np.ndarray:
    e.require_distinct()
    L = unpack(np.asarray(l, dtype=float), e.n)
    return np.asarray(y) ** 2 + np.sum(L * L * _pair_gaps(e), axis=1)


def generating_function(e: Ellipsoid, y, l, lam: float) -> float:
    gaps = e.a - lam
    if np.min(np.abs(gaps)) < 1e-12:
        raise PoleAtAxis(f"lambda={lam} sits on an axis value")
    j, k = triu(e.n)
    y = np.asarray(y)
    l = np.asarray(l)
    return float(np.sum(y * y / gaps) - np.sum(l * l / (gaps[j] * gaps[k])))


def clebsch_hamiltonian(e: Ellipsoid, y, l) -> float:
    e.require_distinct()
    j, k = triu(e.n)
    y = np.asarray(y)
    l = np.asarray(l)
    return 0.5 * float(np.dot(y * y, e.inv_a) - np.sum(l * l / (e.a[j] * e.a[k])))


def plucker_residual(l, n: int) -> float:
    """Largest ``|l_ij l_km - l_ik l_jm + l_im l_jk|`` over ``i<j<k<m``; 0 for n <= 3."""
    if n < 4:
        return 0.0
    L = unpack(np.asarray(l, dtype=float), n)
    quads = np.array(list(combinations(range(n), 4)))
    i, j, k, m = quads.T
    r = L[i, j] * L[k, m] - L[i, k] * L[j, m] + L[i, m] * L[j, k]
    return float(np.max(np.abs(r)))


def identity_residuals(e: Ellipsoid, s: PhaseState, check: bool = True,
                       tol: float = TOL_CONSTRAINT) -> IdentityResiduals:
    """Residuals of the three algebraic identities linking the direct and Clebsch forms.

    They hold exactly on the tangent bundle of the ellipsoid. ``check=False``
    skips the constraint test so off-manifold residuals can be inspected.
    """
    if check:
        check_constraints(e, s, tol)
    x, y = s.x, s.y
    inv = e.inv_a
    L = unpack(wedge(x, y), e.n)
    W = inv[:, None] * L * inv[None, :]
    B = B_value(e, y)

    force = np.max(np.abs(B * x * inv - W @ y))
    j, k = triu(e.n)
    energy = abs(B - np.sum(L[j, k] ** 2 * inv[j] * inv[k]))
    dinv = inv[:, None] - inv[None, :]
    comm = L @ W - W @ L - dinv * np.outer(y, y)
    commutator = np.max(np.abs(dinv * B * np.outer(x, x) - comm))
    return IdentityResiduals(float(force), float(energy), float(commutator))


def snapshot(e: Ellipsoid, x, y, l=None) -> InvariantSnapshot:
    """Invariants at one point. ``l`` defaults to ``x ^ y``."""
    if l is None:
        l = wedge(x, y)
    F = uhlenbeck_integrals(e, y, l) if e.distinct else None
    HC = clebsch_hamiltonian(e, y, l) if e.distinct else None
    return InvariantSnapshot(
        H_free=0.5 * float(np.dot(y, y)),
        F=F,
        I=A_value(e, x) * B_value(e, y),
        q0_residual=abs(q0_value(e, x) - 1.0),
        tangency_residual=abs(tangency_value(e, x, y)),
        plucker_max_residual=plucker_residual(l, e.n),
        H_clebsch=HC,
    )


def _rel_drift(series: np.ndarray, ref: float) -> float:
    dev = float(np.max(np.abs(series - series[0])))
    return dev / ref if ref > 0 else dev


def drift_report(samples: Sequence[TrajectorySample]) -> dict:
    """Maximum drift of each invariant relative to its initial value.

    Scalars are normalised by their own initial magnitude. Each ``F_j`` is
    normalised by ``max_k |F_k(0)|`` because individual ``F_j`` may start at
    or near zero. ``H_C`` is identically zero on geodesic data, so its drift
    is measured against the kinetic energy instead.
    """
    if not samples:
        raise ValueError("drift_report needs at least one sample")
    snaps = [s.invariants for s in samples]
    report: dict = {"samples": len(samples)}
    H = np.array([s.H_free for s in snaps])
    I = np.array([s.I for s in snaps])
    report["H"] = _rel_drift(H, abs(H[0]))
    report["I"] = _rel_drift(I, abs(I[0]))
    if snaps[0].H_clebsch is not None:
        HC = np.array([s.H_clebsch for s in snaps])
        report["H_C"] = _rel_drift(HC, max(abs(HC[0]), H[0]))
    if snaps[0].F is not None:
        F = np.array([s.F for s in snaps])
        ref = float(np.max(np.abs(F[0])))
        for j in range(F.shape[1]):
            report[f"F_{j + 1}"] = _rel_drift(F[:, j], ref)
    report["max_q0_res"] = max(s.q0_residual for s in snaps)
    report["max_tan_res"] = max(s.tangency_residual for s in snaps)
    report["max_plucker_res"] = max(s.plucker_max_residual for s in snaps)
    return report


def max_invariant_drift(report: dict) -> float:
    keys = [k for k in report if k in ("H", "I", "H_C") or k.startswith("F_")]
    return max(report[k] for k in keys)
