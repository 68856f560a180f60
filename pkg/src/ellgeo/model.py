"""Ellipsoid parameters, phase-space states and the scalar forms built on them.

The ellipsoid is ``sum_j x_j**2 / a_j == 1`` where ``a_j`` are the *squared*
semi-axes. The angular momentum tensor ``l = x ^ y`` is stored packed as its
strictly upper triangular entries in ``numpy.triu_indices`` order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (
    ConstraintViolation,
    DegenerateForm,
    DuplicateAxis,
    NonPositiveAxis,
    ResamplingFailure,
    ValidationError,
    ZeroVelocity,
)

TOL_CONSTRAINT = 1e-9
TOL_IDENTITY = 1e-10
EPS_B = 1e-14


@dataclass(frozen=True)
class Ellipsoid:
    a: np.ndarray
    distinct: bool = field(default=True)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def inv_a(self) -> np.ndarray:
        return 1.0 / self.a

    def require_distinct(self) -> None:
        if not self.distinct:
            raise DuplicateAxis(f"axes {self.a.tolist()} are not pairwise distinct")


@dataclass(frozen=True)
class PhaseState:
    x: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class ClebschState:
    y: np.ndarray
    l: np.ndarray  # packed, length n(n-1)/2
    tau: float = 0.0
    t: float = 0.0


@dataclass(frozen=True)
class ScalarForms:
    q0: float
    A: float
    B: float
    nu: float
    tangency: float


def validate_ellipsoid(a) -> Ellipsoid:
    """Check the axis vector and record whether its entries are pairwise distinct.

    Duplicate axes are allowed (spheres are legal for the direct flow); any
    routine that divides by ``a_j - a_k`` calls :meth:`Ellipsoid.require_distinct`.
    """
    a = np.array(a, dtype=float).reshape(-1)
    if a.shape[0] < 2:
        raise ValidationError("ellipsoid dimension must be at least 2")
    if not np.all(np.isfinite(a)):
        raise ValidationError("axes must be finite")
    if np.any(a <= 0):
        raise NonPositiveAxis(f"axes must be positive, got {a.tolist()}")
    distinct = bool(np.all(np.diff(np.sort(a)) > 0))
    a.setflags(write=False)
    return Ellipsoid(a=a, distinct=distinct)


def phase_state(x, y) -> PhaseState:
    x = np.array(x, dtype=float).reshape(-1)
    y = np.array(y, dtype=float).reshape(-1)
    if x.shape != y.shape:
        raise ValidationError(f"x and y lengths differ: {x.shape[0]} vs {y.shape[0]}")
    return PhaseState(x=x, y=y)


# -- packed antisymmetric tensors -------------------------------------------

@lru_cache(maxsize=None)
def triu(n: int) -> tuple[np.ndarray, np.ndarray]:
    iu = np.triu_indices(n, 1)
    iu[0].setflags(write=False)
    iu[1].setflags(write=False)
    return iu


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pack(L: np.ndarray) -> np.ndarray:
    return L[triu(L.shape[0])].copy()


def unpack(lp: np.ndarray, n: int) -> np.ndarray:
    L = np.zeros((n, n))
    iu = triu(n)
    L[iu] = lp
    L[iu[1], iu[0]] = -lp
    return L


def wedge(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Packed ``l_jk = x_j y_k - x_k y_j`` for ``j < k``."""
    j, k = triu(x.shape[0])
    return x[j] * y[k] - x[k] * y[j]


# -- scalar forms -----------------------------------------------------------

def q0_value(e: Ellipsoid, x) -> float:
    return float(np.dot(x * x, e.inv_a))


def A_value(e: Ellipsoid, x) -> float:
    return float(np.dot(x * x, e.inv_a ** 2))


def B_value(e: Ellipsoid, y) -> float:
    return float(np.dot(y * y, e.inv_a))


def tangency_value(e: Ellipsoid, x, y) -> float:
    return float(np.dot(x * y, e.inv_a))


def forms(e: Ellipsoid, s: PhaseState) -> ScalarForms:
    x, y = s.x, s.y
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("state contains non-finite entries")
    A = A_value(e, x)
    if A == 0.0:
        raise DegenerateForm("A(x) = 0; x is the origin")
    B = B_value(e, y)
    return ScalarForms(q0=q0_value(e, x), A=A, B=B, nu=B / A, tangency=tangency_value(e, x, y))


def joachimsthal(e: Ellipsoid, s: PhaseState) -> float:
    """Joachimsthal product ``A(x) * B(y)``, constant along geodesics."""
    return A_value(e, s.x) * B_value(e, s.y)


def constraint_residuals(e: Ellipsoid, s: PhaseState) -> tuple[float, float]:
    return abs(q0_value(e, s.x) - 1.0), abs(tangency_value(e, s.x, s.y))


def check_constraints(e: Ellipsoid, s: PhaseState, tol: float = TOL_CONSTRAINT) -> None:
    if s.x.shape[0] != e.n:
        raise ValidationError(f"state has dimension {s.x.shape[0]}, ellipsoid has {e.n}")
    q_res, t_res = constraint_residuals(e, s)
    if not (q_res <= tol and t_res <= tol):
        raise ConstraintViolation(
            f"state off the tangent bundle: |Q0-1|={q_res:.3e}, |tangency|={t_res:.3e} (tol {tol:.1e})"
        )


def project_constraints(e: Ellipsoid, s: PhaseState) -> PhaseState:
    """Radially rescale x onto the ellipsoid, then remove the normal part of y.

    The speed is left alone; energy is monitored elsewhere, never enforced.
    """
    q = q0_value(e, s.x)
    if q == 0.0:
        raise DegenerateForm("Q0(x) = 0; cannot project the origin")
    x = s.x / np.sqrt(q)
    g = x * e.inv_a
    y = s.y - (np.dot(g, s.y) / np.dot(g, g)) * g
    return PhaseState(x=x, y=y)


def sample_state(e: Ellipsoid, rng: np.random.Generator, speed: float = 1.0) -> PhaseState:
    if not speed > 0:
        raise ValidationError("speed must be positive")
    g = rng.standard_normal(e.n)
    x = np.sqrt(e.a) * g / np.linalg.norm(g)
    for _ in range(16):
        s = project_constraints(e, PhaseState(x=x, y=rng.standard_normal(e.n)))
        norm = np.linalg.norm(s.y)
        if norm >= 1e-12:
            # second pass: rescaling a short projected vector amplifies its normal roundoff
            s = project_constraints(e, PhaseState(x=s.x, y=s.y / norm))
            return PhaseState(x=s.x, y=s.y * (speed / np.linalg.norm(s.y)))
    raise ResamplingFailure("could not draw a non-degenerate tangent velocity")


# -- (x, y) <-> (y, l) ------------------------------------------------------

def to_clebsch(e: Ellipsoid, s: PhaseState, tol: float = TOL_CONSTRAINT) -> ClebschState:
    check_constraints(e, s, tol)
    return ClebschState(y=s.y.copy(), l=wedge(s.x, s.y), tau=0.0, t=0.0)


def reconstruct_x(e: Ellipsoid, c: ClebschState, eps_B: float = EPS_B) -> np.ndarray:
    """Position from ``(y, l)``: ``x_j = sum_k l_jk y_k / a_k / B(y)``.

    Valid on the rank-2 locus ``l = x ^ y`` with x on the ellipsoid and y tangent.
    """
    B = B_value(e, c.y)
    if B <= eps_B:
        raise ZeroVelocity(f"B(y) = {B:.3e} is below {eps_B:.1e}; x cannot be reconstructed")
    L = unpack(c.l, e.n)
    return L @ (c.y * e.inv_a) / B
