"""Lie-Poisson structure of e(n) on the generators ``(y, l)``.

    {l_ij, l_km} = d_jk l_im - d_ik l_jm - d_jm l_ik + d_im l_jk
    {l_ij, y_k}  = d_jk y_i - d_ik y_j
    {y_j, y_k}   = 0

The sign of the ``l``-``l`` family is tied to the sign of the ``l``-``y``
family by the Jacobi identity; flipping either one alone breaks it for n >= 3.

A point is the flat vector ``u = [y (n), packed l (n(n-1)/2)]``. Brackets of
observables are gradient contractions against the Poisson tensor ``J(u)``,
and a Hamiltonian ``H`` generates ``du/dtau = J(u) grad H``, i.e. the
evolution convention is ``df/dtau = {f, H}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .clebsch import clebsch_rhs
from .model import ClebschState, Ellipsoid, n_pairs, triu, unpack

Fn = Callable[[np.ndarray, np.ndarray], float]
Grad = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Observable:
    eval: Fn
    grad_y: Grad
    grad_l: Grad  # packed, j < k

    def grad(self, y, l) -> np.ndarray:
        return np.concatenate((self.grad_y(y, l), self.grad_l(y, l)))


def split(u: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    return u[:n], u[n:]


@lru_cache(maxsize=None)
def _pair_deltas(n: int):
    i, j = triu(n)
    d = lambda a, b: (a[:, None] == b[None, :]).astype(float)
    return i, j, d(i, i), d(i, j), d(j, i), d(j, j)


def poisson_tensor(y, l) -> np.ndarray:
    """Matrix ``J[a, b] = {u_a, u_b}`` at the point ``(y, l)``."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    m = n_pairs(n)
    L = unpack(np.asarray(l, dtype=float), n)
    i, j, d_ik, d_im, d_jk, d_jm = _pair_deltas(n)
    # rows index the pair (i, j), columns the pair (k, m); k, m share the arrays i, j
    k, mm = i, j
    ll = (d_jk * L[i[:, None], mm[None, :]] - d_ik * L[j[:, None], mm[None, :]]
          - d_jm * L[i[:, None], k[None, :]] + d_im * L[j[:, None], k[None, :]])
    r = np.arange(n)
    ly = (j[:, None] == r[None, :]) * y[i][:, None] - (i[:, None] == r[None, :]) * y[j][:, None]
    J = np.zeros((n + m, n + m))
    J[n:, n:] = ll
    J[n:, :n] = ly
    J[:n, n:] = -ly.T
    return J


def poisson_bracket(f: Observable, g: Observable, y, l) -> float:
    y = np.asarray(y, dtype=float)
    l = np.asarray(l, dtype=float)
    return float(f.grad(y, l) @ poisson_tensor(y, l) @ g.grad(y, l))


def hamiltonian_vector_field(H: Observable, y, l) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    l = np.asarray(l, dtype=float)
    return poisson_tensor(y, l) @ H.grad(y, l)


# -- observables ------------------------------------------------------------

def y_generator(n: int, i: int) -> Observable:
    m = n_pairs(n)
    gy = np.zeros(n)
    gy[i] = 1.0
    return Observable(lambda y, l: float(y[i]), lambda y, l: gy.copy(), lambda y, l: np.zeros(m))


def l_generator(n: int, i: int, j: int) -> Observable:
    """``l_ij`` for ``i < j`` (0-based)."""
    pi, pj = triu(n)
    idx = int(np.flatnonzero((pi == i) & (pj == j))[0])
    gl = np.zeros(n_pairs(n))
    gl[idx] = 1.0
    return Observable(lambda y, l: float(l[idx]), lambda y, l: np.zeros(n), lambda y, l: gl.copy())


def uhlenbeck_observable(e: Ellipsoid, j: int) -> Observable:
    """``F_j`` (0-based ``j``) with its exact polynomial gradient."""
    e.require_distinct()
    n = e.n
    p, q = triu(n)
    coef = np.zeros(n_pairs(n))
    coef[p == j] = 1.0 / (e.a[j] - e.a[q[p == j]])
    coef[q == j] = 1.0 / (e.a[j] - e.a[p[q == j]])

    def value(y, l):
        return float(y[j] ** 2 + np.sum(coef * l * l))

    def grad_y(y, l):
        g = np.zeros(n)
        g[j] = 2 * y[j]
        return g

    return Observable(value, grad_y, lambda y, l: 2 * coef * l)


def generating_observable(e: Ellipsoid, lam: float) -> Observable:
    gaps = e.a - lam
    p, q = triu(e.n)
    pair = 1.0 / (gaps[p] * gaps[q])
    return Observable(
        lambda y, l: float(np.sum(y * y / gaps) - np.sum(pair * l * l)),
        lambda y, l: 2 * y / gaps,
        lambda y, l: -2 * pair * l,
    )


def hamiltonian_observable(e: Ellipsoid) -> Observable:
    e.require_distinct()
    p, q = triu(e.n)
    pair = 1.0 / (e.a[p] * e.a[q])
    inv = e.inv_a
    return Observable(
        lambda y, l: 0.5 * float(np.dot(y * y, inv) - np.sum(pair * l * l)),
        lambda y, l: y * inv,
        lambda y, l: -pair * l,
    )


# -- numerical verification -------------------------------------------------

def random_points(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` points drawn uniformly from the box [-1, 1]^(n + n(n-1)/2)."""
    return rng.uniform(-1.0, 1.0, size=(count, n + n_pairs(n)))


def max_bracket(fs, gs, points: np.ndarray, n: int, pairs=None) -> float:
    """Largest ``|{f, g}|`` over the given observable pairs and points."""
    worst = 0.0
    for u in points:
        y, l = split(u, n)
        J = poisson_tensor(y, l)
        gf = [f.grad(y, l) for f in fs]
        gg = [g.grad(y, l) for g in gs]
        idx = pairs if pairs is not None else [(i, k) for i in range(len(fs)) for k in range(len(gs))]
        for i, k in idx:
            worst = max(worst, abs(gf[i] @ J @ gg[k]))
    return worst


def involution_check(e: Ellipsoid, points: int, rng: np.random.Generator) -> float:
    """Max ``|{F_j, F_k}|`` over all ``j < k`` and ``points`` random points of the box."""
    e.require_distinct()
    F = [uhlenbeck_observable(e, j) for j in range(e.n)]
    pairs = [(j, k) for j in range(e.n) for k in range(j + 1, e.n)]
    return max_bracket(F, F, random_points(e.n, points, rng), e.n, pairs)


def sample_spectral(e: Ellipsoid, count: int, rng: np.random.Generator, margin: float = 0.25) -> np.ndarray:
    """Spectral parameters in ``[min a - 1, max a + 1]`` at least ``margin`` from every axis."""
    lo, hi = float(np.min(e.a)) - 1.0, float(np.max(e.a)) + 1.0
    out = []
    while len(out) < count:
        lam = rng.uniform(lo, hi)
        if np.min(np.abs(e.a - lam)) >= margin:
            out.append(lam)
    return np.array(out)


def generating_involution_check(e: Ellipsoid, pairs: int, points: int, rng: np.random.Generator) -> float:
    """Max ``|{G_lambda, G_mu}|`` over random ``(lambda, mu)`` pairs and points."""
    lam = sample_spectral(e, 2 * pairs, rng).reshape(pairs, 2)
    worst = 0.0
    for a, b in lam:
        G = generating_observable(e, a)
        K = generating_observable(e, b)
        worst = max(worst, max_bracket([G], [K], random_points(e.n, points, rng), e.n))
    return worst


def hamiltonian_flow_check(e: Ellipsoid, points: int, rng: np.random.Generator) -> float:
    """Max componentwise gap between ``J grad H_C`` and the Clebsch vector field."""
    e.require_distinct()
    H = hamiltonian_observable(e)
    worst = 0.0
    for u in random_points(e.n, points, rng):
        y, l = split(u, e.n)
        dy, dl = clebsch_rhs(e, ClebschState(y=y, l=l))
        worst = max(worst, float(np.max(np.abs(hamiltonian_vector_field(H, y, l) - np.concatenate((dy, dl))))))
    return worst


@lru_cache(maxsize=None)
def structure_constants(n: int) -> np.ndarray:
    """``C[a, b, c] = d{u_a, u_b}/du_c``; the bracket is linear so this is exact."""
    size = n + n_pairs(n)
    eye = np.eye(size)
    C = np.stack([poisson_tensor(*split(eye[c], n)) for c in range(size)], axis=-1)
    C.setflags(write=False)
    return C


def jacobi_check(n: int, points: int, rng: np.random.Generator) -> float:
    """Max cyclic sum ``{u_a,{u_b,u_c}} + {u_b,{u_c,u_a}} + {u_c,{u_a,u_b}}`` over all generator triples."""
    C = structure_constants(n)
    worst = 0.0
    for u in random_points(n, points, rng):
        J = poisson_tensor(*split(u, n))
        # T[a, b, c] = {u_a, {u_b, u_c}}
        T = np.einsum("bcd,ad->abc", C, J)
        cyc = T + np.transpose(T, (1, 2, 0)) + np.transpose(T, (2, 0, 1))
        worst = max(worst, float(np.max(np.abs(cyc))))
    return worst


def antisymmetry_check(observables, points: np.ndarray, n: int) -> float:
    """Max ``|{f, g} + {g, f}|`` over all ordered observable pairs, plus ``|{f, f}|``."""
    worst = 0.0
    for u in points:
        y, l = split(u, n)
        J = poisson_tensor(y, l)
        grads = [f.grad(y, l) for f in observables]
        for gf in grads:
            for gg in grads:
                worst = max(worst, abs(gf @ J @ gg + gg @ J @ gf), abs(gf @ J @ gf))
    return worst
