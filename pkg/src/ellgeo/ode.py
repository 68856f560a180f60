"""Explicit Runge-Kutta integration over flat state vectors.

Two steppers are provided: classical RK4 at a fixed step and the
Dormand-Prince 5(4) embedded pair with proportional step-size control.
Dense output between accepted steps is cubic Hermite interpolation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np

from .errors import MaxStepsExceeded, NonFiniteState, StepUnderflow, ValidationError

Rhs = Callable[[float, np.ndarray], np.ndarray]
PostStep = Callable[[float, np.ndarray], np.ndarray]

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0


@dataclass(frozen=True)
class OdeProblem:
    dimension: int
    rhs: Rhs


@dataclass(frozen=True)
class StepControl:
    mode: str = "adaptive"
    h: Optional[float] = None  # fixed step, or initial step guess in adaptive mode
    rtol: float = 1e-10
    atol: float = 1e-12
    h_min: float = 1e-14
    h_max: float = np.inf
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.mode not in ("fixed", "adaptive"):
            raise ValidationError(f"unknown step mode {self.mode!r}")
        if self.mode == "fixed" and not (self.h is not None and self.h > 0):
            raise ValidationError("fixed mode needs h > 0")
        if self.h is not None and not self.h > 0:
            raise ValidationError("h must be positive")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValidationError("rtol and atol must be positive")
        if not (0 <= self.h_min <= self.h_max):
            raise ValidationError("need 0 <= h_min <= h_max")
        if self.max_steps <= 0:
            raise ValidationError("max_steps must be positive")


# Dormand-Prince 5(4)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _call(p: OdeProblem, t: float, y: np.ndarray) -> np.ndarray:
    return np.asarray(p.rhs(t, y), dtype=float)


def rk4_step(p: OdeProblem, t: float, state, h: float) -> np.ndarray:
    if not h > 0:
        raise ValidationError("h must be positive")
    y = np.asarray(state, dtype=float)
    k1 = _call(p, t, y)
    k2 = _call(p, t + h / 2, y + h / 2 * k1)
    k3 = _call(p, t + h / 2, y + h / 2 * k2)
    k4 = _call(p, t + h, y + h * k3)
    out = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NonFiniteState(f"non-finite state after RK4 step at t={t}")
    return out


def _dp_step(p, t, y, f0, h):
    k = [f0]
    for i in range(1, 7):
        yi = y + h * np.dot(_A[i], k[:i])
        k.append(_call(p, t + _C[i] * h, yi))
    y_new = y + h * np.dot(_B5[:6], k[:6])
    err = h * np.dot(_E, k)
    return y_new, k[6], err


def _initial_step(p, t0, y0, f0, t1, ctl) -> float:
    sc = ctl.atol + ctl.rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / sc) ** 2))
    d1 = np.sqrt(np.mean((f0 / sc) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, t1 - t0)
    f1 = _call(p, t0 + h0, y0 + h0 * f0)
    d2 = np.sqrt(np.mean(((f1 - f0) / sc) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, ctl.h_max)


def _march(p: OdeProblem, t0: float, state0, t1: float, ctl: StepControl,
           post_step: Optional[PostStep] = None,
           stops: Optional[np.ndarray] = None) -> Iterator[tuple[float, np.ndarray, np.ndarray]]:
    """Yield ``(t, state, derivative)`` at the start point and every accepted step.

    Steps are clipped so that every time in ``stops`` is hit exactly.
    """
    if not t1 > t0:
        raise ValidationError(f"need t1 > t0, got [{t0}, {t1}]")
    y = np.array(state0, dtype=float)
    if y.shape != (p.dimension,):
        raise ValidationError(f"state has shape {y.shape}, problem dimension is {p.dimension}")
    t = float(t0)
    f = _call(p, t, y)
    yield t, y, f

    span = t1 - t0
    if ctl.mode == "fixed":
        h = ctl.h
    else:
        h = ctl.h if ctl.h is not None else _initial_step(p, t, y, f, t1, ctl)
        h = min(h, ctl.h_max)
    stops = np.array([t1]) if stops is None else np.append(stops[(stops > t) & (stops < t1)], t1)
    si = 0
    steps = 0
    while True:
        target = stops[si]
        remaining = target - t
        landing = h >= remaining - 1e-12 * span
        last = landing and si == len(stops) - 1
        h_try = remaining if landing else h
        if steps >= ctl.max_steps:
            raise MaxStepsExceeded(f"{ctl.max_steps} steps taken, reached t={t}")
        steps += 1

        if ctl.mode == "fixed":
            y_new = rk4_step(p, t, y, h_try)
            f_new = None
        else:
            if h_try < ctl.h_min and not last:
                raise StepUnderflow(f"step {h_try:.3e} below h_min={ctl.h_min:.1e} at t={t}")
            y_new, f_new, err = _dp_step(p, t, y, f, h_try)
            sc = ctl.atol + ctl.rtol * np.maximum(np.abs(y), np.abs(y_new))
            ratio = np.max(np.abs(err) / sc)
            if not np.isfinite(ratio):
                h = h_try * FAC_MIN
                continue
            fac = FAC_MAX if ratio == 0 else SAFETY * ratio ** -0.2
            if ratio > 1.0:
                h = h_try * max(FAC_MIN, min(1.0, fac))
                continue
            h_next = min(h_try * min(FAC_MAX, max(FAC_MIN, fac)), ctl.h_max)
            # a clipped step says little about the natural step size
            h = max(h_next, h) if landing else h_next

        if not np.all(np.isfinite(y_new)):
            raise NonFiniteState(f"non-finite state at t={t + h_try}")
        if landing:
            t = target
            si += 1
        else:
            t = t + h_try
        if post_step is not None:
            y_new = np.asarray(post_step(t, y_new), dtype=float)
            f_new = None
        y = y_new
        f = f_new if f_new is not None else _call(p, t, y)
        yield t, y, f
        if last:
            return


def adaptive_integrate(p: OdeProblem, t0: float, state0, t1: float, ctl: StepControl = StepControl(),
                       observer: Optional[Callable[[float, np.ndarray], None]] = None,
                       post_step: Optional[PostStep] = None) -> np.ndarray:
    """Integrate from ``t0`` to exactly ``t1`` and return the final state.

    ``observer(t, state)`` sees every accepted step (including the start).
    ``post_step(t, state) -> state`` may replace accepted states, e.g. to
    project back onto a constraint manifold.
    """
    y = None
    for t, y, _ in _march(p, t0, state0, t1, ctl, post_step):
        if observer is not None:
            observer(t, y)
    return y


def hermite(t0, y0, f0, t1, y1, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def output_times(t0: float, t1: float, stride: float) -> np.ndarray:
    """``t0 + k*stride`` up to ``t1``; ``t1`` itself is always the last entry."""
    if not stride > 0:
        raise ValidationError("stride must be positive")
    span = t1 - t0
    count = int(np.floor(span / stride * (1 + 1e-12)))
    times = t0 + stride * np.arange(count + 1)
    if t1 - times[-1] > 1e-12 * max(1.0, abs(span)):
        times = np.append(times, t1)
    else:
        times[-1] = t1
    return times


def sample_trajectory(p: OdeProblem, t0: float, state0, t1: float, ctl: StepControl, stride: float,
                      post_step: Optional[PostStep] = None,
                      interpolate: bool = False) -> list[tuple[float, np.ndarray]]:
    """States at ``t0 + k*stride`` (plus ``t1``).

    By default the integrator lands exactly on every output time. With
    ``interpolate=True`` steps run free and outputs come from cubic Hermite
    interpolation between accepted steps, which is cheaper but adds an
    O(h^4) interpolation error on top of the step error.
    """
    times = output_times(t0, t1, stride)
    out = []
    i = 0
    prev = None
    stops = None if interpolate else times[1:-1]
    for t, y, f in _march(p, t0, state0, t1, ctl, post_step, stops):
        if prev is None:
            out.append((times[0], y.copy()))
            i = 1
        else:
            tp, yp, fp = prev
            while i < len(times) and times[i] <= t:
                tk = times[i]
                yk = y.copy() if tk == t else hermite(tp, yp, fp, t, y, f, tk)
                out.append((tk, yk))
                i += 1
        prev = (t, y, f)
    return out
