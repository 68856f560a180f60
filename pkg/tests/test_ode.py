import numpy as np
import pytest
from scipy.integrate import solve_ivp

from ellgeo.errors import MaxStepsExceeded, NonFiniteState, StepUnderflow
from ellgeo.ode import OdeProblem, StepControl, adaptive_integrate, output_times, rk4_step, sample_trajectory

growth = OdeProblem(1, lambda t, x: x)
decay = OdeProblem(1, lambda t, x: -x)
constant = OdeProblem(1, lambda t, x: np.ones(1))
oscillator = OdeProblem(2, lambda t, z: np.array([z[1], -z[0]]))


def test_rk4_zero_field():
    p = OdeProblem(3, lambda t, x: np.zeros(3))
    np.testing.assert_array_equal(rk4_step(p, 0.0, [1.0, 2.0, 3.0], 0.5), [1.0, 2.0, 3.0])


def test_rk4_taylor_polynomial():
    # RK4 on x' = x reproduces the 4th-degree Taylor polynomial of exp(h)
    h = 0.1
    assert rk4_step(growth, 0.0, [1.0], h)[0] == pytest.approx(1 + h + h**2 / 2 + h**3 / 6 + h**4 / 24, abs=1e-15)


def test_rk4_oscillator_period():
    h = 1e-3
    z = np.array([1.0, 0.0])
    steps = int(round(2 * np.pi / h))
    t = 0.0
    for _ in range(steps):
        z = rk4_step(oscillator, t, z, h)
        t += h
    z = rk4_step(oscillator, t, z, 2 * np.pi - t) if 2 * np.pi > t else z
    exact = np.array([np.cos(2 * np.pi), -np.sin(2 * np.pi)])
    assert np.max(np.abs(z - exact)) < 1e-10


def test_rk4_fourth_order_convergence():
    def err(h):
        z, t = np.array([1.0]), 0.0
        for _ in range(int(round(1 / h))):
            z = rk4_step(OdeProblem(1, lambda t, x: -2 * x), t, z, h)
            t += h
        return abs(z[0] - np.exp(-2.0))

    ratio = err(0.05) / err(0.025)
    assert 16 * 0.8 < ratio < 16 * 1.2


def test_rk4_non_finite():
    with pytest.raises(NonFiniteState):
        rk4_step(OdeProblem(1, lambda t, x: np.array([np.inf])), 0.0, [1.0], 0.1)


def test_linear_exactness():
    x1 = adaptive_integrate(constant, 0.0, [2.5], 1.0, StepControl())
    assert x1[0] == pytest.approx(3.5, abs=1e-14)


def test_decay_against_exp():
    x = adaptive_integrate(decay, 0.0, [1.0], 5.0, StepControl(rtol=1e-10, atol=1e-12))
    assert abs(x[0] - np.exp(-5)) < 1e-9


def test_circle_ten_periods():
    z = adaptive_integrate(oscillator, 0.0, [1.0, 0.0], 20 * np.pi, StepControl(rtol=1e-12, atol=1e-14))
    assert abs(np.hypot(*z) - 1) < 1e-9


def test_agrees_with_scipy_dop853():
    # independent reference integrator on a nonlinear problem
    lv = OdeProblem(2, lambda t, z: np.array([z[0] - z[0] * z[1], z[0] * z[1] - z[1]]))
    ours = adaptive_integrate(lv, 0.0, [2.0, 1.0], 10.0, StepControl(rtol=1e-11, atol=1e-13))
    ref = solve_ivp(lv.rhs, (0, 10), [2.0, 1.0], method="DOP853", rtol=1e-13, atol=1e-15).y[:, -1]
    np.testing.assert_allclose(ours, ref, rtol=1e-8)


def test_error_bound_smooth_problem():
    rtol, atol = 1e-8, 1e-10
    x = adaptive_integrate(decay, 0.0, [1.0], 3.0, StepControl(rtol=rtol, atol=atol))
    assert abs(x[0] - np.exp(-3)) <= 100 * (atol + rtol * abs(x[0]))


def test_observer_times_strictly_increasing():
    seen = []
    adaptive_integrate(oscillator, 0.0, [1.0, 0.0], 7.3, StepControl(rtol=1e-9), observer=lambda t, z: seen.append(t))
    assert seen[0] == 0.0
    assert all(b > a for a, b in zip(seen, seen[1:]))
    assert seen[-1] == 7.3


def test_fixed_mode_hits_endpoint():
    seen = []
    adaptive_integrate(constant, 0.0, [0.0], 1.05, StepControl(mode="fixed", h=0.1), observer=lambda t, z: seen.append(t))
    assert seen[-1] == 1.05


def test_max_steps():
    with pytest.raises(MaxStepsExceeded):
        adaptive_integrate(oscillator, 0.0, [1.0, 0.0], 100.0, StepControl(rtol=1e-12, max_steps=10))


def test_step_underflow():
    blowup = OdeProblem(1, lambda t, x: x**2)
    with pytest.raises(StepUnderflow):
        adaptive_integrate(blowup, 0.0, [1.0], 2.0, StepControl(rtol=1e-10, h_min=1e-6))


def test_output_times_contract():
    np.testing.assert_array_equal(output_times(0.0, 1.0, 1.0), [0.0, 1.0])
    np.testing.assert_allclose(output_times(0.0, 1.0, 0.25), [0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(output_times(0.0, 1.0, 0.3), [0, 0.3, 0.6, 0.9, 1.0])


def test_sample_endpoints_only():
    out = sample_trajectory(decay, 0.0, [1.0], 2.0, StepControl(), 2.0)
    assert [t for t, _ in out] == [0.0, 2.0]


@pytest.mark.parametrize("interpolate", [False, True])
def test_sample_linear(interpolate):
    out = sample_trajectory(constant, 0.0, [0.0], 1.0, StepControl(), 0.25, interpolate=interpolate)
    np.testing.assert_allclose([z[0] for _, z in out], [0, 0.25, 0.5, 0.75, 1.0], atol=1e-14)


def _oscillator_sample_error(rtol, interpolate):
    out = sample_trajectory(oscillator, 0.0, [1.0, 0.0], 10.0, StepControl(rtol=rtol, atol=rtol), 0.1,
                            interpolate=interpolate)
    t = np.array([s for s, _ in out])
    z = np.array([v for _, v in out])
    return np.max(np.abs(z - np.column_stack((np.cos(t), -np.sin(t)))))


@pytest.mark.parametrize("rtol", [1e-8, 1e-10, 1e-12])
def test_sample_oscillator_closed_form(rtol):
    assert _oscillator_sample_error(rtol, interpolate=False) < 10 * rtol


def test_sample_oscillator_hermite():
    # free-running steps plus cubic interpolation: error is dominated by the O(h^4) interpolant
    assert _oscillator_sample_error(1e-10, interpolate=True) < 1e-7
