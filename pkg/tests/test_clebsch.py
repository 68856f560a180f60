import numpy as np
import pytest

from conftest import AXES, ELLIPSE_PERIMETER, return_time
from ellgeo import model
from ellgeo.clebsch import clebsch_at_times, clebsch_rhs, integrate_clebsch, omega_from_l, time_map
from ellgeo.conserved import drift_report
from ellgeo.direct import integrate_direct
from ellgeo.errors import DuplicateAxis, NonMonotoneTime, ZeroVelocity
from ellgeo.model import ClebschState, phase_state, validate_ellipsoid
from ellgeo.ode import StepControl

CTL = StepControl(rtol=1e-10, atol=1e-12)
NEAR_SPHERE = (4.0, 4.000001, 3.999999)


def test_omega_values():
    np.testing.assert_allclose(omega_from_l(validate_ellipsoid([1, 4]), [1.0]), [0.25])
    np.testing.assert_array_equal(omega_from_l(validate_ellipsoid([3, 2, 1]), np.zeros(3)), 0)
    # packed order (1,2), (1,3), (2,3)
    assert omega_from_l(validate_ellipsoid([3, 2, 1]), [0, 2.0, 0])[1] == pytest.approx(2 / 3)


def test_omega_duplicate():
    with pytest.raises(DuplicateAxis):
        omega_from_l(validate_ellipsoid([4, 4, 4]), np.zeros(3))


def test_rhs_hand_value():
    dy, dl = clebsch_rhs(validate_ellipsoid([1, 4]), ClebschState(y=np.array([0.0, 1.0]), l=np.array([1.0])))
    np.testing.assert_allclose(dy, [-0.25, 0.0])
    np.testing.assert_allclose(dl, [0.0])


def test_rhs_zero_velocity_is_pure_commutator(rng):
    e = validate_ellipsoid([3, 2, 1])
    lp = rng.standard_normal(3)
    dy, dl = clebsch_rhs(e, ClebschState(y=np.zeros(3), l=lp))
    L = model.unpack(lp, 3)
    W = L / np.outer(e.a, e.a)
    np.testing.assert_array_equal(dy, 0)
    np.testing.assert_allclose(dl, model.pack(L @ W - W @ L), atol=1e-15)


def test_rhs_matches_constraint_force(rng):
    # velocity part equals -B x_j / a_j computed from the direct data
    e = validate_ellipsoid([3, 2, 1])
    for _ in range(20):
        s = model.sample_state(e, rng)
        dy, _ = clebsch_rhs(e, model.to_clebsch(e, s))
        B = model.B_value(e, s.y)
        np.testing.assert_allclose(dy, -B * s.x / e.a, atol=1e-14)


def test_rhs_matches_direct_in_local_time(rng):
    # dl/dtau = A * d(x ^ y)/dt with x'' from the direct equations, by finite differences of x ^ y
    e = validate_ellipsoid([4, 3, 2, 1])
    s = model.sample_state(e, rng)
    f = model.forms(e, s)
    h = 1e-5
    acc = -f.nu * s.x / e.a
    lp = model.wedge(s.x + h * s.y, s.y + h * acc)
    lm = model.wedge(s.x - h * s.y, s.y - h * acc)
    _, dl = clebsch_rhs(e, model.to_clebsch(e, s))
    np.testing.assert_allclose(dl, f.A * (lp - lm) / (2 * h), atol=1e-9)


def test_duplicate_axes_refused():
    with pytest.raises(DuplicateAxis):
        integrate_clebsch(validate_ellipsoid([4, 4, 4]), phase_state([2, 0, 0], [0, 1, 0]), 1.0)


def test_zero_velocity_refused():
    with pytest.raises(ZeroVelocity):
        integrate_clebsch(validate_ellipsoid([4, 1]), phase_state([2, 0], [0, 0]), 1.0)


def test_ellipse_period():
    e = validate_ellipsoid([4, 1])
    s0 = phase_state([2, 0], [0, 1])

    def state_at(t):
        c = clebsch_at_times(e, s0, [t], CTL)[-1]
        return c.x, c.y

    assert abs(return_time(state_at, 9.6) - ELLIPSE_PERIMETER) < 1e-6


def test_near_sphere_period():
    e = validate_ellipsoid(NEAR_SPHERE)
    s0 = phase_state([2, 0, 0], [0, 1, 0])

    def state_at(t):
        c = clebsch_at_times(e, s0, [t], CTL)[-1]
        return c.x, c.y

    assert abs(return_time(state_at, 12.5) - 4 * np.pi) < 1e-4


def test_time_map_near_sphere():
    e = validate_ellipsoid(NEAR_SPHERE)
    samples = integrate_clebsch(e, phase_state([2, 0, 0], [0, 1, 0]), 40.0, CTL, stride=0.1)
    tm = time_map(samples)
    assert tm.t_of_tau(0.0) == 0.0
    tau = np.linspace(0, 40, 333)
    assert np.max(np.abs(tm.t_of_tau(tau) - 0.25 * tau)) < 1e-4


def test_time_map_roundtrip(rng):
    e = validate_ellipsoid([3, 2, 1])
    samples = integrate_clebsch(e, model.sample_state(e, rng), 20.0, CTL, stride=0.05)
    tm = time_map(samples)
    t = np.linspace(0, tm.t[-1], 997)
    assert np.max(np.abs(tm.t_of_tau(tm.tau_of_t(t)) - t)) < 1e-8


def test_time_map_rejects_non_monotone(rng):
    e = validate_ellipsoid([3, 2, 1])
    samples = integrate_clebsch(e, model.sample_state(e, rng), 1.0, CTL, stride=0.25)
    with pytest.raises(NonMonotoneTime):
        time_map(samples[::-1])


def test_time_map_against_exact_landing(rng):
    e = validate_ellipsoid([3, 2, 1])
    s0 = model.sample_state(e, rng)
    tm = time_map(integrate_clebsch(e, s0, 10.0, CTL, stride=0.05))
    targets = np.linspace(0.5, tm.t[-1] - 0.1, 7)
    exact = clebsch_at_times(e, s0, targets, CTL)
    np.testing.assert_allclose([c.t for c in exact], targets, atol=1e-12)
    np.testing.assert_allclose(tm.tau_of_t(targets), [c.tau for c in exact], atol=1e-8)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_equivalence_with_direct(n, rng):
    e = validate_ellipsoid(AXES[n])
    for _ in range(3):
        s0 = model.sample_state(e, rng)
        direct = integrate_direct(e, s0, 10.0, CTL, stride=0.1)
        cl = clebsch_at_times(e, s0, [s.t for s in direct], CTL)
        assert max(np.max(np.abs(a.x - b.x)) for a, b in zip(direct, cl)) < 1e-6


def test_cross_check_against_tight_direct(rng):
    e = validate_ellipsoid([3, 2, 1])
    s0 = model.sample_state(e, rng)
    direct = integrate_direct(e, s0, 10.0, StepControl(rtol=1e-12, atol=1e-14), stride=0.1)
    cl = clebsch_at_times(e, s0, [s.t for s in direct], CTL)
    assert len(cl) == 101
    assert max(np.max(np.abs(a.x - b.x)) for a, b in zip(direct, cl)) < 1e-6


@pytest.mark.parametrize("n", [2, 3, 4])
def test_flow_invariants_tau100(n, rng):
    e = validate_ellipsoid(AXES[n])
    traj = integrate_clebsch(e, model.sample_state(e, rng), 100.0, CTL, stride=0.5)
    rep = drift_report(traj)
    for k in ["H", "I"] + [f"F_{j}" for j in range(1, n + 1)]:
        assert rep[k] < 1e-7, k
    assert rep["max_q0_res"] < 1e-8 and rep["max_tan_res"] < 1e-8


def test_energy_identity_along_flow(rng):
    e = validate_ellipsoid([4, 3, 2, 1])
    traj = integrate_clebsch(e, model.sample_state(e, rng), 100.0, CTL, stride=1.0)
    # B(y) - sum_{j<k} l^2/(a_j a_k) is exactly 2 H_C; it starts at zero and must stay there
    assert max(abs(2 * s.invariants.H_clebsch) for s in traj) < 1e-9


def test_clebsch_hamiltonian_drift_tight(rng):
    e = validate_ellipsoid([3, 2, 1])
    traj = integrate_clebsch(e, model.sample_state(e, rng), 100.0, StepControl(rtol=1e-12, atol=1e-14), stride=1.0)
    assert drift_report(traj)["H_C"] < 1e-9


@pytest.mark.parametrize("n", [4, 5])
def test_plucker_preserved(n, rng):
    e = validate_ellipsoid(AXES[n])
    traj = integrate_clebsch(e, model.sample_state(e, rng), 100.0, CTL, stride=1.0)
    assert drift_report(traj)["max_plucker_res"] < 1e-8
