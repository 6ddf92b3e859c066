import math

import numpy as np
import pytest

from emdensys.analysis import lorentz_weak_quasinorm
from emdensys.exponents import InadmissibleError, SystemParams, derive_scaling
from emdensys.solver import (
    GREEN_TOL,
    BracketFailure,
    Method,
    NonConvergence,
    ShootingConfig,
    TrajectoryClass,
    TrajectoryLabel,
    bisect_ground_state,
    from_fields,
    integrate_radial,
    picard_solve,
    rescale,
    series_start,
)

from conftest import BUBBLE, CRITICAL, SUBCRITICAL, bubble_field, bubble_profile

# regression fixtures recorded from the bisection oracle
BETA_SUBCRITICAL = 1.0766531579658392
BETA_CRITICAL = 1.0803179165542411
# first zero of u for (alpha, beta) = (1, 2) on the bubble tuple
BUBBLE_BETA2_RADIUS = 0.4359003113660751


# ----------------------------------------------------------------------
# configuration types


@pytest.mark.parametrize(
    "kwargs",
    [
        {"r_start": 0.0},
        {"r_start": 1e-6, "r_max": 0.5},
        {"ode_tol": 0.0},
        {"beta_bracket": (2.0, 1.0)},
        {"beta_bracket": (0.0, 1.0)},
    ],
)
def test_shooting_config_invariants(kwargs):
    with pytest.raises(ValueError):
        ShootingConfig(**kwargs)


def test_trajectory_class_invariant():
    TrajectoryClass(TrajectoryLabel.U_HITS_ZERO, 0.3)
    TrajectoryClass(TrajectoryLabel.DECAYING)
    with pytest.raises(ValueError):
        TrajectoryClass(TrajectoryLabel.V_HITS_ZERO)
    with pytest.raises(ValueError):
        TrajectoryClass(TrajectoryLabel.NON_DECAYING, 1.0)


def test_series_start_matches_taylor_data():
    y = series_start(BUBBLE, 1.0, 2.0, 1e-3)
    # u = 1 - 2^5 rho^2 / 6, rho u' = -2 * 2^5 rho^2 / 6
    assert y[0] == pytest.approx(1.0 - 32e-6 / 6.0, rel=1e-15)
    assert y[2] == pytest.approx(-64e-6 / 6.0, rel=1e-15)
    assert y[1] == pytest.approx(2.0 - 1e-6 / 6.0, rel=1e-15)


# ----------------------------------------------------------------------
# integrate_radial


def test_bubble_trajectory_decays():
    traj, cls = integrate_radial(BUBBLE, 1.0, 1.0)
    assert cls.label is TrajectoryLabel.DECAYING
    u1 = np.interp(0.0, np.log(traj.rho), traj.u)
    assert u1 == pytest.approx(math.sqrt(3.0) / 2.0, abs=1e-6)


def test_zero_beta_rejected():
    with pytest.raises(ValueError):
        integrate_radial(BUBBLE, 1.0, 0.0)


def test_large_beta_kills_u():
    traj, cls = integrate_radial(BUBBLE, 1.0, 2.0)
    assert cls.label is TrajectoryLabel.U_HITS_ZERO
    assert cls.event_radius == pytest.approx(BUBBLE_BETA2_RADIUS, rel=1e-8)
    assert traj.rho[-1] <= cls.event_radius


def test_small_beta_kills_v():
    _, cls = integrate_radial(BUBBLE, 1.0, 0.5)
    assert cls.label is TrajectoryLabel.V_HITS_ZERO


def test_inadmissible_tuple_refused():
    with pytest.raises(InadmissibleError):
        integrate_radial(SystemParams(4, 1.5, 1.5, 0, 0), 1.0, 1.0)


# ----------------------------------------------------------------------
# bisect_ground_state


def test_bubble_ground_state(bubble_state):
    st = bubble_state
    assert st.beta_star == pytest.approx(1.0, abs=1e-8)
    assert st.method is Method.SHOOTING
    assert np.allclose(st.u.values, st.v.values, rtol=1e-7)
    mask = st.u.rho <= 100.0
    err = np.abs(st.u.values[mask] / bubble_profile(st.u.rho[mask]) - 1.0)
    assert err.max() <= 1e-4


def test_subcritical_beta_fixture(subcritical_state):
    assert subcritical_state.beta_star == pytest.approx(BETA_SUBCRITICAL, abs=1e-8)


def test_critical_beta_fixture(critical_state):
    assert critical_state.beta_star == pytest.approx(BETA_CRITICAL, abs=1e-8)


def test_critical_v_has_log_tail(critical_state):
    v = critical_state.v
    far = v.rho >= 1e3
    # rho v / ln rho settles while rho v keeps growing
    assert np.all(np.diff(v.rho[far] * v.values[far]) > 0.0)
    assert v.tail.log_power == 1.0


@pytest.mark.parametrize("fixture", ["bubble_state", "subcritical_state", "critical_state"])
def test_ground_state_contract(request, fixture):
    st = request.getfixturevalue(fixture)
    assert st.accepted
    assert st.u.value_at_zero == 1.0
    assert np.all(st.u.values > 0.0) and np.all(st.v.values > 0.0)
    assert max(st.residuals.green_u, st.residuals.green_v) <= GREEN_TOL
    assert st.diagnostics["class_history"]


def test_bracket_failure_without_widening():
    config = ShootingConfig(beta_bracket=(5.0, 6.0), max_widenings=0)
    with pytest.raises(BracketFailure) as info:
        bisect_ground_state(BUBBLE, config)
    assert info.value.bracket == (5.0, 6.0)


def test_bracket_widening_recovers():
    st = bisect_ground_state(BUBBLE, ShootingConfig(beta_bracket=(5.0, 6.0)))
    assert st.beta_star == pytest.approx(1.0, abs=1e-8)


# ----------------------------------------------------------------------
# picard_solve


def test_picard_fixed_point_bubble(bubble_state):
    st = picard_solve(BUBBLE, bubble_state)
    assert st.method is Method.PICARD
    assert st.diagnostics["iterations"] <= 2
    assert st.diagnostics["change_history"][-1] <= 1e-8
    assert st.beta_star == pytest.approx(1.0, abs=1e-8)


def test_picard_recovers_from_amplitude_error(bubble_state):
    seed = from_fields(BUBBLE, bubble_state.u.scaled(1.1), bubble_state.v.scaled(1.1))
    st = picard_solve(BUBBLE, seed)
    err = np.abs(st.u.values / bubble_profile(st.u.rho) - 1.0)
    assert err[st.u.rho <= 100.0].max() <= 1e-4


def test_picard_from_closed_form_guess(grid3):
    # the exact bubble is already the fixed point
    u = bubble_field(grid3)
    st = picard_solve(BUBBLE, from_fields(BUBBLE, u, u))
    assert st.diagnostics["iterations"] <= 2


def test_picard_refines_shooting(subcritical_state):
    st = picard_solve(SUBCRITICAL, subcritical_state)
    before = max(subcritical_state.residuals.green_u, subcritical_state.residuals.green_v)
    after = max(st.residuals.green_u, st.residuals.green_v)
    assert after <= before and after <= GREEN_TOL


@pytest.mark.parametrize("fixture", ["subcritical_state", "critical_state"])
def test_cross_method_agreement(request, fixture):
    shoot = request.getfixturevalue(fixture)
    pic = picard_solve(shoot.params, shoot)
    mask = shoot.u.rho <= 10.0
    for a, b in ((shoot.u, pic.u), (shoot.v, pic.v)):
        assert np.max(np.abs(b.values[mask] / a.values[mask] - 1.0)) <= 1e-3


def test_picard_stall_reports_nonconvergence(bubble_state):
    # a dilated bubble would be another exact solution; a distorted one is not
    u = bubble_field(bubble_state.u.grid, 0.8)
    u = u.with_values(u.values, tail=bubble_state.u.tail)
    with pytest.raises(NonConvergence) as info:
        picard_solve(BUBBLE, from_fields(BUBBLE, u, u), max_iters=3)
    assert len(info.value.history) == 3


def test_picard_rejects_bad_damping(bubble_state):
    with pytest.raises(ValueError):
        picard_solve(BUBBLE, bubble_state, damping=0.0)


# ----------------------------------------------------------------------
# rescale


def test_rescale_identity(bubble_state):
    st = rescale(bubble_state, 1.0)
    assert np.array_equal(st.u.values, bubble_state.u.values)
    assert np.array_equal(st.u.rho, bubble_state.u.rho)


def test_rescale_bubble_value_at_origin(bubble_state):
    st = rescale(bubble_state, 2.0)
    assert st.u.value_at_zero == pytest.approx(math.sqrt(2.0), rel=1e-15)
    # (mu^(1/2) U(mu rho)) is again a bubble: check one node against the closed form
    i = 2000
    expected = math.sqrt(2.0) * bubble_profile(2.0 * st.u.rho[i])
    assert st.u.values[i] == pytest.approx(expected, rel=1e-6)


def test_rescale_rejects_nonpositive(bubble_state):
    with pytest.raises(ValueError):
        rescale(bubble_state, 0.0)
    with pytest.raises(ValueError):
        rescale(bubble_state, -1.0)


@pytest.mark.parametrize("fixture", ["bubble_state", "subcritical_state", "critical_state"])
def test_rescale_keeps_residuals(request, fixture):
    st = request.getfixturevalue(fixture)
    mu = 2.0
    rs = rescale(st, mu)
    # Green residuals are scale-free; the ODE residual's rounding floor near the
    # first node grows like 1/rho_1^2, i.e. by mu^2 at most
    assert rs.residuals.green_u == pytest.approx(st.residuals.green_u, rel=1e-3, abs=1e-12)
    assert rs.residuals.ode <= mu**2 * st.residuals.ode + 1e-12


@pytest.mark.parametrize("fixture", ["bubble_state", "subcritical_state", "critical_state"])
def test_scale_invariant_quasinorms(request, fixture):
    st = request.getfixturevalue(fixture)
    rep = derive_scaling(st.params)
    rs = rescale(st, 2.0)
    for before, after, idx in ((st.u, rs.u, rep.a), (st.v, rs.v, rep.b)):
        q0 = lorentz_weak_quasinorm(before, idx)
        q1 = lorentz_weak_quasinorm(after, idx)
        assert q1 == pytest.approx(q0, rel=1e-3)


def test_from_fields_needs_shared_grid(bubble_state, grid3):
    from emdensys.radial_greens import RadialGrid

    other = bubble_field(RadialGrid.log_uniform(3, 1e-3, 1e5, 2048))
    with pytest.raises(ValueError):
        from_fields(BUBBLE, bubble_state.u, other)
