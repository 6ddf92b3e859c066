"""Radial ground states of the system by shooting and by damped Picard iteration.

Shooting integrates the radial ODEs in t = ln(rho) from a Taylor start near
the origin.  With u(0) = 1 fixed (the scale invariance makes this a
normalisation), v(0) = beta is bisected between trajectories on which u
dies first and trajectories on which v dies first.

A trajectory is certified to lose a component before it actually hits zero:
W_u = u + rho u'/(n-2) is strictly decreasing along every trajectory and
(rho^(n-2) u)' = (n-2) rho^(n-3) W_u, so once W_u < 0 the component u must
reach zero at a finite radius.  The ground state keeps W_u, W_v > 0 forever.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .exponents import (
    Regime,
    SystemParams,
    derive_scaling,
    require_admissible,
    sign_requirements,
)
from .radial_greens import (
    RadialField,
    RadialGrid,
    TailModel,
    newton_potential,
    radial_laplacian,
)

logger = logging.getLogger(__name__)

GREEN_TOL = 1e-3
SLOPE_RTOL = 0.10
DIVERGENCE_THRESHOLD = 1e3
# extra e-folds of radius used to settle the class of a trajectory in bisection
CLASSIFY_EXTRA_LOG_RADIUS = 60.0


class SolverError(RuntimeError):
    pass


class BracketFailure(SolverError):
    def __init__(self, message, bracket=None, classes=None):
        super().__init__(message)
        self.bracket = bracket
        self.classes = classes


class NonConvergence(SolverError):
    def __init__(self, message, interval=None, history=None):
        super().__init__(message)
        self.interval = interval
        self.history = history or []


class IntegrationFailure(SolverError):
    pass


class Method(str, enum.Enum):
    SHOOTING = "Shooting"
    PICARD = "Picard"


class TrajectoryLabel(str, enum.Enum):
    U_HITS_ZERO = "UHitsZero"
    V_HITS_ZERO = "VHitsZero"
    NON_DECAYING = "NonDecaying"
    DECAYING = "Decaying"


@dataclass(frozen=True)
class TrajectoryClass:
    label: TrajectoryLabel
    event_radius: float | None = None

    def __post_init__(self):
        hits = self.label in (TrajectoryLabel.U_HITS_ZERO, TrajectoryLabel.V_HITS_ZERO)
        if hits != (self.event_radius is not None):
            raise ValueError("event_radius must be set exactly for zero-crossing classes")


@dataclass(frozen=True)
class ShootingConfig:
    r_start: float = 1e-6
    r_max: float = 1e6
    ode_tol: float = 1e-12
    beta_bracket: tuple[float, float] = (1e-3, 1e3)
    max_bisections: int = 200
    event_tol: float = 1e-12
    max_widenings: int = 3
    widen_factor: float = 10.0

    def __post_init__(self):
        lo, hi = self.beta_bracket
        if not 0.0 < self.r_start < 1.0 <= self.r_max:
            raise ValueError("need 0 < r_start < 1 <= r_max")
        if not self.ode_tol > 0.0:
            raise ValueError("ode_tol must be positive")
        if not 0.0 < lo < hi:
            raise ValueError("beta_bracket must satisfy 0 < lo < hi")
        object.__setattr__(self, "beta_bracket", (float(lo), float(hi)))


@dataclass(frozen=True)
class Residuals:
    ode_u: float
    ode_v: float
    green_u: float
    green_v: float

    @property
    def ode(self) -> float:
        return max(self.ode_u, self.ode_v)

    def as_dict(self) -> dict:
        return {
            "ode_u": self.ode_u,
            "ode_v": self.ode_v,
            "green_u": self.green_u,
            "green_v": self.green_v,
        }


@dataclass(frozen=True)
class GroundState:
    params: SystemParams
    u: RadialField
    v: RadialField
    beta_star: float
    residuals: Residuals
    method: Method
    diagnostics: dict = field(default_factory=dict)

    @property
    def report(self):
        return derive_scaling(self.params)

    @property
    def accepted(self) -> bool:
        r = self.residuals
        return (
            max(r.green_u, r.green_v) <= GREEN_TOL
            and self.u.is_positive
            and self.v.is_positive
        )


# ----------------------------------------------------------------------
# nonlinearities


def _pos_pow(x: float, e: float) -> float:
    if e == 0.0:
        return 1.0
    return x**e if x > 0.0 else 0.0


def source_fields(params: SystemParams, u: RadialField, v: RadialField):
    """The right-hand sides v^p u^r and u^q v^s as radial fields."""
    p, q, r, s = params.p, params.q, params.r, params.s
    uu = np.clip(u.values, 0.0, None)
    vv = np.clip(v.values, 0.0, None)
    fu = vv**p * uu**r
    fv = uu**q * vv**s
    fu0 = _pos_pow(v.value_at_zero, p) * _pos_pow(u.value_at_zero, r)
    fv0 = _pos_pow(u.value_at_zero, q) * _pos_pow(v.value_at_zero, s)
    tail_u = v.tail.power(p).times(u.tail.power(r)) if r else v.tail.power(p)
    tail_v = u.tail.power(q).times(v.tail.power(s)) if s else u.tail.power(q)
    end = u.grid.nodes[-1]
    tail_u = TailModel.matched(end, fu[-1], tail_u.exponent, tail_u.log_power)
    tail_v = TailModel.matched(end, fv[-1], tail_v.exponent, tail_v.log_power)
    return (
        RadialField(u.grid, fu, fu0, tail_u, nonnegative=True),
        RadialField(u.grid, fv, fv0, tail_v, nonnegative=True),
    )


def _relative_error(approx: np.ndarray, exact: np.ndarray) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        err = np.abs(approx - exact) / np.abs(exact)
    # 0/0 (both vanish) counts as exact, x/0 as infinitely wrong
    err = np.where(np.isnan(err), 0.0, err)
    return float(np.max(err))


def _scaled_sup(diff: np.ndarray, scale: np.ndarray) -> float:
    top = float(np.max(scale))
    if top == 0.0:
        return 0.0 if not np.any(diff) else math.inf
    return float(np.max(diff)) / top


def compute_residuals(params: SystemParams, u: RadialField, v: RadialField) -> Residuals:
    """Green-identity and ODE residuals of a candidate pair.

    The Green residual is the largest nodal relative deviation of u from
    Γ*(v^p u^r) (and of v from Γ*(u^q v^s)).  The ODE residual is the sup of
    |-Δu - v^p u^r| over interior nodes, scaled by sup |v^p u^r|.
    """
    fu, fv = source_fields(params, u, v)
    gu = newton_potential(fu)
    gv = newton_potential(fv)
    lu = radial_laplacian(u)
    lv = radial_laplacian(v)
    inner = slice(1, -1)
    ode_u = _scaled_sup(np.abs(lu.values[inner] - fu.values[inner]), fu.values)
    ode_v = _scaled_sup(np.abs(lv.values[inner] - fv.values[inner]), fv.values)
    return Residuals(
        ode_u=float(ode_u),
        ode_v=float(ode_v),
        green_u=_relative_error(gu.values, u.values),
        green_v=_relative_error(gv.values, v.values),
    )


# ----------------------------------------------------------------------
# shooting


class _RadialSystem:
    """Right-hand side in t = ln rho for y = (u, v, rho u', rho v')."""

    def __init__(self, params: SystemParams):
        self.params = params
        self.clamps = 0

    def __call__(self, t, y):
        n, p, q, r, s = self.params.n, self.params.p, self.params.q, self.params.r, self.params.s
        u, v, du, dv = y
        if u < 0.0 or v < 0.0:
            self.clamps += 1
        rho2 = math.exp(2.0 * t)
        fu = _pos_pow(v, p) * _pos_pow(u, r)
        fv = _pos_pow(u, q) * _pos_pow(v, s)
        return [du, dv, -(n - 2.0) * du - rho2 * fu, -(n - 2.0) * dv - rho2 * fv]


def series_start(params: SystemParams, alpha: float, beta: float, r_start: float):
    """Second-order Taylor data (u, v, rho u', rho v') at rho = r_start."""
    n = params.n
    cu = beta**params.p * alpha**params.r / (2.0 * n)
    cv = alpha**params.q * beta**params.s / (2.0 * n)
    rho2 = r_start**2
    return np.array([alpha - cu * rho2, beta - cv * rho2, -2.0 * cu * rho2, -2.0 * cv * rho2])


def _make_events(n):
    def u_zero(t, y):
        return y[0]

    def v_zero(t, y):
        return y[1]

    def wu_zero(t, y):
        return y[0] + y[2] / (n - 2.0)

    def wv_zero(t, y):
        return y[1] + y[3] / (n - 2.0)

    for ev in (u_zero, v_zero):
        ev.terminal = True
        ev.direction = -1
    for ev in (wu_zero, wv_zero):
        ev.terminal = True
        ev.direction = -1
    return u_zero, v_zero, wu_zero, wv_zero


def _refine_event(sol, t_lo, t_hi, index, event_tol):
    """Bisection on the dense output for the zero of component ``index``."""
    f_lo = sol(t_lo)[index]
    for _ in range(200):
        if t_hi - t_lo <= event_tol:
            break
        mid = 0.5 * (t_lo + t_hi)
        f_mid = sol(mid)[index]
        if (f_mid > 0.0) == (f_lo > 0.0):
            t_lo, f_lo = mid, f_mid
        else:
            t_hi = mid
    return 0.5 * (t_lo + t_hi)


def _first_crossing(params, y0, t0, t_end, config, with_certificates):
    """Integrate until a component (or, optionally, its certificate) crosses zero.

    Returns (kind, index, t_event, ivp_result); kind is 'zero', 'certificate'
    or None.
    """
    rhs = _RadialSystem(params)
    events = _make_events(params.n)
    if not with_certificates:
        events = events[:2]
    res = solve_ivp(
        rhs,
        (t0, t_end),
        y0,
        method="DOP853",
        rtol=config.ode_tol,
        atol=1e-300,
        events=list(events),
        dense_output=True,
    )
    if res.status == -1:
        raise IntegrationFailure(f"radial integration failed: {res.message}")
    hits = [(te[0], k) for k, te in enumerate(res.t_events) if te.size]
    if not hits:
        return None, None, None, res, rhs.clamps
    t_hit, k = min(hits)
    kind = "zero" if k < 2 else "certificate"
    component = k % 2
    if kind == "zero":
        # tighten the located root on the dense output
        t_prev = res.t[-2] if res.t.size > 1 else t0
        t_hit = _refine_event(res.sol, t_prev, t_hit + config.event_tol, component, config.event_tol)
    return kind, component, t_hit, res, rhs.clamps


def _tail_slope(rho: np.ndarray, f: np.ndarray) -> float:
    """Least-squares slope of ln f against ln rho on the default fit window."""
    from .analysis import default_window_mask

    mask = default_window_mask(rho) & (f > 0.0)
    if mask.sum() < 3:
        return math.nan
    x = np.log(rho[mask])
    y = np.log(f[mask])
    return float(-np.polyfit(x, y, 1)[0])


@dataclass
class Trajectory:
    rho: np.ndarray
    u: np.ndarray
    v: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    clamps: int = 0


def classify_beta(params: SystemParams, beta: float, config: ShootingConfig, alpha: float = 1.0):
    """Which component dies first along the trajectory with u(0)=alpha, v(0)=beta.

    Returns (label, event_radius); label is None when no certificate fires
    within the classification horizon (a numerically decaying trajectory).
    """
    y0 = series_start(params, alpha, beta, config.r_start)
    if y0[0] <= 0.0 or y0[1] <= 0.0:
        label = TrajectoryLabel.U_HITS_ZERO if y0[0] <= y0[1] else TrajectoryLabel.V_HITS_ZERO
        return label, config.r_start
    n = params.n
    if y0[0] + y0[2] / (n - 2.0) <= 0.0 or y0[1] + y0[3] / (n - 2.0) <= 0.0:
        wu = y0[0] + y0[2] / (n - 2.0)
        return (TrajectoryLabel.U_HITS_ZERO if wu <= 0.0 else TrajectoryLabel.V_HITS_ZERO), config.r_start
    t0 = math.log(config.r_start)
    t_end = math.log(config.r_max) + CLASSIFY_EXTRA_LOG_RADIUS
    kind, comp, t_hit, res, _ = _first_crossing(params, y0, t0, t_end, config, True)
    if kind is None:
        return None, None
    label = TrajectoryLabel.U_HITS_ZERO if comp == 0 else TrajectoryLabel.V_HITS_ZERO
    if kind == "zero":
        return label, math.exp(t_hit)
    # the certificate guarantees a later zero; locate it when cheaply reachable
    y1 = res.sol(t_hit)
    kind2, comp2, t_zero, _, _ = _first_crossing(params, y1, t_hit, t_end + 40.0, config, False)
    if kind2 == "zero":
        label = TrajectoryLabel.U_HITS_ZERO if comp2 == 0 else TrajectoryLabel.V_HITS_ZERO
        return label, math.exp(t_zero)
    return label, math.exp(t_hit)


def integrate_radial(
    params: SystemParams,
    alpha: float,
    beta: float,
    config: ShootingConfig | None = None,
    grid: RadialGrid | None = None,
):
    """Integrate the radial system from the series start and classify it.

    Returns ``(trajectory, TrajectoryClass)``.  Samples are taken on ``grid``
    (default: log-uniform grid up to ``config.r_max``) up to the first zero
    crossing.
    """
    config = config or ShootingConfig()
    require_admissible(params)
    if not (alpha > 0.0 and beta > 0.0):
        raise ValueError("shooting needs alpha > 0 and beta > 0")
    if grid is None:
        grid = RadialGrid.log_uniform(params.n, rho_max=config.r_max)
    n = params.n
    y0 = series_start(params, alpha, beta, config.r_start)
    t0 = math.log(config.r_start)
    t_end = math.log(max(config.r_max, grid.nodes[-1]))
    if y0[0] <= 0.0 or y0[1] <= 0.0:
        label = TrajectoryLabel.U_HITS_ZERO if y0[0] <= y0[1] else TrajectoryLabel.V_HITS_ZERO
        empty = np.empty(0)
        return Trajectory(empty, empty, empty, empty, empty), TrajectoryClass(label, config.r_start)
    kind, comp, t_hit, res, clamps = _first_crossing(params, y0, t0, t_end, config, False)
    t_stop = t_hit if kind == "zero" else t_end
    rho = grid.nodes[np.log(grid.nodes) <= t_stop]
    ys = res.sol(np.log(rho)) if rho.size else np.empty((4, 0))
    traj = Trajectory(rho, ys[0], ys[1], ys[2] / np.maximum(rho, 1e-300), ys[3] / rho, clamps)
    if kind == "zero":
        label = TrajectoryLabel.U_HITS_ZERO if comp == 0 else TrajectoryLabel.V_HITS_ZERO
        return traj, TrajectoryClass(label, math.exp(t_hit))

    # both components stayed positive up to the horizon
    report = derive_scaling(params)
    growth = rho[-1] ** (n - 2.0) * traj.u[-1] / max(rho[0] ** (n - 2.0) * traj.u[0], 1e-300)
    slope_u = _tail_slope(rho, traj.u)
    slope_v = _tail_slope(rho, _log_normalised(rho, traj.v, report.v_profile.log_power))
    ok_u = abs(slope_u - report.u_profile.exponent) <= SLOPE_RTOL * report.u_profile.exponent
    ok_v = abs(slope_v - report.v_profile.exponent) <= SLOPE_RTOL * report.v_profile.exponent
    if ok_u and ok_v:
        return traj, TrajectoryClass(TrajectoryLabel.DECAYING)
    if growth > DIVERGENCE_THRESHOLD or not ok_u or not ok_v:
        return traj, TrajectoryClass(TrajectoryLabel.NON_DECAYING)
    return traj, TrajectoryClass(TrajectoryLabel.NON_DECAYING)


def _log_normalised(rho, f, log_power):
    if not log_power:
        return f
    with np.errstate(divide="ignore", invalid="ignore"):
        return f / np.log(rho) ** log_power


def _trajectory_fields(params, traj: Trajectory, grid: RadialGrid, beta: float):
    report = derive_scaling(params)
    end = grid.nodes[-1]
    tail_u = TailModel.matched(end, traj.u[-1], report.u_profile.exponent)
    tail_v = TailModel.matched(
        end, traj.v[-1], report.v_profile.exponent, report.v_profile.log_power
    )
    u = RadialField(grid, traj.u, 1.0, tail_u, nonnegative=True)
    v = RadialField(grid, traj.v, beta, tail_v, nonnegative=True)
    return u, v


def _bisect_once(params, config, lo, hi, history):
    """Geometric bisection of [lo, hi]; returns (beta, width, decaying_hit)."""
    lab_lo, _ = classify_beta(params, lo, config)
    lab_hi, _ = classify_beta(params, hi, config)
    history.append({"beta": lo, "class": getattr(lab_lo, "value", "Decaying")})
    history.append({"beta": hi, "class": getattr(lab_hi, "value", "Decaying")})
    if lab_lo is None:
        return lo, 0.0, True
    if lab_hi is None:
        return hi, 0.0, True
    if lab_lo == lab_hi:
        raise BracketFailure(
            f"bracket ends both classify as {lab_lo.value}", bracket=(lo, hi), classes=(lab_lo, lab_hi)
        )
    for _ in range(config.max_bisections):
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        lab, radius = classify_beta(params, mid, config)
        history.append({"beta": mid, "class": getattr(lab, "value", "Decaying"), "radius": radius})
        if lab is None:
            return mid, hi - lo, True
        if lab == lab_lo:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi), hi - lo, False


def bisect_ground_state(
    params: SystemParams,
    config: ShootingConfig | None = None,
    grid: RadialGrid | None = None,
) -> GroundState:
    """Shooting for v(0) with u(0) = 1 fixed.

    Raises BracketFailure when the (widened) bracket does not separate the
    two extinction classes, NonConvergence when no decaying trajectory is
    found at the final resolution.
    """
    config = config or ShootingConfig()
    require_admissible(params)
    if grid is None:
        grid = RadialGrid.log_uniform(params.n, rho_max=config.r_max)
    req = sign_requirements(params)
    history: list[dict] = []
    lo, hi = config.beta_bracket
    for attempt in range(config.max_widenings + 1):
        try:
            beta, width, decaying_hit = _bisect_once(params, config, lo, hi, history)
            break
        except BracketFailure as exc:
            if attempt == config.max_widenings:
                exc.history = history
                raise
            lo, hi = lo / config.widen_factor, hi * config.widen_factor
            logger.info("widening beta bracket to [%g, %g]", lo, hi)

    sample_config = replace(config, r_max=max(config.r_max, grid.nodes[-1]))
    traj, cls = integrate_radial(params, 1.0, beta, sample_config, grid)
    if cls.label is not TrajectoryLabel.DECAYING or traj.rho.size != grid.nodes.size:
        raise NonConvergence(
            f"no decaying trajectory at beta={beta!r} (class {cls.label.value})",
            interval=(lo, hi),
            history=history,
        )
    u, v = _trajectory_fields(params, traj, grid, beta)
    residuals = compute_residuals(params, u, v)
    state = GroundState(
        params=params,
        u=u,
        v=v,
        beta_star=beta,
        residuals=residuals,
        method=Method.SHOOTING,
        diagnostics={
            "window_width": width,
            "decaying_window_hit": decaying_hit,
            "clamp_count": traj.clamps,
            "class_history": history,
            "sign_requirements": {"u": req.u_nonnegative, "v": req.v_nonnegative},
        },
    )
    if not state.accepted:
        raise NonConvergence(
            f"Green residuals {residuals.green_u:.3g}, {residuals.green_v:.3g} exceed {GREEN_TOL}",
            interval=(lo, hi),
            history=history,
        )
    return state


# ----------------------------------------------------------------------
# Picard iteration on the Green representation


def resample(field_: RadialField, grid: RadialGrid) -> RadialField:
    """Evaluate a field on another grid, keeping its tail shape."""
    values = field_(grid.nodes)
    tail = TailModel.matched(grid.nodes[-1], values[-1], field_.tail.exponent, field_.tail.log_power)
    return RadialField(
        grid, values, field_.value_at_zero, tail, field_.origin_power, field_.nonnegative
    )


def _normalised(f: RadialField) -> RadialField:
    return f.scaled(1.0 / f.value_at_zero)


def _damped(old: RadialField, new: RadialField, lam: float) -> RadialField:
    values = (1.0 - lam) * old.values + lam * new.values
    zero = (1.0 - lam) * old.value_at_zero + lam * new.value_at_zero
    return old.with_values(values, zero, nonnegative=True)


def _recover_amplitudes(params: SystemParams, cu: float, cv: float) -> tuple[float, float]:
    """(A, B) such that (A u, B v) solves the system when u = cu Γ*(v^p u^r), v = cv Γ*(u^q v^s)."""
    p, q, r, s = params.p, params.q, params.r, params.s
    mat = np.array([[1.0 - r, -p], [-q, 1.0 - s]])
    rhs = -np.log([cu, cv])
    log_a, log_b = np.linalg.solve(mat, rhs)
    return math.exp(log_a), math.exp(log_b)


def picard_solve(
    params: SystemParams,
    initial: GroundState,
    damping: float = 0.5,
    max_iters: int = 500,
    tol: float = 1e-8,
    grid: RadialGrid | None = None,
) -> GroundState:
    """Damped fixed-point iteration u <- Γ*(v^p u^r), v <- Γ*(u^q v^s).

    Iterates are kept at unit value at the origin by dividing out their
    amplitudes; the amplitude-scaling directions are unstable for the
    undivided map.  At the end the amplitudes that turn the normalised fixed
    point into a solution are recovered and the scale invariance fixes
    u(0) = 1.  The result is sampled on ``grid`` (default: the seed's grid).
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    require_admissible(params)
    grid = grid or initial.u.grid
    u = _normalised(resample(initial.u, grid))
    v = _normalised(resample(initial.v, grid))
    if not (u.is_positive and v.is_positive):
        raise ValueError("Picard iteration needs positive initial fields")
    history: list[float] = []
    growth = 0
    converged = False
    cu = cv = 1.0
    for it in range(1, max_iters + 1):
        fu, fv = source_fields(params, u, v)
        tu = newton_potential(fu)
        tv = newton_potential(fv)
        cu, cv = 1.0 / tu.value_at_zero, 1.0 / tv.value_at_zero
        u_new = _damped(u, _normalised(tu), damping)
        v_new = _damped(v, _normalised(tv), damping)
        change = max(
            float(np.max(np.abs(u_new.values - u.values) / u.values)),
            float(np.max(np.abs(v_new.values - v.values) / v.values)),
        )
        history.append(change)
        u, v = u_new, v_new
        if change <= tol:
            converged = True
            break
        growth = growth + 1 if len(history) > 1 and change > history[-2] else 0
        if growth >= 10:
            raise NonConvergence(
                f"Picard iteration diverging (change {change:.3g} after {it} iterations)",
                history=history,
            )
    if not converged:
        raise NonConvergence(
            f"Picard iteration stalled at change {history[-1]:.3g} after {max_iters} iterations",
            history=history,
        )

    amp_u, amp_v = _recover_amplitudes(params, cu, cv)
    report = derive_scaling(params)
    mu = amp_u ** (-report.a / params.n)
    u_sol = resample(u.dilate(mu, amp_u * mu ** (params.n / report.a)), grid)
    v_sol = resample(v.dilate(mu, amp_v * mu ** (params.n / report.b)), grid)
    u_sol = replace(u_sol, value_at_zero=1.0)
    state = GroundState(
        params=params,
        u=u_sol,
        v=v_sol,
        beta_star=v_sol.value_at_zero,
        residuals=compute_residuals(params, u_sol, v_sol),
        method=Method.PICARD,
        diagnostics={"iterations": len(history), "change_history": history, "mu": mu},
    )
    if not state.accepted:
        raise NonConvergence(
            f"Picard fixed point fails the Green residual contract ({state.residuals})",
            history=history,
        )
    return state


def rescale(state: GroundState, mu: float) -> GroundState:
    """The pair (mu^(n/a) u(mu x), mu^(n/b) v(mu x)).

    Node values are carried over unchanged in position: node i of the
    result sits at rho_i / mu, so no interpolation error is introduced.
    """
    if not mu > 0.0:
        raise ValueError(f"mu must be positive (got {mu})")
    report = derive_scaling(state.params)
    n = state.params.n
    u = state.u.dilate(mu, mu ** (n / report.a))
    v = state.v.dilate(mu, mu ** (n / report.b))
    return GroundState(
        params=state.params,
        u=u,
        v=v,
        beta_star=v.value_at_zero,
        residuals=compute_residuals(state.params, u, v),
        method=state.method,
        diagnostics={**state.diagnostics, "rescaled_by": mu},
    )


def from_fields(params: SystemParams, u: RadialField, v: RadialField, method=Method.SHOOTING) -> GroundState:
    """Wrap an externally supplied pair, recomputing its residuals.

    No acceptance test is applied, so deliberately perturbed pairs can be
    fed to the checks in ``analysis``.
    """
    if not u.grid.same_as(v.grid):
        raise ValueError("u and v must share a grid")
    return GroundState(
        params=params,
        u=u,
        v=v,
        beta_star=v.value_at_zero,
        residuals=compute_residuals(params, u, v),
        method=Method(method),
        diagnostics={"source": "fields"},
    )


ASYMPTOTIC_RHO_MAX = 1e14


def asymptotic_grid(n: int, rho_max: float = ASYMPTOTIC_RHO_MAX) -> RadialGrid:
    """Default grid continued to ``rho_max`` with the same log step."""
    base = RadialGrid.log_uniform(n)
    lo = base.nodes[0]
    points = int(round(math.log(rho_max / lo) / base.log_step)) + 1
    return RadialGrid.log_uniform(n, lo, rho_max, points)


def extend_state(state: GroundState, grid: RadialGrid | None = None, **picard_kwargs) -> GroundState:
    """Continue a solved state onto a wider grid by Picard iteration.

    Shooting loses the separatrix slowly at large radius, while the Green
    map recomputes the far field from the core in one sweep, so the
    extension is what tail fits should be run on.
    """
    grid = grid or asymptotic_grid(state.params.n)
    extended = picard_solve(state.params, state, grid=grid, **picard_kwargs)
    extended.diagnostics["seed_method"] = state.method.value
    extended.diagnostics["seed_beta_star"] = state.beta_star
    return extended
