"""Asymptotic diagnostics of radial fields and solved ground states.

Decay fits, weak-Lebesgue (Lorentz L^{sigma,infinity}) quasinorms of
radially nonincreasing fields, and the pointwise and integral checks that
the decay and symmetry theorems predict for positive solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .exponents import (
    InadmissibleError,
    Regime,
    SystemParams,
    classify_regime,
    derive_scaling,
    theorem4_constant,
    threshold_constant,
)
from .radial_greens import FieldError, KernelConstants, RadialField, radial_moments

WINDOW_FRACTIONS = (0.5, 0.9)
FIT_RMS_MAX = 0.05
THEOREM4_RTOL = 0.05
COMPARISON_TOL = 1e-8
MONOTONE_RTOL = 1e-12
# number of log-radius samples used beyond the grid for sup computations
_TAIL_SAMPLES = 2000
_TAIL_LOG_SPAN = 200.0


def default_window(rho) -> tuple[float, float]:
    """Fit window at fractions 0.5 and 0.9 of the grid's log span."""
    lo, hi = math.log(rho[0]), math.log(rho[-1])
    a, b = WINDOW_FRACTIONS
    return math.exp(lo + a * (hi - lo)), math.exp(lo + b * (hi - lo))


def default_window_mask(rho) -> np.ndarray:
    lo, hi = default_window(rho)
    # widen by a hair so that window edges sitting on nodes are included
    return (rho >= lo * (1 - 1e-12)) & (rho <= hi * (1 + 1e-12))


# ----------------------------------------------------------------------
# decay fits


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    log_power: float
    amplitude: float
    fit_window: tuple[float, float]
    rms_residual: float

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        out = self.amplitude * rho ** (-self.exponent)
        if self.log_power:
            out = out * np.log(rho) ** self.log_power
        return out

    def as_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "log_power": self.log_power,
            "amplitude": self.amplitude,
            "window_lo": self.fit_window[0],
            "window_hi": self.fit_window[1],
            "rms_residual": self.rms_residual,
        }


def fit_power_law(
    rho: np.ndarray,
    values: np.ndarray,
    expected_log: bool = False,
    exponent: float | None = None,
    log_power: float | None = None,
) -> tuple[float, float, float, float]:
    """Least squares for ln f = -m ln rho + k ln ln rho + ln A.

    ``exponent``/``log_power`` pin m/k when given; k is pinned to 0 unless
    ``expected_log``.  Returns (m, k, A, rms residual in log space).
    """
    rho = np.asarray(rho, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0.0):
        bad = int(np.argmax(values <= 0.0))
        raise FieldError(f"non-positive sample in the fit window at rho={rho[bad]:.6g}")
    if not expected_log and log_power is None:
        log_power = 0.0
    lr = np.log(rho)
    if log_power is None or log_power != 0.0:
        if np.any(rho <= 1.0):
            raise FieldError("log-corrected fits need a window beyond rho = 1")
        llr = np.log(lr)
    y = np.log(values)
    cols = [np.ones_like(lr)]
    names = ["lnA"]
    if exponent is None:
        cols.append(-lr)
        names.append("m")
    else:
        y = y + exponent * lr
    if log_power is None:
        cols.append(llr)
        names.append("k")
    elif log_power:
        y = y - log_power * llr
    design = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = dict(zip(names, coef))
    resid = y - design @ coef
    m = fitted.get("m", exponent)
    k = fitted.get("k", log_power)
    return float(m), float(k), float(math.exp(fitted["lnA"])), float(np.sqrt(np.mean(resid**2)))


def estimate_decay(
    f: RadialField,
    expected_log: bool = False,
    exponent: float | None = None,
    log_power: float | None = None,
    window: tuple[float, float] | None = None,
) -> DecayFit:
    """Fit f ~ A rho^-m (ln rho)^k on a window of the grid.

    The default window spans fractions [0.5, 0.9] of the grid's log range.
    """
    rho = f.rho
    if window is None:
        window = default_window(rho)
        mask = default_window_mask(rho)
    else:
        mask = (rho >= window[0]) & (rho <= window[1])
    if mask.sum() < 3:
        raise FieldError("fit window holds fewer than 3 nodes")
    m, k, amp, rms = fit_power_law(rho[mask], f.values[mask], expected_log, exponent, log_power)
    return DecayFit(m, k, amp, (float(window[0]), float(window[1])), rms)


# ----------------------------------------------------------------------
# weak-Lebesgue quasinorms


def _check_monotone(f: RadialField) -> np.ndarray:
    vals = np.abs(f.values)
    inc = np.diff(vals) > MONOTONE_RTOL * np.maximum(vals[:-1], vals[1:])
    if np.any(inc):
        idx = int(np.argmax(inc)) + 1
        raise FieldError(f"|f| is not nonincreasing: first offending node index {idx}")
    if abs(f.value_at_zero) < vals[0] * (1 - MONOTONE_RTOL):
        raise FieldError("|f| is not nonincreasing: first offending node index 0")
    return vals


def _tail_sup(amp: float, e: float, k: float, start: float) -> float:
    """sup over rho >= start of amp rho^-e (ln rho)^k."""
    if amp == 0.0:
        return 0.0
    if e < 0.0 or (e == 0.0 and k > 0.0):
        return math.inf
    if e == 0.0:
        return amp
    ln0 = math.log(start)
    if k > 0.0:
        if ln0 <= 0.0:
            raise FieldError("log-corrected tails need the grid to end beyond rho = 1")
        ln_star = max(ln0, k / e)
        return amp * math.exp(-e * ln_star) * ln_star**k
    return amp * start ** (-e)


def lorentz_weak_quasinorm(f: RadialField, sigma: float) -> float:
    """sup_h h |{|f| > h}|^(1/sigma) for a radially nonincreasing |f|.

    With |f| nonincreasing, {|f| > h} is a centred ball and the sup reduces
    to sup_rho |f(rho)| |B_rho|^(1/sigma).  Between positive nodes |f| is a
    power law, so that expression is monotone on each cell and the nodes
    suffice; cells ending at zero are linear and maximised in closed form.
    """
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    vals = _check_monotone(f)
    n, rho = f.n, f.rho
    vol = KernelConstants(n).ball_volume
    c = n / sigma
    g = vals * rho**c
    best = float(np.max(g))

    # cells with a vanishing endpoint are interpolated linearly
    zero_cells = np.nonzero((vals[:-1] > 0.0) & (vals[1:] == 0.0))[0]
    for i in zero_cells:
        r0, r1, f0 = rho[i], rho[i + 1], vals[i]
        slope = -f0 / (r1 - r0)
        r_star = -c * (f0 - slope * r0) / (slope * (1.0 + c))
        if r0 < r_star < r1:
            best = max(best, (f0 + slope * (r_star - r0)) * r_star**c)

    if f.origin_power is not None and f.origin_power > c:
        return math.inf
    tail = f.tail
    best = max(best, _tail_sup(abs(tail.amplitude), tail.exponent - c, tail.log_power, rho[-1]))
    return vol ** (1.0 / sigma) * best


def _tail_ball_integral(f: RadialField, radii: np.ndarray) -> np.ndarray:
    """Integral of |tail|(t) t^(n-1) from rho_N to each radius."""
    tail, n, end = f.tail, f.n, f.rho[-1]
    amp, gam, k = abs(tail.amplitude), tail.exponent, tail.log_power
    e = gam - n
    if amp == 0.0:
        return np.zeros_like(radii)
    if k == 0.0:
        if e == 0.0:
            return amp * np.log(radii / end)
        return amp * (end ** (-e) - radii ** (-e)) / e
    if e > 0.0:
        from .radial_greens import TailModel

        model = TailModel(amp, gam, k)
        total = model.moment(n - 1.0, end)
        return np.array([total - model.moment(n - 1.0, r) for r in radii])
    out = np.empty_like(radii)
    acc, prev = 0.0, math.log(end)
    for i, r in enumerate(radii):
        lr = math.log(r)
        acc += quad(lambda x: amp * math.exp(-e * x) * x**k, prev, lr)[0]
        out[i], prev = acc, lr
    return out


def dual_average_norm(f: RadialField, sigma: float) -> float:
    """sup over centred balls B of |B|^(-1/sigma') times the integral of |f| over B.

    For nonincreasing |f| the sup over sets of a given measure is attained
    on centred balls.
    """
    if not sigma > 1.0:
        raise ValueError("sigma must exceed 1")
    vals = _check_monotone(f)
    n, rho = f.n, f.rho
    kc = KernelConstants(n)
    sigma_dual = sigma / (sigma - 1.0)
    absf = f.with_values(vals, abs(f.value_at_zero)) if np.any(f.values < 0.0) else f
    inner, _, _ = radial_moments(absf, n - 1.0)
    phi = (kc.ball_volume * rho**n) ** (-1.0 / sigma_dual) * kc.omega * inner
    best = float(np.max(phi))

    radii = rho[-1] * np.exp(np.linspace(0.0, _TAIL_LOG_SPAN, _TAIL_SAMPLES))[1:]
    mass = inner[-1] + _tail_ball_integral(f, radii)
    phi_tail = (kc.ball_volume * radii**n) ** (-1.0 / sigma_dual) * kc.omega * mass
    best = max(best, float(np.max(phi_tail)))

    tail = f.tail
    if tail.amplitude != 0.0 and tail.exponent <= n:
        e = n / sigma - tail.exponent
        if e > 0.0 or (e == 0.0 and tail.log_power > 0.0):
            return math.inf
        if e == 0.0 and tail.exponent < n:
            limit = kc.omega * abs(tail.amplitude) / (n - tail.exponent)
            best = max(best, kc.ball_volume ** (-1.0 / sigma_dual) * limit)
    return best


# ----------------------------------------------------------------------
# ground-state checks


def _v_index(params: SystemParams) -> float | None:
    n, q, s = params.n, params.q, params.s
    regime = classify_regime(params)
    if regime is Regime.SUPERCRITICAL:
        return n / (n - 2.0)
    if regime is Regime.SUBCRITICAL:
        return n * (1.0 - s) / ((n - 2.0) * q - 2.0)
    return None


def critical_ladder(n: int, levels: int = 7) -> np.ndarray:
    """Indices n/(n-2) + 2^-k, k = 0..levels-1."""
    return n / (n - 2.0) + 2.0 ** -np.arange(levels, dtype=float)


def membership_report(state) -> dict:
    """Weak-Lebesgue quasinorms of u and v at the indices the decay theory predicts."""
    params = state.params
    n = params.n
    sigma_u = n / (n - 2.0)
    out = {
        "regime": classify_regime(params).value,
        "u_sigma": sigma_u,
        "u_norm": lorentz_weak_quasinorm(state.u, sigma_u),
    }
    sigma_v = _v_index(params)
    if sigma_v is not None:
        out["v_sigma"] = sigma_v
        out["v_norm"] = lorentz_weak_quasinorm(state.v, sigma_v)
        finite = [out["u_norm"], out["v_norm"]]
    else:
        ladder = critical_ladder(n)
        norms = [lorentz_weak_quasinorm(state.v, s) for s in ladder]
        out["v_ladder"] = [(float(s), float(v)) for s, v in zip(ladder, norms)]
        finite = [out["u_norm"], *norms]
    out["all_finite"] = bool(all(math.isfinite(x) for x in finite))
    return out


@dataclass(frozen=True)
class BlowupFit:
    slope: float
    prefactor: float
    target_slope: float
    sigmas: tuple
    norms: tuple


def blowup_fit(v: RadialField, s: float, sigma_ladder) -> BlowupFit:
    """Fit ln ||v||_{sigma,inf} against -ln((n-2) sigma - n)."""
    sigmas = np.asarray(sigma_ladder, dtype=float)
    if sigmas.size < 4:
        raise ValueError("the sigma ladder needs at least 4 points")
    n = v.n
    gap = (n - 2.0) * sigmas - n
    if np.any(gap <= 0.0):
        raise ValueError("ladder indices must exceed n/(n-2)")
    norms = np.array([lorentz_weak_quasinorm(v, x) for x in sigmas])
    slope, intercept = np.polyfit(-np.log(gap), np.log(norms), 1)
    return BlowupFit(
        float(slope), float(math.exp(intercept)), 1.0 / (1.0 - s), tuple(sigmas), tuple(norms)
    )


def critical_blowup_fit(state, sigma_ladder=None) -> BlowupFit:
    """Blow-up rate of ||v||_{sigma,inf} as sigma decreases to n/(n-2)."""
    params = state.params
    regime = classify_regime(params)
    if regime is not Regime.CRITICAL:
        raise InadmissibleError(f"no quasinorm blow-up is predicted in the {regime.value} regime")
    if sigma_ladder is None:
        sigma_ladder = critical_ladder(params.n)
    return blowup_fit(state.v, params.s, sigma_ladder)


def comparison_violation(params: SystemParams, u: RadialField, v: RadialField) -> float:
    """max of v^(p-s+1)/(p-s+1) - u^(q-r+1)/(q-r+1) over the origin and the nodes."""
    if params.p < params.s:
        raise InadmissibleError("comparison needs p >= s")
    uu = np.concatenate([[u.value_at_zero], u.values])
    vv = np.abs(np.concatenate([[v.value_at_zero], v.values]))
    if np.any(uu < 0.0):
        raise InadmissibleError("comparison needs u >= 0")
    ev, eu = params.p - params.s + 1.0, params.q - params.r + 1.0
    return float(np.max(vv**ev / ev - uu**eu / eu))


def check_comparison(state) -> float:
    return comparison_violation(state.params, state.u, state.v)


@dataclass(frozen=True)
class EnvelopeReport:
    sup_ratio_u: float
    sup_ratio_v: float
    inf_ratio_u: float
    inf_ratio_v: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def envelope_profile(params: SystemParams, rho) -> np.ndarray:
    """The comparison function h(rho) selected by the regime."""
    n, q, s = params.n, params.q, params.s
    rho = np.asarray(rho, dtype=float)
    regime = classify_regime(params)
    if regime is Regime.SUPERCRITICAL:
        return rho ** (n - 2.0)
    if regime is Regime.CRITICAL:
        with np.errstate(divide="ignore"):
            return rho ** (n - 2.0) * np.log1p(rho) ** (-1.0 / (1.0 - s))
    return rho ** (((n - 2.0) * q - 2.0) / (1.0 - s))


def envelope_report(state) -> EnvelopeReport:
    params, u, v = state.params, state.u, state.v
    if not (u.is_positive and v.is_positive and u.value_at_zero > 0 and v.value_at_zero > 0):
        raise FieldError("envelope ratios need a strictly positive state")
    n, rho = params.n, u.rho
    ru = np.concatenate([[u.value_at_zero], u.values * (1.0 + rho ** (n - 2.0))])
    rv = np.concatenate([[v.value_at_zero], v.values * (1.0 + envelope_profile(params, rho))])
    return EnvelopeReport(float(ru.max()), float(rv.max()), float(ru.min()), float(rv.min()))


@dataclass(frozen=True)
class Theorem4Result:
    measured: float
    predicted: float
    rel_error: float
    threshold: float
    below_threshold: bool
    tolerance: float
    fit_u: DecayFit
    fit_v: DecayFit

    @property
    def passed(self) -> bool:
        return self.rel_error <= self.tolerance and self.below_threshold


def tail_amplitudes(state, window=None) -> tuple[DecayFit, DecayFit]:
    """Fits of u and v with exponents pinned to the predicted profiles."""
    report = derive_scaling(state.params)
    fit_u = estimate_decay(state.u, exponent=report.u_profile.exponent, window=window)
    fit_v = estimate_decay(
        state.v,
        exponent=report.v_profile.exponent,
        log_power=report.v_profile.log_power,
        window=window,
    )
    return fit_u, fit_v


def theorem4_check(state, tolerance: float = THEOREM4_RTOL, window=None) -> Theorem4Result:
    """Compare l_u^q l_v^(s-1) from fitted amplitudes with its closed form."""
    params = state.params
    predicted = theorem4_constant(params)
    fit_u, fit_v = tail_amplitudes(state, window)
    if max(fit_u.rms_residual, fit_v.rms_residual) > FIT_RMS_MAX:
        raise FieldError(
            f"decay fits unreliable (rms {fit_u.rms_residual:.3g}, {fit_v.rms_residual:.3g})"
        )
    measured = fit_u.amplitude**params.q * fit_v.amplitude ** (params.s - 1.0)
    threshold = threshold_constant(params)
    return Theorem4Result(
        measured=measured,
        predicted=predicted,
        rel_error=abs(measured - predicted) / predicted,
        threshold=threshold,
        below_threshold=measured < threshold,
        tolerance=tolerance,
        fit_u=fit_u,
        fit_v=fit_v,
    )
