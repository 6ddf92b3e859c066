"""Named check suite run against a ground state.

Each check yields one :class:`~emdensys.io.CheckRow` with a predicted
value, a measured value, the relative (or absolute, for violations) error
and the tolerance it is held to.  Checks that do not apply to the regime of
the state are skipped rather than reported as failures.
"""

from __future__ import annotations

import logging
import math

from . import analysis
from .exponents import Regime, SystemParams, classify_regime, derive_scaling
from .io import CheckRow
from .radial_greens import FieldError, verify_th4_integral
from .solver import GREEN_TOL

logger = logging.getLogger(__name__)

DECAY_RTOL = 0.02
LOG_POWER_RTOL = 0.15
BLOWUP_RTOL = 0.15
TH4_INTEGRAL_RTOL = 1e-6

CHECK_NAMES = (
    "green_residual",
    "decay_u",
    "decay_v",
    "log_power_v",
    "theorem4",
    "comparison",
    "envelope",
    "membership",
    "blowup",
    "th4_integral",
)


def _rel(measured, predicted):
    return abs(measured - predicted) / abs(predicted)


def _row(name, predicted, measured, tolerance, rel_error=None, passed=None, details=None):
    if rel_error is None:
        rel_error = _rel(measured, predicted)
    if passed is None:
        passed = bool(rel_error <= tolerance)
    return CheckRow(name, float(predicted), float(measured), float(rel_error), float(tolerance),
                    bool(passed), details)


def check_green_residual(state):
    r = state.residuals
    worst = max(r.green_u, r.green_v)
    return _row("green_residual", 0.0, worst, GREEN_TOL, rel_error=worst, details=r.as_dict())


def check_decay_u(state):
    fit = analysis.estimate_decay(state.u)
    target = derive_scaling(state.params).u_profile.exponent
    return _row("decay_u", target, fit.exponent, DECAY_RTOL, details=fit.as_dict())


def check_decay_v(state):
    report = derive_scaling(state.params)
    fit = analysis.estimate_decay(state.v, expected_log=bool(report.v_profile.log_power))
    return _row("decay_v", report.v_profile.exponent, fit.exponent, DECAY_RTOL, details=fit.as_dict())


def check_log_power_v(state):
    report = derive_scaling(state.params)
    if report.regime is not Regime.CRITICAL:
        return None
    fit = analysis.estimate_decay(state.v, expected_log=True)
    return _row("log_power_v", report.v_profile.log_power, fit.log_power, LOG_POWER_RTOL,
                details=fit.as_dict())


def check_theorem4(state):
    if classify_regime(state.params) is not Regime.SUBCRITICAL:
        return None
    try:
        res = analysis.theorem4_check(state)
    except FieldError as exc:
        return _row("theorem4", math.nan, math.nan, analysis.THEOREM4_RTOL, rel_error=math.inf,
                    passed=False, details={"error": str(exc)})
    return _row(
        "theorem4",
        res.predicted,
        res.measured,
        res.tolerance,
        rel_error=res.rel_error,
        passed=res.passed,
        details={
            "threshold": res.threshold,
            "below_threshold": res.below_threshold,
            "l_u": res.fit_u.amplitude,
            "l_v": res.fit_v.amplitude,
        },
    )


def check_comparison(state):
    violation = analysis.check_comparison(state)
    return _row("comparison", 0.0, violation, analysis.COMPARISON_TOL,
                rel_error=max(violation, 0.0), passed=violation <= analysis.COMPARISON_TOL)


def check_envelope(state):
    rep = analysis.envelope_report(state)
    sups = (rep.sup_ratio_u, rep.sup_ratio_v)
    infs = (rep.inf_ratio_u, rep.inf_ratio_v)
    ok = all(math.isfinite(x) for x in sups) and min(infs) > 0.0
    return _row("envelope", math.nan, min(infs), 0.0, rel_error=math.nan, passed=ok,
                details=rep.as_dict())


def check_membership(state):
    rep = analysis.membership_report(state)
    norms = [rep["u_norm"], rep.get("v_norm", math.nan)]
    if "v_ladder" in rep:
        norms = [rep["u_norm"]] + [v for _, v in rep["v_ladder"]]
    measured = max(norms)
    return _row("membership", math.nan, measured, math.inf, rel_error=math.nan,
                passed=rep["all_finite"], details=rep)


def check_blowup(state):
    if classify_regime(state.params) is not Regime.CRITICAL:
        return None
    fit = analysis.critical_blowup_fit(state)
    return _row("blowup", fit.target_slope, fit.slope, BLOWUP_RTOL,
                details={"prefactor": fit.prefactor})


def check_th4_integral(params: SystemParams, label: str = "th4_integral"):
    res = verify_th4_integral(params)
    return _row(label, res.closed_form, res.quadrature, TH4_INTEGRAL_RTOL, rel_error=res.rel_error,
                details={"n": params.n, "q": params.q, "s": params.s})


_STATE_CHECKS = {
    "green_residual": check_green_residual,
    "decay_u": check_decay_u,
    "decay_v": check_decay_v,
    "log_power_v": check_log_power_v,
    "theorem4": check_theorem4,
    "comparison": check_comparison,
    "envelope": check_envelope,
    "membership": check_membership,
    "blowup": check_blowup,
}


def run_checks(state=None, names=None, th4_cases=()) -> list[CheckRow]:
    """Run the named checks (default: all) and return one row per applicable check.

    ``th4_cases`` adds a ``th4_integral`` row per parameter tuple; without
    cases the state's own tuple is used when it is subcritical.
    """
    names = list(CHECK_NAMES if names is None else names)
    unknown = [n for n in names if n not in CHECK_NAMES]
    if unknown:
        raise KeyError(f"unknown check names: {', '.join(unknown)}")
    rows = []
    for name in names:
        if name == "th4_integral":
            cases = list(th4_cases)
            if not cases and state is not None and classify_regime(state.params) is Regime.SUBCRITICAL:
                cases = [state.params]
            for i, params in enumerate(cases):
                rows.append(check_th4_integral(params, f"th4_integral[{i}]"))
            continue
        if state is None:
            continue
        row = _STATE_CHECKS[name](state)
        if row is None:
            logger.info("check %s skipped: not applicable to this regime", name)
            continue
        rows.append(row)
    return rows
