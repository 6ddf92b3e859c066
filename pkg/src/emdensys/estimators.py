"""scikit-learn style wrappers around the solver and the decay fit.

The functional API in :mod:`emdensys.solver` and :mod:`emdensys.analysis`
is the primary interface; these classes make the two data-driven steps
usable inside sklearn tooling (``get_params``/``set_params``, ``clone``,
pipelines).  Radii play the role of the feature matrix ``X``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive, check_radii, check_samples
from .analysis import fit_power_law
from .exponents import SystemParams
from .solver import Method, ShootingConfig, bisect_ground_state, extend_state, picard_solve


class GroundStateSolver(BaseEstimator):
    """Solve for the radial ground state of one exponent tuple.

    ``fit`` ignores its arguments (the system is fully specified by the
    hyper-parameters); ``predict`` evaluates (u, v) at the given radii.

    Parameters
    ----------
    n, p, q, r, s : exponents of the system.
    method : {"shooting", "picard"}
        "picard" refines the shooting solution by the Green-map iteration.
    extend_to : float or None
        If set, continue the solution by Picard iteration to this radius.
    r_max : float
        Shooting horizon.
    """

    def __init__(self, n=3, p=5.0, q=5.0, r=0.0, s=0.0, method="shooting", extend_to=None, r_max=1e6):
        self.n = n
        self.p = p
        self.q = q
        self.r = r
        self.s = s
        self.method = method
        self.extend_to = extend_to
        self.r_max = r_max

    def fit(self, X=None, y=None):
        if self.method not in ("shooting", "picard"):
            raise ValueError(f"method must be 'shooting' or 'picard' (got {self.method!r})")
        params = SystemParams(self.n, self.p, self.q, self.r, self.s)
        state = bisect_ground_state(params, ShootingConfig(r_max=check_positive(self.r_max, "r_max")))
        if self.method == "picard":
            state = picard_solve(params, state)
        if self.extend_to is not None:
            from .solver import asymptotic_grid

            state = extend_state(state, asymptotic_grid(params.n, check_positive(self.extend_to, "extend_to")))
        self.state_ = state
        self.beta_star_ = state.beta_star
        self.residuals_ = state.residuals
        self.method_ = Method(state.method)
        return self

    def predict(self, X):
        """Array of shape (n_samples, 2) holding u and v at the radii ``X``."""
        check_is_fitted(self, "state_")
        rho = check_radii(X)
        return np.column_stack([self.state_.u(rho), self.state_.v(rho)])


class DecayRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of f ~ A rho^-m (ln rho)^k.

    Parameters
    ----------
    expected_log : bool
        Fit the log power k as a free parameter (otherwise k = 0 unless pinned).
    exponent, log_power : float or None
        Pin m or k to a known value.
    """

    def __init__(self, expected_log=False, exponent=None, log_power=None):
        self.expected_log = expected_log
        self.exponent = exponent
        self.log_power = log_power

    def fit(self, X, y):
        rho, values = check_samples(X, y)
        m, k, amp, rms = fit_power_law(rho, values, self.expected_log, self.exponent, self.log_power)
        self.exponent_ = m
        self.log_power_ = k
        self.amplitude_ = amp
        self.rms_residual_ = rms
        return self

    def predict(self, X):
        check_is_fitted(self, "amplitude_")
        rho = check_radii(X)
        out = self.amplitude_ * rho ** (-self.exponent_)
        if self.log_power_:
            out = out * np.log(rho) ** self.log_power_
        return out

    def score(self, X, y, sample_weight=None):
        """R^2 of ln f (the space the fit is done in)."""
        from sklearn.metrics import r2_score

        rho, values = check_samples(X, y)
        return r2_score(np.log(values), np.log(self.predict(rho)), sample_weight=sample_weight)
