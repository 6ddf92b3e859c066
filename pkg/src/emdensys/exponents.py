"""Exponent algebra for the system -Δu = v^p u^r, -Δv = u^q v^s on R^n.

Everything here is a pure function of the exponent tuple: hypothesis
checks, the scaling pair (a, b), the decay regime and the closed-form
asymptotic constants.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

REGIME_ATOL = 1e-12
CRITICAL_ATOL = 1e-10


class HypothesisError(ValueError):
    """Raised when an exponent tuple violates the standing hypotheses."""


class InadmissibleError(ValueError):
    """Raised when a downstream operation receives inadmissible exponents."""


class Regime(str, enum.Enum):
    SUPERCRITICAL = "Supercritical"
    CRITICAL = "Critical"
    SUBCRITICAL = "Subcritical"


@dataclass(frozen=True)
class Profile:
    """Decay profile rho^-exponent * (ln rho)^log_power."""

    exponent: float
    log_power: float = 0.0


@dataclass(frozen=True)
class SystemParams:
    n: int
    p: float
    q: float
    r: float
    s: float

    def __post_init__(self):
        violations = hypothesis_violations(self.n, self.p, self.q, self.r, self.s)
        if violations:
            raise HypothesisError("; ".join(violations))
        object.__setattr__(self, "n", int(self.n))
        for name in ("p", "q", "r", "s"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def critical_sum(self) -> float:
        """The threshold n/(n-2) that q+s is compared against."""
        return self.n / (self.n - 2)

    def as_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "q": self.q, "r": self.r, "s": self.s}

    def swapped(self) -> "SystemParams":
        """The tuple with the roles of (u, p, r) and (v, q, s) exchanged."""
        return SystemParams(self.n, self.q, self.p, self.s, self.r)


def hypothesis_violations(n, p, q, r, s) -> list[str]:
    """Return a list of human-readable violated inequalities (empty if valid)."""
    out = []
    if not float(n).is_integer():
        out.append(f"n must be an integer (got n={n})")
    if n < 3:
        out.append(f"n >= 3 violated (n={n})")
    if p < 1:
        out.append(f"p >= 1 violated (p={p})")
    if q < 1:
        out.append(f"q >= 1 violated (q={q})")
    if r < 0:
        out.append(f"r >= 0 violated (r={r})")
    if s < 0:
        out.append(f"s >= 0 violated (s={s})")
    if p - s < q - r:
        out.append(f"p - s >= q - r violated ({p - s:g} < {q - r:g})")
    if not q - r > -1:
        out.append(f"q - r > -1 violated (q - r = {q - r:g})")
    return out


@dataclass(frozen=True)
class ScalingReport:
    n: int
    a: float
    b: float
    admissible: bool
    regime: Regime
    u_profile: Profile
    v_profile: Profile
    c_nqs: float | None
    th4_constant: float | None

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "a": self.a,
            "b": self.b,
            "admissible": self.admissible,
            "regime": self.regime.value,
            "u_exponent": self.u_profile.exponent,
            "u_log_power": self.u_profile.log_power,
            "v_exponent": self.v_profile.exponent,
            "v_log_power": self.v_profile.log_power,
            "c_nqs": self.c_nqs,
            "th4_constant": self.th4_constant,
        }


def scaling_pair(params: SystemParams) -> tuple[float, float]:
    n, p, q, r, s = params.n, params.p, params.q, params.r, params.s
    num = n * (p * q - (r - 1.0) * (s - 1.0))
    return num / (2.0 * (p - s + 1.0)), num / (2.0 * (q - r + 1.0))


def classify_regime(params: SystemParams) -> Regime:
    diff = params.q + params.s - params.critical_sum
    if abs(diff) <= REGIME_ATOL:
        return Regime.CRITICAL
    return Regime.SUPERCRITICAL if diff > 0 else Regime.SUBCRITICAL


def v_profile(params: SystemParams, regime: Regime | None = None) -> Profile:
    """Decay profile of v; NaN entries where the formula breaks down (s >= 1).

    Admissible tuples below the supercritical regime always have s < 1, so
    the NaN branch only shows up for inadmissible tuples.
    """
    n, q, s = params.n, params.q, params.s
    regime = regime or classify_regime(params)
    if regime is Regime.SUPERCRITICAL:
        return Profile(n - 2.0, 0.0)
    if s >= 1.0:
        return Profile(math.nan, math.nan)
    if regime is Regime.CRITICAL:
        return Profile(n - 2.0, 1.0 / (1.0 - s))
    return Profile(((n - 2) * q - 2.0) / (1.0 - s), 0.0)


def is_admissible(params: SystemParams) -> bool:
    a, b = scaling_pair(params)
    return a > params.critical_sum and b > params.critical_sum


def derive_scaling(params: SystemParams) -> ScalingReport:
    """Scaling pair, regime, decay profiles and asymptotic constants.

    Inadmissible tuples still get ``a`` and ``b`` (useful in sweeps); their
    constants are left as ``None``.
    """
    a, b = scaling_pair(params)
    admissible = a > params.critical_sum and b > params.critical_sum
    regime = classify_regime(params)
    c_nqs = th4 = None
    if admissible and regime is Regime.SUBCRITICAL:
        c_nqs = threshold_constant(params)
        th4 = theorem4_constant(params)
    return ScalingReport(
        n=params.n,
        a=a,
        b=b,
        admissible=admissible,
        regime=regime,
        u_profile=Profile(params.n - 2.0, 0.0),
        v_profile=v_profile(params, regime),
        c_nqs=c_nqs,
        th4_constant=th4,
    )


def require_admissible(params: SystemParams) -> None:
    if not is_admissible(params):
        a, b = scaling_pair(params)
        raise InadmissibleError(
            f"a, b > n/(n-2) violated: a={a:.6g}, b={b:.6g}, n/(n-2)={params.critical_sum:.6g}"
        )


def check_scale_identities(report: ScalingReport, params: SystemParams) -> tuple[float, float]:
    """Residuals of p/b + r/a = 2/n + 1/a and q/a + s/b = 2/n + 1/b."""
    if not report.admissible:
        raise InadmissibleError("scale identities requested for an inadmissible report")
    a, b, n = report.a, report.b, params.n
    res_u = abs(params.p / b + params.r / a - 2.0 / n - 1.0 / a)
    res_v = abs(params.q / a + params.s / b - 2.0 / n - 1.0 / b)
    return res_u, res_v


def check_critical_condition(report: ScalingReport) -> tuple[bool, float]:
    """Whether 1/a + 1/b = (n-2)/n; also returns the signed residual."""
    if not report.admissible:
        raise InadmissibleError("critical condition requested for an inadmissible report")
    n = report.n
    residual = 1.0 / report.a + 1.0 / report.b - (n - 2.0) / n
    return abs(residual) <= CRITICAL_ATOL, residual


def _require_subcritical(params: SystemParams, what: str) -> None:
    require_admissible(params)
    regime = classify_regime(params)
    if regime is not Regime.SUBCRITICAL:
        raise InadmissibleError(f"{what} is only defined for q+s < n/(n-2) (regime {regime.value})")


def threshold_constant(params: SystemParams) -> float:
    """The constant C_{n,q,s} bounding l_u^q l_v^(s-1) in the symmetry theorem."""
    _require_subcritical(params, "threshold constant")
    n, q, s = params.n, params.q, params.s
    if s == 0.0:
        return math.inf
    if 2.0 * q + s >= (n + 2.0) / (n - 2.0):
        return (n - 2.0) ** 2 / (4.0 * s)
    return ((n - 2.0) * q - 2.0) * (n - (n - 2.0) * (q + s)) / (s * (1.0 - s) ** 2)


def theorem4_constant(params: SystemParams) -> float:
    """Closed-form value of l_u^q l_v^(s-1) for power-like ground states."""
    _require_subcritical(params, "asymptotic constant")
    n, q, s = params.n, params.q, params.s
    gap = n - (n - 2.0) * (q + s)
    if gap == 0.0:
        raise InadmissibleError("q+s = n/(n-2): the asymptotic constant degenerates to 0")
    value = ((n - 2.0) * q - 2.0) * gap / (1.0 - s) ** 2
    if s > 0.0:
        bound = threshold_constant(params)
        assert value < bound, f"asymptotic constant {value} not below threshold {bound}"
    return value


@dataclass(frozen=True)
class SignRequirements:
    u_nonnegative: bool
    v_nonnegative: bool


def sign_requirements(params: SystemParams) -> SignRequirements:
    r, s = params.r, params.s
    return SignRequirements(
        u_nonnegative=(r == 0.0) or (r < 1.0 and s < 1.0),
        v_nonnegative=(s == 0.0),
    )


def critical_hyperbola_p(n: int, q: float) -> float:
    """p on the critical hyperbola 1/a + 1/b = (n-2)/n for r = s = 0."""
    denom = (n - 2.0) * q - 2.0
    if denom <= 0.0:
        raise HypothesisError(f"no critical-hyperbola partner for q={q} in dimension {n}")
    return (2.0 * q + n + 2.0) / denom
