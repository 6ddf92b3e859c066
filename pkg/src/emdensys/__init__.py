"""Radial ground states of -Δu = v^p u^r, -Δv = u^q v^s and their asymptotics."""

from .analysis import (
    check_comparison,
    critical_blowup_fit,
    dual_average_norm,
    envelope_report,
    estimate_decay,
    lorentz_weak_quasinorm,
    membership_report,
    theorem4_check,
)
from .exponents import (
    HypothesisError,
    InadmissibleError,
    Regime,
    ScalingReport,
    SystemParams,
    check_critical_condition,
    check_scale_identities,
    derive_scaling,
    sign_requirements,
    theorem4_constant,
    threshold_constant,
)
from .radial_greens import (
    RadialField,
    RadialGrid,
    TailModel,
    newton_potential,
    radial_laplacian,
    verify_th4_integral,
)
from .solver import (
    BracketFailure,
    GroundState,
    NonConvergence,
    ShootingConfig,
    bisect_ground_state,
    extend_state,
    integrate_radial,
    picard_solve,
    rescale,
)

__version__ = "0.1.0"

__all__ = [
    "BracketFailure",
    "GroundState",
    "HypothesisError",
    "InadmissibleError",
    "NonConvergence",
    "RadialField",
    "RadialGrid",
    "Regime",
    "ScalingReport",
    "ShootingConfig",
    "SystemParams",
    "TailModel",
    "bisect_ground_state",
    "check_comparison",
    "check_critical_condition",
    "check_scale_identities",
    "critical_blowup_fit",
    "derive_scaling",
    "dual_average_norm",
    "envelope_report",
    "estimate_decay",
    "extend_state",
    "integrate_radial",
    "lorentz_weak_quasinorm",
    "membership_report",
    "newton_potential",
    "picard_solve",
    "radial_laplacian",
    "rescale",
    "sign_requirements",
    "theorem4_check",
    "theorem4_constant",
    "threshold_constant",
    "verify_th4_integral",
]
