"""Radial fields on log-uniform grids and the radial Newtonian potential.

A radial function on R^n is stored by its samples on a log-uniform grid,
its value at the origin, and a power-law tail model beyond the last node.
Quadrature works in the variable x = ln(rho): between nodes ln f is
represented by a cubic spline (so pure powers are integrated exactly) and
each segment is integrated with Gauss-Legendre nodes.  The origin cell and
the region beyond the grid are integrated in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Mapping

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gamma as gamma_fn
from scipy.special import gammaincc

DEFAULT_RHO_MIN = 1e-4
DEFAULT_RHO_MAX = 1e6
DEFAULT_POINTS = 4096
MIN_POINTS = 16
GRID_RTOL = 1e-12
CRITICAL_TAIL_ATOL = 1e-9

_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)


class GridError(ValueError):
    pass


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class KernelConstants:
    """Normalisation of the fundamental solution ((n-2) omega)^-1 |x|^(2-n)."""

    n: int

    @property
    def omega(self) -> float:
        """Surface area of the unit sphere S^(n-1)."""
        return 2.0 * math.pi ** (self.n / 2.0) / math.gamma(self.n / 2.0)

    @property
    def gamma_norm(self) -> float:
        return 1.0 / ((self.n - 2.0) * self.omega)

    @property
    def ball_volume(self) -> float:
        return self.omega / self.n

    def kernel(self, r):
        return self.gamma_norm * np.asarray(r, dtype=float) ** (2.0 - self.n)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    n: int

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < MIN_POINTS:
            raise GridError(f"grid needs at least {MIN_POINTS} nodes")
        if not np.all(np.isfinite(nodes)) or nodes[0] <= 0.0:
            raise GridError("grid nodes must be finite and positive")
        if np.any(np.diff(nodes) <= 0.0):
            raise GridError("grid nodes must be strictly increasing")
        ratios = nodes[1:] / nodes[:-1]
        if np.max(np.abs(ratios - ratios.mean())) > GRID_RTOL * ratios.mean():
            raise GridError("grid is not log-uniform")
        if int(self.n) < 3:
            raise GridError("dimension must be at least 3")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def log_uniform(cls, n, rho_min=DEFAULT_RHO_MIN, rho_max=DEFAULT_RHO_MAX, points=DEFAULT_POINTS):
        if not 0.0 < rho_min < rho_max:
            raise GridError("need 0 < rho_min < rho_max")
        return cls(np.geomspace(rho_min, rho_max, int(points)), n)

    def __len__(self):
        return self.nodes.size

    @property
    def log_nodes(self) -> np.ndarray:
        return np.log(self.nodes)

    @property
    def log_step(self) -> float:
        x = self.log_nodes
        return (x[-1] - x[0]) / (x.size - 1)

    def scaled(self, factor: float) -> "RadialGrid":
        return RadialGrid(self.nodes * factor, self.n)

    def same_as(self, other: "RadialGrid") -> bool:
        return self.n == other.n and np.array_equal(self.nodes, other.nodes)


@dataclass(frozen=True)
class TailModel:
    """f(rho) ~ amplitude * rho^-exponent * (ln rho)^log_power beyond the grid."""

    amplitude: float
    exponent: float
    log_power: float = 0.0

    def __post_init__(self):
        if not self.exponent > 0.0:
            raise FieldError(f"tail exponent must be positive (got {self.exponent})")
        if self.log_power < 0.0:
            raise FieldError("tail log power must be nonnegative")

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        out = self.amplitude * rho ** (-self.exponent)
        if self.log_power:
            out = out * np.log(rho) ** self.log_power
        return out

    @classmethod
    def matched(cls, rho_end: float, value_end: float, exponent: float, log_power: float = 0.0):
        """Tail whose model reproduces ``value_end`` at ``rho_end``."""
        amp = value_end * rho_end**exponent
        if log_power:
            amp /= math.log(rho_end) ** log_power
        return cls(float(amp), float(exponent), float(log_power))

    def moment(self, m: float, start: float) -> float:
        """Closed form of the integral of f(t) t^m over (start, infinity)."""
        e = self.exponent - m - 1.0
        if e <= 0.0:
            return math.inf if self.amplitude != 0.0 else 0.0
        if self.amplitude == 0.0:
            return 0.0
        if not self.log_power:
            return self.amplitude * start ** (-e) / e
        ln_start = math.log(start)
        if ln_start <= 0.0:
            raise FieldError("log-corrected tails need the grid to end beyond rho = 1")
        k = self.log_power + 1.0
        return self.amplitude * e ** (-k) * gamma_fn(k) * gammaincc(k, e * ln_start)

    def power(self, exponent: float) -> "TailModel":
        return TailModel(
            abs(self.amplitude) ** exponent, self.exponent * exponent, self.log_power * exponent
        )

    def times(self, other: "TailModel") -> "TailModel":
        return TailModel(
            self.amplitude * other.amplitude,
            self.exponent + other.exponent,
            self.log_power + other.log_power,
        )


@dataclass(frozen=True, eq=False)
class RadialField:
    """Samples of a radial function with origin and tail models.

    ``origin_power`` marks a field singular at the origin like
    rho^-origin_power; otherwise the first cell uses the quadratic
    f(0) + c rho^2 through ``value_at_zero`` and the first node.
    """

    grid: RadialGrid
    values: np.ndarray
    value_at_zero: float
    tail: TailModel
    origin_power: float | None = None
    nonnegative: bool = False
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise FieldError("values must match the grid")
        if not np.all(np.isfinite(values)):
            raise FieldError("field values must be finite at every node")
        if self.origin_power is None and not np.isfinite(self.value_at_zero):
            raise FieldError("value_at_zero is singular but no origin_power was given")
        if self.nonnegative and (np.any(values < 0.0) or self.value_at_zero < 0.0):
            raise FieldError("field declared nonnegative has negative samples")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "value_at_zero", float(self.value_at_zero))

    # construction ------------------------------------------------------

    @classmethod
    def from_function(
        cls,
        func: Callable,
        grid: RadialGrid,
        tail_exponent: float,
        tail_log_power: float = 0.0,
        value_at_zero: float | None = None,
        origin_power: float | None = None,
        nonnegative: bool = False,
    ) -> "RadialField":
        """Sample ``func`` on the grid; the tail amplitude is matched at the last node."""
        values = np.asarray(func(grid.nodes), dtype=float)
        if value_at_zero is None:
            value_at_zero = math.inf if origin_power is not None else float(func(np.array(0.0)))
        tail = TailModel.matched(grid.nodes[-1], values[-1], tail_exponent, tail_log_power)
        return cls(grid, values, value_at_zero, tail, origin_power, nonnegative)

    # basic accessors ---------------------------------------------------

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def rho(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def is_positive(self) -> bool:
        return bool(np.all(self.values > 0.0))

    @cached_property
    def _log_spline(self) -> CubicSpline | None:
        if not self.is_positive:
            return None
        return CubicSpline(self.grid.log_nodes, np.log(self.values))

    def __call__(self, rho) -> np.ndarray:
        """Evaluate the field anywhere in [0, infinity)."""
        rho = np.asarray(rho, dtype=float)
        out = np.empty_like(rho)
        nodes = self.grid.nodes
        lo, hi = nodes[0], nodes[-1]
        inside = (rho >= lo) & (rho <= hi)
        if self._log_spline is not None:
            out[inside] = np.exp(self._log_spline(np.log(rho[inside])))
        else:
            out[inside] = np.interp(rho[inside], nodes, self.values)
        below = rho < lo
        if np.any(below):
            out[below] = self._origin_values(rho[below])
        above = rho > hi
        if np.any(above):
            out[above] = self.tail(rho[above])
        return out

    def _origin_values(self, rho):
        f1, rho1 = self.values[0], self.grid.nodes[0]
        if self.origin_power is not None:
            return f1 * (rho / rho1) ** (-self.origin_power)
        f0 = self.value_at_zero
        return f0 + (f1 - f0) * (rho / rho1) ** 2

    # transformations ---------------------------------------------------

    def with_values(self, values, value_at_zero=None, tail=None, **changes) -> "RadialField":
        values = np.asarray(values, dtype=float)
        if tail is None:
            tail = TailModel.matched(
                self.grid.nodes[-1], values[-1], self.tail.exponent, self.tail.log_power
            )
        return replace(
            self,
            values=values,
            value_at_zero=self.value_at_zero if value_at_zero is None else value_at_zero,
            tail=tail,
            meta={},
            **changes,
        )

    def dilate(self, mu: float, factor: float = 1.0) -> "RadialField":
        """The field rho -> factor * f(mu rho), sampled on the nodes rho_i / mu.

        No interpolation happens: node i of the result carries factor * f(rho_i).
        """
        if not mu > 0.0:
            raise ValueError("dilation factor must be positive")
        grid = self.grid.scaled(1.0 / mu)
        end = self.grid.nodes[-1]
        amp = factor * self.tail.amplitude * mu ** (-self.tail.exponent)
        if self.tail.log_power:
            amp *= (math.log(end) / math.log(end / mu)) ** self.tail.log_power
        tail = TailModel(amp, self.tail.exponent, self.tail.log_power)
        return RadialField(
            grid,
            factor * self.values,
            factor * self.value_at_zero,
            tail,
            self.origin_power,
            self.nonnegative and factor > 0,
        )

    def scaled(self, factor: float) -> "RadialField":
        return self.with_values(
            factor * self.values,
            factor * self.value_at_zero,
            replace(self.tail, amplitude=factor * self.tail.amplitude),
            nonnegative=self.nonnegative and factor >= 0,
        )


def linear_combination(alpha: float, f: RadialField, beta: float, g: RadialField) -> RadialField:
    if not f.grid.same_as(g.grid):
        raise GridError("fields live on different grids")
    values = alpha * f.values + beta * g.values
    tail = TailModel.matched(
        f.grid.nodes[-1], values[-1], min(f.tail.exponent, g.tail.exponent),
        max(f.tail.log_power, g.tail.log_power),
    )
    zero = alpha * f.value_at_zero + beta * g.value_at_zero
    return RadialField(f.grid, values, zero, tail)


# ----------------------------------------------------------------------
# quadrature


def _segment_integrals(f: RadialField, m: float) -> np.ndarray:
    """Integrals of f(t) t^m over each grid segment [rho_i, rho_{i+1}]."""
    x = f.grid.log_nodes
    h = np.diff(x)
    pts = x[:-1, None] + 0.5 * h[:, None] * (1.0 + _GL_X[None, :])
    weights = 0.5 * h[:, None] * _GL_W[None, :]
    if f.is_positive:
        log_vals = f._log_spline(pts)
        integrand = np.exp(log_vals + (m + 1.0) * pts)
    else:
        t = np.exp(pts)
        t0, t1 = f.grid.nodes[:-1, None], f.grid.nodes[1:, None]
        f0, f1 = f.values[:-1, None], f.values[1:, None]
        vals = f0 + (f1 - f0) * (t - t0) / (t1 - t0)
        integrand = vals * t ** (m + 1.0)
    return np.sum(integrand * weights, axis=1)


def _origin_integral(f: RadialField, m: float) -> float:
    """Integral of f(t) t^m over the first cell [0, rho_1]."""
    rho1, f1 = f.grid.nodes[0], f.values[0]
    if f.origin_power is not None:
        e = m + 1.0 - f.origin_power
        if e <= 0.0:
            return math.inf
        return f1 * rho1 ** (m + 1.0) / e
    f0 = f.value_at_zero
    return f0 * rho1 ** (m + 1.0) / (m + 1.0) + (f1 - f0) * rho1 ** (m + 1.0) / (m + 3.0)


def radial_moments(f: RadialField, m: float) -> tuple[np.ndarray, float, float]:
    """Cumulative integrals of f(t) t^m.

    Returns ``(inner, tail, total)`` where ``inner[j]`` integrates over
    [0, rho_j], ``tail`` over (rho_N, infinity) and ``total`` over (0, infinity).
    """
    seg = _segment_integrals(f, m)
    inner = np.empty(f.grid.nodes.size)
    inner[0] = _origin_integral(f, m)
    inner[1:] = inner[0] + np.cumsum(seg)
    tail = f.tail.moment(m, f.grid.nodes[-1])
    return inner, tail, inner[-1] + tail


def _check_potential_input(f: RadialField) -> None:
    if f.tail.exponent <= 2.0:
        raise FieldError(
            f"tail exponent {f.tail.exponent:g} <= 2: the outer integral of the potential diverges"
        )
    if f.origin_power is not None and f.origin_power >= f.n:
        raise FieldError("origin singularity is not locally integrable")


def potential_tail(f: RadialField, total_mass: float | None = None) -> TailModel:
    """Leading-order tail of the Newtonian potential of f."""
    n = f.n
    A, g, k = f.tail.amplitude, f.tail.exponent, f.tail.log_power
    if abs(g - n) <= CRITICAL_TAIL_ATOL:
        return TailModel(A / ((n - 2.0) * (k + 1.0)), n - 2.0, k + 1.0)
    if g < n:
        return TailModel(A / ((g - 2.0) * (n - g)), g - 2.0, k)
    if total_mass is None:
        total_mass = radial_moments(f, n - 1.0)[2]
    return TailModel(total_mass / (n - 2.0), n - 2.0, 0.0)


def newton_potential(f: RadialField) -> RadialField:
    """Decaying radial solution w of -Δw = f, i.e. w = Γ * f.

    w(rho) = [rho^(2-n) int_0^rho f t^(n-1) dt + int_rho^inf f t dt] / (n-2)
    """
    _check_potential_input(f)
    n = f.n
    rho = f.grid.nodes
    inner, tail_in, total_mass = radial_moments(f, n - 1.0)

    seg_out = _segment_integrals(f, 1.0)
    tail_out = f.tail.moment(1.0, rho[-1])
    outer = np.empty(rho.size)
    outer[-1] = tail_out
    outer[:-1] = tail_out + np.cumsum(seg_out[::-1])[::-1]

    values = (rho ** (2.0 - n) * inner + outer) / (n - 2.0)
    origin_out = _origin_integral(f, 1.0)
    origin_power = None
    if math.isfinite(origin_out):
        w0 = (origin_out + outer[0]) / (n - 2.0)
    else:
        w0 = math.inf
        origin_power = f.origin_power - 2.0
        if origin_power <= 0.0:
            raise FieldError("logarithmic origin singularity in the potential is not supported")

    leading = potential_tail(f, total_mass)
    tail = TailModel.matched(rho[-1], values[-1], leading.exponent, leading.log_power)
    return RadialField(
        f.grid,
        values,
        w0,
        tail,
        origin_power,
        nonnegative=f.nonnegative,
        meta={"asymptotic_tail": leading, "total_mass": total_mass},
    )


def radial_laplacian(f: RadialField) -> RadialField:
    """-(f'' + (n-1)/rho f') by finite differences in x = ln rho.

    Positive fields are differentiated through g = ln f, which makes the
    stencil exact on pure powers.  The two end nodes use one-sided stencils
    and are listed in ``meta["low_accuracy"]``.
    """
    if f.grid.nodes.size < 4:
        raise GridError("need at least 4 nodes")
    n, h, rho = f.n, f.grid.log_step, f.grid.nodes
    positive = f.is_positive
    g = np.log(f.values) if positive else f.values
    d1 = np.empty_like(g)
    d2 = np.empty_like(g)
    d1[1:-1] = (g[2:] - g[:-2]) / (2.0 * h)
    d2[1:-1] = (g[2:] - 2.0 * g[1:-1] + g[:-2]) / h**2
    # one-sided stencils written in differences so constants differentiate to 0 exactly
    a1, a2, a3 = g[1] - g[0], g[2] - g[0], g[3] - g[0]
    b1, b2, b3 = g[-2] - g[-1], g[-3] - g[-1], g[-4] - g[-1]
    d1[0] = (4.0 * a1 - a2) / (2.0 * h)
    d1[-1] = -(4.0 * b1 - b2) / (2.0 * h)
    d2[0] = (-5.0 * a1 + 4.0 * a2 - a3) / h**2
    d2[-1] = (-5.0 * b1 + 4.0 * b2 - b3) / h**2
    if positive:
        out = -f.values * (d2 + d1**2 + (n - 2.0) * d1) / rho**2
    else:
        out = -(d2 + (n - 2.0) * d1) / rho**2
    if f.origin_power is None:
        at_zero = -2.0 * n * (f.values[0] - f.value_at_zero) / rho[0] ** 2
        origin_power = None
    else:
        at_zero, origin_power = math.inf, f.origin_power + 2.0
    tail = TailModel.matched(rho[-1], out[-1], f.tail.exponent + 2.0, f.tail.log_power)
    return RadialField(
        f.grid, out, at_zero, tail, origin_power, meta={"low_accuracy": (0, rho.size - 1)}
    )


@dataclass(frozen=True)
class Th4Integral:
    quadrature: float
    closed_form: float
    rel_error: float


def verify_th4_integral(params, grid: RadialGrid | None = None) -> Th4Integral:
    """Potential of |y|^(-g), g = (q(n-2) - 2s)/(1-s), at a unit point.

    For subcritical exponents 2 < g < n and the potential is a pure power
    whose value at rho = 1 is (1-s)^2 / (((n-2)q - 2)(n - (n-2)(q+s))).
    """
    from .exponents import Regime, classify_regime

    regime = classify_regime(params)
    if regime is not Regime.SUBCRITICAL:
        raise FieldError(f"the power-law potential identity needs a subcritical tuple (got {regime.value})")
    n, q, s = params.n, params.q, params.s
    if not (s < 1.0 and (n - 2.0) * q > 2.0):
        raise FieldError("need s < 1 and q > 2/(n-2) for a decaying power-law potential")
    g = (q * (n - 2.0) - 2.0 * s) / (1.0 - s)
    grid = grid or RadialGrid.log_uniform(n)
    f = RadialField.from_function(lambda t: t ** (-g), grid, g, origin_power=g, nonnegative=True)
    w = newton_potential(f)
    quad = float(w(np.array([1.0]))[0])
    closed = (1.0 - s) ** 2 / (((n - 2.0) * q - 2.0) * (n - (n - 2.0) * (q + s)))
    return Th4Integral(quad, closed, abs(quad - closed) / closed)
