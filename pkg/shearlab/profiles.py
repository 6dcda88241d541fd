"""
Shear profiles, grids and channel geometry

A monotone shear flow U is reduced to the two coefficient functions
f = U''(U^-1(z)) and g = U'(U^-1(z)) on a uniform grid in the z = U(y)
coordinate. Everything downstream (elliptic solves, evolution, energies)
only sees f, g and g' sampled on that grid.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from shearlab import config
from shearlab.exceptions import (
    DataValidationError,
    InversionFailure,
    NonMonotoneProfile,
)

logger = logging.getLogger("flask.app")

MIN_GRID_POINTS = 16


######################################################################
#  G R I D
######################################################################
@dataclass(frozen=True)
class Grid:
    """Uniform grid on [y_start, y_end] (closed) or [y_start, y_end + h) (periodic)"""

    n_points: int
    y_start: float = 0.0
    y_end: float = 1.0
    periodic: bool = False

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < MIN_GRID_POINTS:
            raise DataValidationError(
                f"Invalid grid: n_points must be an integer >= {MIN_GRID_POINTS}, got {self.n_points}"
            )
        if not self.y_end > self.y_start:
            raise DataValidationError(
                f"Invalid grid: y_end ({self.y_end}) must exceed y_start ({self.y_start})"
            )

    @property
    def spacing(self) -> float:
        return (self.y_end - self.y_start) / (self.n_points - 1)

    @property
    def length(self) -> float:
        """Measure of the domain the grid discretizes"""
        if self.periodic:
            return self.n_points * self.spacing
        return self.y_end - self.y_start

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.y_start, self.y_end, self.n_points)

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights: trapezoid on closed grids, rectangle on periodic ones"""
        weights = np.full(self.n_points, self.spacing)
        if not self.periodic:
            weights[0] = weights[-1] = 0.5 * self.spacing
        return weights

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Angular FFT frequencies of a periodic grid"""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)

    def integrate(self, values: np.ndarray):
        return np.dot(self.weights, values)

    def inner(self, first: np.ndarray, second: np.ndarray) -> complex:
        """<u, v> = integral of u * conj(v)"""
        return self.integrate(first * np.conj(second))

    def norm(self, values: np.ndarray, weight: np.ndarray = None) -> float:
        density = np.abs(values) ** 2
        if weight is not None:
            density = density * weight
        return float(np.sqrt(self.integrate(density).real))

    def derivative(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        """Second-order finite differences (one-sided at the ends), spectral if periodic"""
        if self.periodic:
            symbol = (1j * self.wavenumbers) ** order
            result = np.fft.ifft(symbol * np.fft.fft(values))
            return result if np.iscomplexobj(values) else result.real
        if order == 1:
            return np.gradient(values, self.spacing, edge_order=2)
        if order == 2:
            return second_difference(values, self.spacing)
        return self.derivative(self.derivative(values, order - 2), 2)


def second_difference(values: np.ndarray, spacing: float) -> np.ndarray:
    """Centered second difference with second-order one-sided end stencils"""
    result = np.empty_like(values)
    result[1:-1] = values[2:] - 2.0 * values[1:-1] + values[:-2]
    result[0] = 2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]
    result[-1] = 2.0 * values[-1] - 5.0 * values[-2] + 4.0 * values[-3] - values[-4]
    return result / spacing**2


######################################################################
#  C H A N N E L   G E O M E T R Y
######################################################################
class GeometryKind(Enum):
    """Enumeration of channel realizations"""

    FINITE = "finite"
    INFINITE_TRUNCATED = "infinite_truncated"
    INFINITE_PERIODIC = "infinite_periodic"


@dataclass(frozen=True)
class ChannelGeometry:
    """Finite channel [0,1] or the infinite channel truncated to [-Y, Y]"""

    kind: GeometryKind = GeometryKind.FINITE
    half_width: Optional[float] = None

    def __post_init__(self):
        if self.kind is GeometryKind.FINITE:
            return
        if self.half_width is None or not self.half_width > 0:
            raise DataValidationError(
                f"Invalid geometry: {self.kind.value} needs a positive half_width"
            )

    @classmethod
    def finite(cls) -> "ChannelGeometry":
        return cls(GeometryKind.FINITE)

    @classmethod
    def infinite_truncated(cls, half_width: float) -> "ChannelGeometry":
        return cls(GeometryKind.INFINITE_TRUNCATED, half_width)

    @classmethod
    def infinite_periodic(cls, half_width: float) -> "ChannelGeometry":
        return cls(GeometryKind.INFINITE_PERIODIC, half_width)

    @property
    def has_walls(self) -> bool:
        return self.kind is GeometryKind.FINITE

    @property
    def is_periodic(self) -> bool:
        return self.kind is GeometryKind.INFINITE_PERIODIC

    @property
    def z_range(self) -> Tuple[float, float]:
        if self.kind is GeometryKind.FINITE:
            return (0.0, 1.0)
        return (-self.half_width, self.half_width)

    def grid(self, n_points: int) -> Grid:
        """Returns the z-grid this geometry is discretized on"""
        if self.kind is GeometryKind.FINITE:
            return Grid(n_points, 0.0, 1.0)
        width = self.half_width
        if self.kind is GeometryKind.INFINITE_TRUNCATED:
            return Grid(n_points, -width, width)
        return Grid(n_points, -width, width - 2.0 * width / n_points, periodic=True)

    def supports(self, values: np.ndarray, grid: Grid, tolerance: float = 1.0e-10) -> bool:
        """True when data on an infinite channel lives in the inner half of [-Y, Y]"""
        if self.kind is GeometryKind.FINITE:
            return True
        scale = np.max(np.abs(values)) if values.size else 0.0
        outer = np.abs(grid.nodes) > 0.5 * self.half_width
        return bool(np.all(np.abs(values[outer]) <= tolerance * scale))


@dataclass(frozen=True)
class WavenumberSet:
    """x-wavenumbers k = (2 pi / L) j for j = +-1 .. +-K; the x-average is excluded"""

    period_L: float
    max_mode_K: int

    def __post_init__(self):
        if not self.period_L > 0:
            raise DataValidationError(f"Invalid period_L: {self.period_L} must be positive")
        if int(self.max_mode_K) != self.max_mode_K or self.max_mode_K < 1:
            raise DataValidationError(
                f"Invalid max_mode_K: {self.max_mode_K} must be a positive integer"
            )

    @property
    def fundamental(self) -> float:
        return 2.0 * np.pi / self.period_L

    @property
    def modes(self) -> Tuple[float, ...]:
        steps = [j for j in range(-self.max_mode_K, self.max_mode_K + 1) if j != 0]
        return tuple(self.fundamental * j for j in steps)


######################################################################
#  S H E A R   F L O W   D E S C R I P T O R S
######################################################################
SAFE_NAMES = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "tanh": np.tanh,
    "cosh": np.cosh,
    "sinh": np.sinh,
    "arctan": np.arctan,
    "pi": np.pi,
}


def compile_expression(text: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compiles an expression in y over a whitelisted numpy namespace"""
    try:
        code = compile(text, "<profile>", "eval")
    except SyntaxError as error:
        raise DataValidationError(f"Invalid profile expression {text!r}: {error.msg}") from error
    unknown = set(code.co_names) - set(SAFE_NAMES) - {"y"}
    if unknown:
        raise DataValidationError(
            f"Invalid profile expression {text!r}: unknown names {sorted(unknown)}"
        )

    def evaluate(y):
        namespace = dict(SAFE_NAMES, y=y)
        value = eval(code, {"__builtins__": {}}, namespace)  # pylint: disable=eval-used
        return np.broadcast_to(np.asarray(value, dtype=float), np.shape(y)).copy()

    return evaluate


@dataclass(frozen=True)
class ShearFlow:
    """A closed-form monotone profile U with its derivatives on a physical interval"""

    label: str
    u: Callable
    du: Callable
    d2u: Callable
    domain: Tuple[float, float]
    d3u: Optional[Callable] = field(default=None)

    @classmethod
    def couette(cls, domain=(0.0, 1.0)) -> "ShearFlow":
        return cls.affine(1.0, domain, label="couette")

    @classmethod
    def affine(cls, slope: float, domain=(0.0, 1.0), label: str = None) -> "ShearFlow":
        return cls(
            label=label or f"affine(slope={slope})",
            u=lambda y: slope * np.asarray(y, dtype=float),
            du=lambda y: np.full(np.shape(y), float(slope)),
            d2u=lambda y: np.zeros(np.shape(y)),
            d3u=lambda y: np.zeros(np.shape(y)),
            domain=tuple(domain),
        )

    @classmethod
    def sine_perturbed(
        cls, amplitude: float, wavenumber: float = 1.0, phase: float = 0.0, domain=(0.0, 1.0)
    ) -> "ShearFlow":
        """U(y) = y + a (sin(2 pi nu y + phase) - sin(phase))"""
        omega = 2.0 * np.pi * wavenumber
        return cls(
            label=f"sine_perturbed(a={amplitude}, nu={wavenumber}, phase={phase})",
            u=lambda y: y + amplitude * (np.sin(omega * y + phase) - np.sin(phase)),
            du=lambda y: 1.0 + amplitude * omega * np.cos(omega * y + phase),
            d2u=lambda y: -amplitude * omega**2 * np.sin(omega * y + phase),
            d3u=lambda y: -amplitude * omega**3 * np.cos(omega * y + phase),
            domain=tuple(domain),
        )

    @classmethod
    def expression(
        cls, u: str, du: str, d2u: str, d3u: str = None, domain=(0.0, 1.0)
    ) -> "ShearFlow":
        return cls(
            label=f"expression({u})",
            u=compile_expression(u),
            du=compile_expression(du),
            d2u=compile_expression(d2u),
            d3u=compile_expression(d3u) if d3u else None,
            domain=tuple(domain),
        )


######################################################################
#  S H E A R   P R O F I L E
######################################################################
@dataclass(frozen=True, eq=False)
class ShearProfile:
    """f, g and g' sampled on the z-grid, with the bounds the stability checks refer to"""

    grid: Grid
    f_values: np.ndarray
    g_values: np.ndarray
    g_prime_values: np.ndarray
    c_bound: float
    f_sup_norms: np.ndarray
    y_nodes: np.ndarray
    label: str = ""

    @cached_property
    def g_squared(self) -> np.ndarray:
        return self.g_values**2

    @cached_property
    def g_gprime(self) -> np.ndarray:
        return self.g_values * self.g_prime_values

    @cached_property
    def is_constant_g(self) -> bool:
        return bool(np.all(self.g_values == self.g_values[0]))

    @property
    def is_shear_free(self) -> bool:
        """f vanishes identically, so the vorticity is transported without feedback"""
        return not np.any(self.f_values)

    @classmethod
    def constant_coefficient(cls, c: float, grid: Grid) -> "ShearProfile":
        """Surrogate with f == c and g == 1"""
        ones = np.ones(grid.n_points)
        return cls(
            grid=grid,
            f_values=np.full(grid.n_points, float(c)),
            g_values=ones,
            g_prime_values=np.zeros(grid.n_points),
            c_bound=1.0,
            f_sup_norms=np.full(5, abs(float(c))),
            y_nodes=grid.nodes.copy(),
            label=f"constant_coefficient(c={c})",
        )


def invert_profile(flow: ShearFlow, z: np.ndarray) -> np.ndarray:
    """Solves U(y) = z node-wise with Brent's method on the physical interval"""
    low, high = flow.domain

    def u_at(y: float) -> float:
        return float(flow.u(np.array([y]))[0])

    u_low, u_high = u_at(low), u_at(high)
    slack = config.INVERSION_TOLERANCE
    if np.any(z < u_low - slack) or np.any(z > u_high + slack):
        raise InversionFailure(
            f"z-range [{z.min()}, {z.max()}] is not covered by U on {flow.domain} "
            f"(U-range [{u_low}, {u_high}])"
        )
    y = np.empty(z.shape, dtype=float)
    for index, target in enumerate(np.clip(z, u_low, u_high)):
        try:
            y[index] = brentq(lambda point, level=target: u_at(point) - level, low, high, xtol=1.0e-15, maxiter=200)
        except (ValueError, RuntimeError) as error:
            raise InversionFailure(f"no root of U(y) = {target} on {flow.domain}: {error}") from error
    residual = np.max(np.abs(flow.u(y) - z))
    if residual > config.INVERSION_TOLERANCE:
        raise InversionFailure(f"inversion residual {residual:.3e} exceeds {config.INVERSION_TOLERANCE}")
    return y


def check_monotone(flow: ShearFlow, n_samples: int):
    """Raises NonMonotoneProfile unless U' > floor on the whole physical interval"""
    samples = np.linspace(flow.domain[0], flow.domain[1], n_samples)
    slope = flow.du(samples)
    floor = config.MONOTONICITY_FLOOR
    if np.all(slope < -floor):
        raise NonMonotoneProfile(
            f"{flow.label} is decreasing; reflect y -> -y to obtain an increasing profile"
        )
    if np.any(slope <= floor):
        worst = samples[np.argmin(slope)]
        raise NonMonotoneProfile(
            f"{flow.label}: U' changes sign or |U'| < {floor} near y={worst:.6g}"
        )


def build_profile(flow: ShearFlow, grid: Grid) -> ShearProfile:
    """Samples f = U''(U^-1(z)) and g = U'(U^-1(z)) at the grid nodes"""
    logger.info("Building profile %s on %d nodes", flow.label, grid.n_points)
    check_monotone(flow, 8 * grid.n_points + 1)
    z = grid.nodes
    y = invert_profile(flow, z)
    g_values = flow.du(y)
    f_values = flow.d2u(y)
    if not (np.all(np.isfinite(f_values)) and np.all(np.isfinite(g_values))):
        raise DataValidationError(f"{flow.label}: f or g is not finite on the grid")
    # dg/dz = U''(y) / U'(y)
    g_prime_values = f_values / g_values
    c_bound = float(min(g_values.min(), 1.0 / g_values.max()))

    levels = [f_values]
    if flow.d3u is not None:
        levels.append(flow.d3u(y) / g_values)
    while len(levels) < 5:
        levels.append(grid.derivative(levels[-1]))
    maxima = np.array([np.max(np.abs(level)) for level in levels])
    f_sup_norms = np.maximum.accumulate(maxima)

    return ShearProfile(
        grid=grid,
        f_values=f_values,
        g_values=g_values,
        g_prime_values=g_prime_values,
        c_bound=c_bound,
        f_sup_norms=f_sup_norms,
        y_nodes=y,
        label=flow.label,
    )


def smallness_parameter(profile: ShearProfile, period_L: float, s: int) -> float:
    """L * ||f||_{W^{s+1,inf}} surrogate, the smallness gate for stability"""
    if s not in range(0, 4):
        raise ValueError(f"smoothness index s must be in 0..3, got {s}")
    return period_L * float(profile.f_sup_norms[s + 1])
