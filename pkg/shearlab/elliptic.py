"""
Shifted elliptic problems

For every x-mode k the stream function solves

    (-1 + (g (d/dy / k - i t))^2) Phi = w,    Phi = 0 on the channel boundary

and Psi solves the same problem with g == 1. Dirichlet problems are
discretized with second-order centered differences and solved as a single
complex tridiagonal system through LAPACK ?gttrf/?gttrs; the periodic
realization of the infinite channel is solved exactly by an FFT multiplier.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import get_lapack_funcs

from shearlab import config
from shearlab.exceptions import (
    DataValidationError,
    GridMismatch,
    IllConditionedBoundarySystem,
    SingularSystem,
    UnsupportedGeometry,
)
from shearlab.profiles import ChannelGeometry, Grid, ShearProfile

logger = logging.getLogger("flask.app")


######################################################################
#  G R I D   F U N C T I O N S
######################################################################
@dataclass(frozen=True, eq=False)
class ComplexField:
    """A complex grid function"""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.shape != (self.grid.n_points,):
            raise GridMismatch(
                f"field has shape {values.shape}, grid has {self.grid.n_points} nodes"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> "ComplexField":
        return cls(np.zeros(grid.n_points, dtype=np.complex128), grid)

    def _other_values(self, other) -> np.ndarray:
        if isinstance(other, ComplexField):
            same_grid(self, other)
            return other.values
        return other

    def __add__(self, other) -> "ComplexField":
        return ComplexField(self.values + self._other_values(other), self.grid)

    def __sub__(self, other) -> "ComplexField":
        return ComplexField(self.values - self._other_values(other), self.grid)

    def __mul__(self, scalar) -> "ComplexField":
        return ComplexField(self.values * scalar, self.grid)

    __rmul__ = __mul__

    def conj(self) -> "ComplexField":
        return ComplexField(np.conj(self.values), self.grid)

    def norm(self) -> float:
        """L2 norm by the grid quadrature"""
        return self.grid.norm(self.values)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


def same_grid(*items):
    """Raises GridMismatch unless every field or profile lives on one grid"""
    grids = {item.grid for item in items}
    if len(grids) > 1:
        raise GridMismatch(f"operands live on different grids: {sorted(map(repr, grids))}")


@dataclass(frozen=True, eq=False)
class HomogeneousPair:
    """u1, u2 with u1(y0) = u2(y1) = 1 and u1(y1) = u2(y0) = 0

    u_j = exp(i k t (y - y_j)) * r_j where the envelopes r_j are real and
    independent of t.
    """

    u1: ComplexField
    u2: ComplexField
    g_antiderivative: np.ndarray
    envelope1: np.ndarray
    envelope2: np.ndarray
    k: float
    t: float


######################################################################
#  O P E R A T O R
######################################################################
def operator_coefficients(k: float, t: float, profile: ShearProfile):
    """Coefficients (a2, a1, a0) of a2 phi'' + a1 phi' + a0 phi"""
    g2, ggp = profile.g_squared, profile.g_gprime
    a2 = g2 / k**2
    a1 = ggp / k**2 - 2j * t * g2 / k
    a0 = -1.0 - 1j * t * ggp / k - t**2 * g2
    return a2, a1, a0


def apply_operator(phi: ComplexField, k: float, t: float, profile: ShearProfile) -> ComplexField:
    """(-1 + (g (d/dy / k - i t))^2) phi with the expanded stencil"""
    same_grid(phi, profile)
    grid = phi.grid
    a2, a1, a0 = operator_coefficients(k, t, profile)
    values = phi.values
    first = grid.derivative(values, 1)
    second = grid.derivative(values, 2)
    return ComplexField(a2 * second + a1 * first + a0 * values, grid)


def shifted_derivative(phi: ComplexField, k: float, t: float) -> np.ndarray:
    """(d/dy / k - i t) phi"""
    return phi.grid.derivative(phi.values, 1) / k - 1j * t * phi.values


######################################################################
#  S O L V E R S
######################################################################
def solve_tridiagonal(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray):
    """Solves a complex tridiagonal system by LU with partial pivoting"""
    lower, diag, upper = (np.ascontiguousarray(a, dtype=np.complex128) for a in (lower, diag, upper))
    rhs = np.ascontiguousarray(rhs, dtype=np.complex128).reshape(-1, 1)
    gttrf, gttrs = get_lapack_funcs(("gttrf", "gttrs"), (lower, diag, upper, rhs))
    lower_f, diag_f, upper_f, upper2, pivots, info = gttrf(lower, diag, upper)
    smallest = np.min(np.abs(diag_f))
    if info > 0 or smallest < config.PIVOT_TOLERANCE:
        raise SingularSystem(
            f"tridiagonal elimination met pivot {smallest:.3e}; the profile lost ellipticity"
        )
    solution, info = gttrs(lower_f, diag_f, upper_f, upper2, pivots, rhs)
    if info != 0:
        raise SingularSystem(f"gttrs failed with info={info}")
    return solution[:, 0]


def _solve_dirichlet(w: ComplexField, k: float, t: float, profile: ShearProfile) -> ComplexField:
    h = w.grid.spacing
    a2, a1, a0 = (np.broadcast_to(a, w.values.shape)[1:-1] for a in operator_coefficients(k, t, profile))
    lower = a2 / h**2 - a1 / (2.0 * h)
    diag = -2.0 * a2 / h**2 + a0
    upper = a2 / h**2 + a1 / (2.0 * h)
    phi = np.zeros(w.grid.n_points, dtype=np.complex128)
    phi[1:-1] = solve_tridiagonal(lower[1:], diag, upper[:-1], w.values[1:-1])
    return ComplexField(phi, w.grid)


def _solve_periodic(w: ComplexField, k: float, t: float, profile: ShearProfile) -> ComplexField:
    if not profile.is_constant_g:
        raise UnsupportedGeometry("the periodic channel solver needs a constant g")
    g0 = profile.g_values[0]
    symbol = -1.0 - g0**2 * (w.grid.wavenumbers / k - t) ** 2
    return ComplexField(np.fft.ifft(np.fft.fft(w.values) / symbol), w.grid)


def solve_phi(
    w: ComplexField, k: float, t: float, profile: ShearProfile, geometry: ChannelGeometry
) -> ComplexField:
    """Stream function of the mode vorticity w at wavenumber k and time t"""
    if k == 0:
        raise DataValidationError("the k = 0 mode carries no stream function")
    same_grid(w, profile)
    if geometry.is_periodic:
        return _solve_periodic(w, k, t, profile)
    return _solve_dirichlet(w, k, t, profile)


def solve_psi(w: ComplexField, k: float, t: float, geometry: ChannelGeometry) -> ComplexField:
    """Constant-coefficient stream function (g == 1)"""
    return solve_phi(w, k, t, ShearProfile.constant_coefficient(0.0, w.grid), geometry)


######################################################################
#  H O M O G E N E O U S   S O L U T I O N S
######################################################################
def homogeneous_pair(k: float, t: float, profile: ShearProfile) -> HomogeneousPair:
    """u1, u2 built from exp(+-k G(y) + i k t y) with G' = 1/g"""
    if k == 0:
        raise DataValidationError("homogeneous solutions need k != 0")
    grid = profile.grid
    if grid.periodic:
        raise UnsupportedGeometry("homogeneous corrections need a channel with walls")
    antiderivative = cumulative_trapezoid(1.0 / profile.g_values, dx=grid.spacing, initial=0.0)
    total = antiderivative[-1]
    kappa = abs(k)
    # both exponentials are scaled to be <= 1 on the grid
    growing = np.exp(kappa * (antiderivative - total))
    decaying = np.exp(-kappa * antiderivative)
    boundary = np.array([[growing[0], decaying[0]], [growing[-1], decaying[-1]]])
    determinant = np.linalg.det(boundary)
    if abs(determinant) < config.DETERMINANT_TOLERANCE:
        raise IllConditionedBoundarySystem(
            f"boundary determinant {abs(determinant):.3e} at k={k}"
        )
    weights = np.linalg.solve(boundary, np.eye(2))
    envelope1 = weights[0, 0] * growing + weights[1, 0] * decaying
    envelope2 = weights[0, 1] * growing + weights[1, 1] * decaying
    y = grid.nodes
    u1 = np.exp(1j * k * t * (y - grid.y_start)) * envelope1
    u2 = np.exp(1j * k * t * (y - grid.y_end)) * envelope2
    return HomogeneousPair(
        u1=ComplexField(u1, grid),
        u2=ComplexField(u2, grid),
        g_antiderivative=antiderivative,
        envelope1=envelope1,
        envelope2=envelope2,
        k=k,
        t=t,
    )


def oscillatory_integral(amplitude: np.ndarray, omega: float, grid: Grid) -> complex:
    """Integral of amplitude(y) exp(-i omega (y - y0)) with amplitude piecewise linear

    The exponential is integrated exactly on every cell, so the error does
    not grow with omega * spacing.
    """
    h = grid.spacing
    theta = omega * h
    if abs(theta) < 1.0e-3:
        j0 = 1.0 - 0.5j * theta - theta**2 / 6.0 + 1j * theta**3 / 24.0
        j1 = 0.5 - 1j * theta / 3.0 - theta**2 / 8.0 + 1j * theta**3 / 30.0
    else:
        rotation = np.exp(-1j * theta)
        j0 = (1.0 - rotation) / (1j * theta)
        j1 = 1j * rotation / theta - (1.0 - rotation) / theta**2
    cells = np.exp(-1j * theta * np.arange(grid.n_points - 1))
    return h * np.sum(cells * (amplitude[:-1] * (j0 - j1) + amplitude[1:] * j1))


def boundary_dy_phi(
    w: ComplexField,
    k: float,
    profile: ShearProfile,
    pair: HomogeneousPair,
    quadrature: str = "trapezoid",
) -> Tuple[complex, complex]:
    """Traces of d/dy Phi at both walls from pairings of w/g with u1 and u2"""
    same_grid(w, profile, pair.u1)
    grid = w.grid
    amplitude = w.values / profile.g_values
    if quadrature == "trapezoid":
        pairing1 = grid.inner(amplitude, pair.u1.values)
        pairing2 = grid.inner(amplitude, pair.u2.values)
    elif quadrature == "filon":
        omega = k * pair.t
        pairing1 = oscillatory_integral(amplitude * pair.envelope1, omega, grid)
        pairing2 = oscillatory_integral(amplitude * pair.envelope2, omega, grid) * np.exp(
            1j * omega * grid.length
        )
    else:
        raise ValueError(f"unknown quadrature {quadrature!r}")
    g = profile.g_values
    return (-(k**2) / g[0] * pairing1, k**2 / g[-1] * pairing2)


def boundary_d2y_phi(
    w: ComplexField,
    k: float,
    t: float,
    profile: ShearProfile,
    dy_values: Tuple[complex, complex],
) -> Tuple[complex, complex]:
    """Traces of d^2/dy^2 Phi from the equation at the walls, where Phi = 0"""
    _, a1, _ = operator_coefficients(k, t, profile)
    a1 = np.broadcast_to(a1, w.values.shape)
    g2 = profile.g_squared
    traces = []
    for index, dy_value in zip((0, -1), dy_values):
        traces.append(k**2 / g2[index] * (w.values[index] - a1[index] * dy_value))
    return tuple(traces)


def h_correction(
    level: int, boundary_values: Tuple[complex, complex], pair: HomogeneousPair
) -> ComplexField:
    """H^(level) = b0 u1 + b1 u2 restoring the wall traces of d^level Phi"""
    if level not in (1, 2):
        raise ValueError(f"correction level must be 1 or 2, got {level}")
    first, second = boundary_values
    return pair.u1 * first + pair.u2 * second


def split_derivative(
    phi: ComplexField,
    level: int,
    pair: HomogeneousPair,
    boundary_values: Tuple[complex, complex],
) -> Tuple[ComplexField, ComplexField]:
    """Splits d^level Phi into a part with zero wall data and the correction H^(level)"""
    correction = h_correction(level, boundary_values, pair)
    derivative = ComplexField(phi.grid.derivative(phi.values, level), phi.grid)
    return derivative - correction, correction


def tilde_h1_norm(phi: ComplexField, k: float, t: float) -> float:
    """sqrt(||phi||^2 + ||(d/dy / k - i t) phi||^2)"""
    grid = phi.grid
    density = np.abs(phi.values) ** 2 + np.abs(shifted_derivative(phi, k, t)) ** 2
    return float(np.sqrt(grid.integrate(density).real))
