"""
Ghost-energy weights and weighted energies

The weights decay in time exactly where the frozen-coefficient dynamics
could grow, so the weighted energies I_j = <d^j W, A d^j W> are
nonincreasing whenever the profile is close enough to Couette.
"""
import logging
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.integrate import quad_vec

from shearlab import config
from shearlab.diagnostics import velocity_mode
from shearlab.elliptic import ComplexField
from shearlab.exceptions import DataValidationError
from shearlab.profiles import ChannelGeometry, ShearProfile
from shearlab.spectral import Basis, BasisCoefficients, to_basis

logger = logging.getLogger("flask.app")


class WeightVariant(Enum):
    """Enumeration of weight families"""

    L2 = "L2"
    H1H2 = "H1H2"


@dataclass(frozen=True)
class WeightSpec:
    """Parameters of the ghost weight"""

    C: float = config.DEFAULT_WEIGHT_C
    beta: float = config.DEFAULT_BETA
    gamma: float = config.DEFAULT_GAMMA
    variant: WeightVariant = WeightVariant.L2

    def __post_init__(self):
        if not self.C > 0:
            raise DataValidationError(f"weight C must be positive, got {self.C}")
        if not 0 < self.beta < 0.5:
            raise DataValidationError("beta out of (0,1/2)")
        if not 0 < self.gamma < 0.5:
            raise DataValidationError("gamma out of (0,1/2)")
        if not 2 * self.beta + 2 * self.gamma > 1:
            raise DataValidationError("2*beta + 2*gamma must exceed 1")


def japanese(x):
    """<x> = sqrt(1 + x^2)"""
    return np.sqrt(1.0 + np.square(x))


def _decay_integral(spec: WeightSpec, ratios: np.ndarray, t: float) -> np.ndarray:
    """Integral over [0, t] of <tau>^(-2 gamma) <n/k - tau>^(-2 beta), vectorized in n/k"""
    if t == 0:
        return np.zeros_like(ratios)

    def integrand(tau):
        return japanese(tau) ** (-2.0 * spec.gamma) * japanese(ratios - tau) ** (-2.0 * spec.beta)

    value, _ = quad_vec(integrand, 0.0, t, epsabs=config.QUADRATURE_TOLERANCE)
    return value


def weight_values(spec: WeightSpec, frequencies, k: float, t: float) -> np.ndarray:
    """Weights A_n(t) for an array of frequencies n"""
    ratios = np.atleast_1d(np.asarray(frequencies, dtype=float)) / k
    if spec.variant is WeightVariant.L2:
        return np.exp(spec.C * np.arctan(ratios - t))
    transport = np.arctan(ratios) - np.arctan(ratios - t)
    return np.exp(-transport - _decay_integral(spec, ratios, t))


def weight_value(spec: WeightSpec, n: float, k: float, t: float) -> float:
    """Weight of a single frequency n"""
    return float(weight_values(spec, [n], k, t)[0])


def ghost_energy(coefficients: BasisCoefficients, spec: WeightSpec, k: float, t: float) -> float:
    """Sum of A_n |W_n|^2, scaled by the domain length"""
    weights = weight_values(spec, coefficients.frequencies, k, t)
    return float(coefficients.length * np.sum(weights * np.abs(coefficients.coeffs) ** 2))


######################################################################
#  E N E R G Y   S N A P S H O T S
######################################################################
@dataclass(frozen=True)
class EnergySnapshot:
    """Energies, norms and velocity diagnostics at one time"""

    t: float
    I0: float
    I1: float
    I2: float
    E2: float
    l2: float
    h1: float
    h2: float
    v_norm: float
    v2_norm: float
    dyW_bounds: Optional[Tuple[complex, complex]] = None

    def as_row(self) -> Dict[str, float]:
        row = asdict(self)
        bounds = row.pop("dyW_bounds")
        if bounds is not None:
            row["dyW_fd_at_0"], row["dyW_fd_at_1"] = abs(bounds[0]), abs(bounds[1])
        return row


def energy_suite(
    state, profile: ShearProfile, geometry: ChannelGeometry, spec: WeightSpec, truncation: int = None
) -> EnergySnapshot:
    """Weighted energies I0, I1, I2 and the unweighted norms of one mode state"""
    grid = state.w.grid
    values = state.w.values
    first = grid.derivative(values, 1)
    second = grid.derivative(values, 2)
    energies = []
    for derivative in (values, first, second):
        coefficients = to_basis(ComplexField(derivative, grid), Basis.EXP, truncation)
        energies.append(ghost_energy(coefficients, spec, state.k, state.t))
    l2_sq, d1_sq, d2_sq = (grid.norm(item) ** 2 for item in (values, first, second))

    velocity_1, velocity_2 = velocity_mode(state, profile, geometry)
    jacobian = 1.0 / profile.g_values
    v2_norm = grid.norm(velocity_2.values, jacobian)
    v_norm = float(np.hypot(grid.norm(velocity_1.values, jacobian), v2_norm))
    walls = (complex(first[0]), complex(first[-1])) if geometry.has_walls else None

    return EnergySnapshot(
        t=state.t,
        I0=energies[0],
        I1=energies[1],
        I2=energies[2],
        E2=sum(energies),
        l2=float(np.sqrt(l2_sq)),
        h1=float(np.sqrt(l2_sq + d1_sq)),
        h2=float(np.sqrt(l2_sq + d1_sq + d2_sq)),
        v_norm=v_norm,
        v2_norm=v2_norm,
        dyW_bounds=walls,
    )
