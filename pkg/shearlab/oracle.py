"""
Closed-form reference solutions

Couette flow is solved exactly in Fourier variables by characteristics,
and the constant-coefficient model dt Lambda = c Psi[Lambda] has the
explicit arctan propagator. Both serve as oracles for the numerical
pipeline.
"""
from dataclasses import dataclass, replace
from typing import Callable, Iterable, List, Tuple

import numpy as np
from scipy.integrate import trapezoid


@dataclass(frozen=True)
class FourierDatum:
    """One Fourier coefficient at (k, eta)"""

    k: float
    eta: float
    value: complex


def couette_vorticity(omega0_hat: Callable, k: float, eta: float, t: float) -> complex:
    """Vorticity transported by Couette flow: omega0_hat(k, eta + k t)"""
    return omega0_hat(k, eta + k * t)


def couette_velocity_multipliers(k: float, eta, t: float) -> Tuple[complex, complex]:
    """(m1, m2) with V1 = m1 omega0_hat and V2 = m2 omega0_hat in co-moving variables"""
    shifted = np.asarray(eta) - k * t
    denominator = k**2 + shifted**2
    m2 = (-(k**2) / denominator) / (1j * k)
    m1 = (-shifted * k / denominator) / (1j * k)
    return m1, m2


def couette_velocity_norms(
    omega0_hat: Callable, k: float, t: float, eta_grid: np.ndarray
) -> Tuple[float, float]:
    """L2 norms (by quadrature in eta) of m1 omega0_hat and m2 omega0_hat"""
    m1, m2 = couette_velocity_multipliers(k, eta_grid, t)
    spectrum = np.abs(omega0_hat(k, eta_grid)) ** 2
    v1 = np.sqrt(trapezoid(np.abs(m1) ** 2 * spectrum, eta_grid) / (2.0 * np.pi))
    v2 = np.sqrt(trapezoid(np.abs(m2) ** 2 * spectrum, eta_grid) / (2.0 * np.pi))
    return float(v1), float(v2)


def gaussian_spectrum(width: float = 1.0, center: float = 0.0) -> Callable:
    """Fourier transform of a Gaussian bump, used as a smooth point-mass surrogate"""

    def omega0_hat(_k, eta):
        return np.exp(-0.5 * ((np.asarray(eta) - center) / width) ** 2)

    return omega0_hat


def cc_propagator(c: complex, k: float, eta, t: float):
    """exp(c (arctan(eta/k - t) - arctan(eta/k)))"""
    ratio = np.asarray(eta) / k
    return np.exp(c * (np.arctan(ratio - t) - np.arctan(ratio)))


def cc_evolve(spectrum: Iterable[FourierDatum], c: complex, t: float) -> List[FourierDatum]:
    """Exact constant-coefficient evolution of a list of Fourier data"""
    return [
        replace(datum, value=datum.value * complex(cc_propagator(c, datum.k, datum.eta, t)))
        for datum in spectrum
    ]
