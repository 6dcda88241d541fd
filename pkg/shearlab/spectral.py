"""
Basis expansions and stream-function coefficients on [0, 1]

Two bases are used: the exponentials exp(i n y) with n = 2 pi j and the
sines sin(n y) with n = pi j. Indices passed to the coefficient functions
count basis steps j, not frequencies.

For the constant-coefficient operator (-k^2 + (d/dy - i k t)^2) with zero
Dirichlet data, every coefficient <Psi[e_n], e_m> is available three ways:
an exact construction (particular + homogeneous solution integrated in
closed form), the published closed-form formula evaluated as printed, and a
finite-difference solve extrapolated over two nested grids. The solve is the
reference; the printed formulas are reported, never trusted.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from shearlab import config
from shearlab.elliptic import ComplexField, solve_psi
from shearlab.exceptions import DegenerateIndexPair, IllConditionedBoundarySystem
from shearlab.profiles import ChannelGeometry, Grid

logger = logging.getLogger("flask.app")

DEFAULT_ORACLE_POINTS = 4097


class Basis(Enum):
    """Enumeration of expansion bases"""

    EXP = "exp"
    SIN = "sin"


######################################################################
#  B A S I S   E X P A N S I O N S
######################################################################
@dataclass(frozen=True, eq=False)
class BasisCoefficients:
    """Truncated expansion of a grid function"""

    basis: Basis
    truncation: int
    indices: np.ndarray
    frequencies: np.ndarray
    coeffs: np.ndarray
    length: float
    parseval_gap: float

    @property
    def norm_squared(self) -> float:
        """Squared L2 norm implied by the coefficients"""
        scale = self.length if self.basis is Basis.EXP else 0.5 * self.length
        return float(scale * np.sum(np.abs(self.coeffs) ** 2))


def _frequencies(basis: Basis, truncation: int, length: float) -> Tuple[np.ndarray, np.ndarray]:
    if basis is Basis.EXP:
        indices = np.arange(-truncation, truncation + 1)
        return indices, 2.0 * np.pi * indices / length
    indices = np.arange(1, truncation + 1)
    return indices, np.pi * indices / length


@lru_cache(maxsize=32)
def _analysis_matrix(grid: Grid, basis: Basis, truncation: int) -> np.ndarray:
    _, frequencies = _frequencies(basis, truncation, grid.length)
    y = grid.nodes - grid.y_start
    phase = np.outer(frequencies, y)
    if basis is Basis.EXP:
        return np.exp(-1j * phase) * grid.weights / grid.length
    return 2.0 * np.sin(phase) * grid.weights / grid.length


def to_basis(field: ComplexField, basis: Basis, truncation: int = None) -> BasisCoefficients:
    """Coefficients by grid quadrature against the (conjugated) basis functions"""
    grid = field.grid
    truncation = truncation or max(1, grid.n_points // 4)
    indices, frequencies = _frequencies(basis, truncation, grid.length)
    coeffs = _analysis_matrix(grid, basis, truncation) @ field.values
    quadrature = field.norm() ** 2
    result = BasisCoefficients(basis, truncation, indices, frequencies, coeffs, grid.length, 0.0)
    gap = abs(quadrature - result.norm_squared) / quadrature if quadrature > 0 else 0.0
    return BasisCoefficients(basis, truncation, indices, frequencies, coeffs, grid.length, gap)


def synthesize(coefficients: BasisCoefficients, grid: Grid) -> ComplexField:
    """Evaluates a truncated expansion on the grid"""
    y = grid.nodes - grid.y_start
    phase = np.outer(y, coefficients.frequencies)
    if coefficients.basis is Basis.EXP:
        return ComplexField(np.exp(1j * phase) @ coefficients.coeffs, grid)
    return ComplexField(np.sin(phase) @ coefficients.coeffs, grid)


######################################################################
#  C O E F F I C I E N T   R E C O R D S
######################################################################
def relative_difference(first: complex, second: complex) -> float:
    scale = max(abs(first), abs(second))
    return abs(first - second) / scale if scale > 0 else 0.0


@dataclass(frozen=True)
class CoefficientRecord:
    """<Psi[e_n], e_m> from three sources"""

    basis: Basis
    n: int
    m: int
    k: float
    t: float
    analytic: complex
    printed: complex
    numeric: complex

    @property
    def disc_an_num(self) -> float:
        return relative_difference(self.analytic, self.numeric)

    @property
    def disc_an_printed(self) -> float:
        return relative_difference(self.analytic, self.printed)

    @property
    def discrepancy(self) -> float:
        """Max pairwise relative difference"""
        return max(
            self.disc_an_num,
            self.disc_an_printed,
            relative_difference(self.printed, self.numeric),
        )


@dataclass(frozen=True)
class SweepSummary:
    count: int
    max_an_num: float
    max_an_printed: float


def _exponential_mean(rate: complex) -> complex:
    """Integral of exp(rate y) over [0, 1]"""
    if abs(rate) < 1.0e-12:
        return 1.0 + 0.5 * rate
    return np.expm1(rate) / rate


def _homogeneous_weights(k: float, t: float, right: Tuple[complex, complex]) -> np.ndarray:
    """(a, b) with [[e^(k+ikt), e^(-k+ikt)], [1, 1]] (a, b) = -right"""
    matrix = np.array(
        [[np.exp(k + 1j * k * t), np.exp(-k + 1j * k * t)], [1.0, 1.0]], dtype=np.complex128
    )
    determinant = np.linalg.det(matrix)
    if abs(determinant) < config.DETERMINANT_TOLERANCE:
        raise IllConditionedBoundarySystem(f"coefficient system determinant {abs(determinant):.3e}")
    return np.linalg.solve(matrix, -np.asarray(right, dtype=np.complex128))


def _resolvent_denominator(frequency: float, k: float, t: float) -> float:
    return k**2 + (frequency - k * t) ** 2


######################################################################
#  E X P O N E N T I A L   B A S I S
######################################################################
def exp_analytic(n: int, m: int, k: float, t: float) -> complex:
    """<Psi[e^{i n y}], e^{i m y}> from the exact particular + homogeneous solution"""
    freq_n, freq_m = 2.0 * np.pi * n, 2.0 * np.pi * m
    a, b = _homogeneous_weights(k, t, (1.0, 1.0))
    shift = 1j * (k * t - freq_m)
    bracket = (1.0 if n == m else 0.0) + a * _exponential_mean(k + shift) + b * _exponential_mean(
        -k + shift
    )
    return complex(-bracket / _resolvent_denominator(freq_n, k, t))


def exp_printed(n: int, m: int, k: float, t: float) -> complex:
    """The displayed exponential-basis formula, evaluated as printed"""
    freq_n, freq_m = 2.0 * np.pi * n, 2.0 * np.pi * m
    a, b = _homogeneous_weights(k, t, (1.0, 1.0))
    d_n = _resolvent_denominator(freq_n, k, t)
    d_m = _resolvent_denominator(freq_m, k, t)
    return complex((1.0 if n == m else 0.0) / d_n + k * (a - b) / (d_m * d_n))


######################################################################
#  S I N E   B A S I S
######################################################################
def sine_d_coefficient(n: int, m: int, k: float, t: float) -> complex:
    """The d coefficient of the sine-basis formula (parities in basis steps)"""
    parity = (-1) ** (n + m)
    denominator = np.exp(k) - np.exp(-k)
    return (
        -(parity - 1)
        + 2.0 * (parity * np.exp(-k) + np.exp(k)) / denominator
        + 2.0 * ((-1) ** m * np.exp(1j * k * t) - (-1) ** n * np.exp(-1j * k * t)) / denominator
    )


def sin_analytic(n: int, m: int, k: float, t: float) -> complex:
    """2 <Psi[sin(n y)], sin(m y)> from the exact solution"""
    freq_n, freq_m = np.pi * n, np.pi * m
    minus = _resolvent_denominator(freq_n, k, t)
    plus = _resolvent_denominator(-freq_n, k, t)
    # particular solution P = -(1/2i) (e^{iny}/D- - e^{-iny}/D+)
    at_zero = -(1.0 / minus - 1.0 / plus) / 2j
    a, b = _homogeneous_weights(k, t, ((-1) ** n, 1.0))

    def moment(sign: int) -> complex:
        """Integral of Psi * exp(sign i m y)"""
        rate = sign * 1j * freq_m
        particular = -(
            _exponential_mean(1j * freq_n + rate) / minus
            - _exponential_mean(-1j * freq_n + rate) / plus
        ) / 2j
        homogeneous = at_zero * (
            a * _exponential_mean(k + 1j * k * t + rate)
            + b * _exponential_mean(-k + 1j * k * t + rate)
        )
        return particular + homogeneous

    return complex((moment(1) - moment(-1)) / 1j)


def _sin_printed_cross_term(n: int, m: int, k: float, t: float) -> complex:
    if n == m:
        raise DegenerateIndexPair(f"printed sine formula is singular at n = m = {n}")
    freq_n, freq_m = np.pi * n, np.pi * m
    kt = k * t
    polynomial = (
        k**4 * t**4
        + 2 * k**4 * t**2
        + 2 * k**4
        - 2 * k**2 * t**2 * (freq_m**2 + freq_n**2)
        + 2 * k**2 * (freq_m**2 + freq_n**2)
        + 2 * freq_m**2 * freq_n**2
    )
    denominator = (
        (k**2 + (kt + freq_m) ** 2)
        * (k**2 + (kt - freq_m) ** 2)
        * (k**2 + (kt + freq_n) ** 2)
        * (k**2 + (kt - freq_n) ** 2)
        * (freq_n**2 - freq_m**2)
    )
    return 1j * ((-1) ** (n + m) - 1) * freq_n * freq_m * kt * polynomial / denominator


def sin_printed(n: int, m: int, k: float, t: float) -> complex:
    """The displayed sine-basis formula; at n = m only the delta term is reported"""
    freq_n, freq_m = np.pi * n, np.pi * m
    kt = k * t
    delta = 1.0 / (k**2 + (freq_n - kt) ** 2) + 1.0 / (k**2 + (freq_n + kt) ** 2)
    try:
        cross = _sin_printed_cross_term(n, m, k, t)
    except DegenerateIndexPair:
        return complex(delta)
    factor_n = 1.0 / (k**2 + (kt + freq_n) ** 2) - 1.0 / (k**2 + (kt - freq_n) ** 2)
    factor_m = 1.0 / (k**2 + (kt + freq_m) ** 2) - 1.0 / (k**2 + (kt - freq_m) ** 2)
    return complex(sine_d_coefficient(n, m, k, t) * k * factor_n * factor_m + cross)


######################################################################
#  N U M E R I C A L   O R A C L E
######################################################################
def _basis_values(basis: Basis, index: int, y: np.ndarray) -> np.ndarray:
    if basis is Basis.EXP:
        return np.exp(2j * np.pi * index * y)
    return np.sin(np.pi * index * y).astype(np.complex128)


def _projections(basis: Basis, n: int, ms: Sequence[int], k: float, t: float, grid: Grid):
    rhs = ComplexField(_basis_values(basis, n, grid.nodes), grid)
    psi = solve_psi(rhs, k, t, ChannelGeometry.finite()).values / k**2
    scale = 1.0 if basis is Basis.EXP else 2.0
    return np.array(
        [scale * grid.inner(psi, _basis_values(basis, m, grid.nodes)) for m in ms]
    )


def numeric_coefficients(
    basis: Basis, n: int, ms: Sequence[int], k: float, t: float, n_points: int
) -> np.ndarray:
    """Solve-and-project coefficients, Richardson-extrapolated over nested grids"""
    coarse = _projections(basis, n, ms, k, t, Grid(n_points))
    fine = _projections(basis, n, ms, k, t, Grid(2 * n_points - 1))
    return (4.0 * fine - coarse) / 3.0


def exp_coeff(
    n: int, m: int, k: float, t: float, n_points: int = DEFAULT_ORACLE_POINTS
) -> CoefficientRecord:
    """Exponential-basis coefficient record"""
    numeric = numeric_coefficients(Basis.EXP, n, [m], k, t, n_points)[0]
    return CoefficientRecord(
        Basis.EXP, n, m, k, t, exp_analytic(n, m, k, t), exp_printed(n, m, k, t), complex(numeric)
    )


def sin_coeff(
    n: int, m: int, k: float, t: float, n_points: int = DEFAULT_ORACLE_POINTS
) -> CoefficientRecord:
    """Sine-basis coefficient record"""
    numeric = numeric_coefficients(Basis.SIN, n, [m], k, t, n_points)[0]
    return CoefficientRecord(
        Basis.SIN, n, m, k, t, sin_analytic(n, m, k, t), sin_printed(n, m, k, t), complex(numeric)
    )


ANALYTIC = {Basis.EXP: exp_analytic, Basis.SIN: sin_analytic}
PRINTED = {Basis.EXP: exp_printed, Basis.SIN: sin_printed}


def coefficient_sweep(
    ks: Iterable[float],
    t_grid: Iterable[float],
    index_range: Iterable[int],
    basis: Basis = Basis.EXP,
    n_points: int = DEFAULT_ORACLE_POINTS,
    workers: int = 1,
) -> Tuple[List[CoefficientRecord], SweepSummary]:
    """Evaluates all three coefficient sources over a (k, t, n, m) lattice"""
    indices = list(index_range)
    groups = [(k, t, n) for k in ks for t in t_grid for n in indices]
    if not indices or not groups:
        return [], SweepSummary(0, 0.0, 0.0)
    logger.info("Sweeping %d (k, t, n) groups in the %s basis", len(groups), basis.value)

    def evaluate(group):
        k, t, n = group
        numeric = numeric_coefficients(basis, n, indices, k, t, n_points)
        return [
            CoefficientRecord(
                basis, n, m, k, t,
                ANALYTIC[basis](n, m, k, t),
                PRINTED[basis](n, m, k, t),
                complex(value),
            )
            for m, value in zip(indices, numeric)
        ]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            batches = list(executor.map(evaluate, groups))
    else:
        batches = [evaluate(group) for group in groups]
    records = [record for batch in batches for record in batch]
    summary = SweepSummary(
        count=len(records),
        max_an_num=max(record.disc_an_num for record in records),
        max_an_printed=max(record.disc_an_printed for record in records),
    )
    return records, summary


def weighted_bound_ratio(coefficients: BasisCoefficients, k: float, t: float) -> float:
    """|<W, Psi[W]>| / (k^-2 sum <n/k - t>^-2 |W_n|^2) for an exponential expansion on [0, 1]"""
    indices = coefficients.indices
    values = coefficients.coeffs
    matrix = np.array([[exp_analytic(n, m, k, t) for m in indices] for n in indices])
    # <W, Psi[W]> = sum_{n,m} W_m conj(W_n) conj(<Psi[e_n], e_m>)
    pairing = np.einsum("m,n,nm->", values, np.conj(values), np.conj(matrix))
    weights = 1.0 / (k**2 + (2.0 * np.pi * indices - k * t) ** 2)
    bound = float(np.sum(weights * np.abs(values) ** 2))
    return float(abs(pairing) / bound) if bound > 0 else 0.0
