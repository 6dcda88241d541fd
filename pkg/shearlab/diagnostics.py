"""
Diagnostics

Velocity reconstruction, decay-rate and log-growth fits, the quadratic
consistency term, and the PASS/FAIL stability report of a run.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from shearlab import config
from shearlab.elliptic import ComplexField, shifted_derivative, solve_phi
from shearlab.exceptions import InsufficientSamples, NonPositiveValue
from shearlab.profiles import ChannelGeometry, ShearProfile

logger = logging.getLogger("flask.app")


######################################################################
#  V E L O C I T Y
######################################################################
def velocity_mode(state, profile: ShearProfile, geometry: ChannelGeometry):
    """(V1, V2) amplitudes of one mode: V2 = (i/k) Phi, V1 = -(1/k) g (d/dy / k - i t) Phi"""
    k = state.k
    phi = solve_phi(state.w, k, state.t, profile, geometry)
    v2 = ComplexField(1j / k * phi.values, phi.grid)
    v1 = ComplexField(-profile.g_values / k * shifted_derivative(phi, k, state.t), phi.grid)
    return v1, v2


def physical_norms(modes: Sequence, profile: ShearProfile, geometry: ChannelGeometry):
    """(||v - <v>_x||, ||v2||) summed over modes with the Jacobian weight 1/g"""
    jacobian = 1.0 / profile.g_values
    total, vertical = 0.0, 0.0
    for state in sorted(modes, key=lambda item: item.k):
        v1, v2 = velocity_mode(state, profile, geometry)
        v1_sq = v1.grid.norm(v1.values, jacobian) ** 2
        v2_sq = v2.grid.norm(v2.values, jacobian) ** 2
        total += v1_sq + v2_sq
        vertical += v2_sq
    return float(np.sqrt(total)), float(np.sqrt(vertical))


######################################################################
#  F I T S
######################################################################
@dataclass(frozen=True)
class RateFit:
    """value ~ exp(intercept) * t^exponent"""

    exponent: float
    intercept: float
    r_squared: float
    window: Tuple[float, float]


@dataclass(frozen=True)
class LogFit:
    """value ~ alpha + beta log t"""

    alpha: float
    beta: float
    r_squared: float
    window: Tuple[float, float]


def _windowed(series, window) -> Tuple[np.ndarray, np.ndarray, Tuple[float, float]]:
    if len(series) == 0:
        raise InsufficientSamples("empty series")
    times, values = (np.asarray(column) for column in zip(*series))
    times = times.astype(float)
    if window is None:
        window = (times.max() / 10.0, times.max())
    mask = (times >= window[0]) & (times <= window[1]) & (times > 0)
    if np.count_nonzero(mask) < config.MIN_FIT_SAMPLES:
        raise InsufficientSamples(
            f"{np.count_nonzero(mask)} samples in window {window}, need {config.MIN_FIT_SAMPLES}"
        )
    return times[mask], values[mask], (float(window[0]), float(window[1]))


def _r_squared(observed: np.ndarray, fitted: np.ndarray) -> float:
    total = np.sum((observed - observed.mean()) ** 2)
    if total == 0:
        return 1.0
    return float(1.0 - np.sum((observed - fitted) ** 2) / total)


def fit_power_law(series, window=None) -> RateFit:
    """Least squares of log value against log t"""
    times, values, window = _windowed(series, window)
    values = np.real(values).astype(float)
    if np.any(values <= 0):
        raise NonPositiveValue("power-law fits need strictly positive values")
    log_t, log_v = np.log(times), np.log(values)
    exponent, intercept = np.polyfit(log_t, log_v, 1)
    r_squared = _r_squared(log_v, exponent * log_t + intercept)
    return RateFit(float(exponent), float(intercept), r_squared, window)


def fit_log_growth(series, window=None) -> LogFit:
    """Least squares of value against log t"""
    times, values, window = _windowed(series, window)
    values = np.real(values).astype(float)
    log_t = np.log(times)
    beta, alpha = np.polyfit(log_t, values, 1)
    r_squared = _r_squared(values, alpha + beta * log_t)
    return LogFit(float(alpha), float(beta), r_squared, window)


def fit_scattering_rate(residuals, window=None) -> Optional[RateFit]:
    """Power law of ||W(t) - W(T)||, or None when the residuals vanish identically

    The residual at the final time is zero by construction, so that sample is left out.
    """
    if len(residuals) == 0:
        raise InsufficientSamples("empty series")
    final_t = max(t for t, _ in residuals)
    series = [(t, value) for t, value in residuals if t < final_t]
    if not any(np.real(value) > 0 for _, value in series):
        return None
    return fit_power_law(series, window)


def derived_log_slope(profile: ShearProfile, omega0_wall: complex) -> float:
    """Slope of dy W(t, 0) against log t from integrating (i f / k) dy Phi at the wall"""
    return float(np.real(-profile.f_values[0] * omega0_wall / profile.g_values[0] ** 2))


def printed_log_slope(profile: ShearProfile, k: float, omega0_wall: complex) -> float:
    """f(0) omega0(0) / (k g(0)^2), the slope as originally stated"""
    return float(np.real(profile.f_values[0] * omega0_wall / (k * profile.g_values[0] ** 2)))


######################################################################
#  C O N S I S T E N C Y   T E R M
######################################################################
def consistency_term(
    modes: Sequence, profile: ShearProfile, geometry: ChannelGeometry, max_k: float = None
) -> float:
    """L2 norm of the quadratic term grad-perp Phi . grad W over output modes |k| <= max_k

    In sheared variables the pairing of Phi(k1) with W(k2) is
    (i g / k1^2) (k1 Phi W' - k2 Phi' W); the t-proportional parts of the two
    sheared gradients cancel identically and are left out.
    """
    ordered = sorted(modes, key=lambda item: item.k)
    if not ordered:
        return 0.0
    grid = ordered[0].w.grid
    streams = {}
    for state in ordered:
        phi = solve_phi(state.w, state.k, state.t, profile, geometry)
        streams[state.k] = (phi.values, grid.derivative(phi.values))
    slopes = {state.k: grid.derivative(state.w.values) for state in ordered}
    limit = max_k if max_k is not None else max(abs(state.k) for state in ordered)

    outputs: Dict[float, np.ndarray] = {}
    for first in ordered:
        phi, dphi = streams[first.k]
        for second in ordered:
            k = first.k + second.k
            if abs(k) > limit * (1.0 + 1.0e-12):
                continue
            pairing = (1j * profile.g_values / first.k**2) * (
                first.k * phi * slopes[second.k] - second.k * dphi * second.w.values
            )
            key = round(k, 12)
            outputs[key] = outputs.get(key, 0.0) + pairing
    jacobian = 1.0 / profile.g_values
    total = sum(grid.norm(outputs[key], jacobian) ** 2 for key in sorted(outputs))
    return float(np.sqrt(total))


######################################################################
#  S T A B I L I T Y   R E P O R T
######################################################################
@dataclass(frozen=True)
class Tolerances:
    """Thresholds that turn measurements into PASS/FAIL lines"""

    h2_ratio_max: float = 10.0
    monotonicity_rel_tol: float = 1.0e-8
    v_exponent: float = -1.0
    v_exponent_tol: float = 0.15
    v2_exponent: float = -2.0
    v2_exponent_tol: float = 0.2
    scatter_exponent_max: float = -0.8


@dataclass(frozen=True)
class MonotonicityStats:
    violations: int
    max_relative_violation: float


def monotonicity_stats(values: Sequence[float], tolerance: float) -> MonotonicityStats:
    """Counts steps with values[i+1] > values[i] (1 + tolerance)"""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return MonotonicityStats(0, 0.0)
    previous, current = values[:-1], values[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        relative = np.where(previous > 0, (current - previous) / previous, 0.0)
    violations = int(np.count_nonzero(current > previous * (1.0 + tolerance)))
    return MonotonicityStats(violations, float(max(0.0, relative.max())))


@dataclass
class StabilityReport:
    """Measured stability, damping and scattering quantities of one mode"""

    k: float
    ratios: Dict[str, float]
    monotonicity: Dict[str, MonotonicityStats]
    fits: Dict[str, Optional[RateFit]]
    damping_constant: Optional[float]
    tolerances: Tolerances = field(default_factory=Tolerances)
    notes: Dict[str, str] = field(default_factory=dict)

    def checks(self) -> List[Tuple[str, Optional[bool], str]]:
        """(name, verdict or None when not applicable, detail)"""
        tol = self.tolerances
        checks = [
            (
                "h2_ratio_bounded",
                self.ratios["h2"] <= tol.h2_ratio_max,
                f"sup H2 ratio {self.ratios['h2']:.6g} <= {tol.h2_ratio_max}",
            ),
            (
                "energy_monotone",
                self.monotonicity["I0"].violations == 0,
                f"I0 violations {self.monotonicity['I0'].violations}, "
                f"max rel {self.monotonicity['I0'].max_relative_violation:.3e}",
            ),
        ]
        for name, target, spread in (
            ("v_norm", tol.v_exponent, tol.v_exponent_tol),
            ("v2_norm", tol.v2_exponent, tol.v2_exponent_tol),
        ):
            fit = self.fits.get(name)
            if fit is None:
                checks.append((f"{name}_rate", None, "no decaying signal"))
            else:
                checks.append(
                    (
                        f"{name}_rate",
                        abs(fit.exponent - target) <= spread,
                        f"exponent {fit.exponent:.4f} (target {target} +- {spread}), r2 {fit.r_squared:.4f}",
                    )
                )
        scatter = self.fits.get("scatter_residual")
        if scatter is None:
            checks.append(("scattering_rate", None, self.notes.get("scatter_residual", "no residual signal")))
        else:
            checks.append(
                (
                    "scattering_rate",
                    scatter.exponent <= tol.scatter_exponent_max,
                    f"exponent {scatter.exponent:.4f} <= {tol.scatter_exponent_max}",
                )
            )
        return checks

    @property
    def passed(self) -> bool:
        return all(verdict is not False for _, verdict, _ in self.checks())

    def lines(self) -> List[str]:
        header = [
            f"mode k={self.k:.17g}",
            "  ratios " + " ".join(f"{key}={value:.6g}" for key, value in sorted(self.ratios.items())),
        ]
        if self.damping_constant is not None:
            header.append(f"  damping constant {self.damping_constant:.6g}")
        for name, verdict, detail in self.checks():
            label = "NA" if verdict is None else ("PASS" if verdict else "FAIL")
            header.append(f"  {label} {name}: {detail}")
        return header


def _safe_fit(fitter, series, window, name: str, notes: Dict[str, str]) -> Optional[RateFit]:
    try:
        return fitter(series, window)
    except (InsufficientSamples, NonPositiveValue) as error:
        logger.warning("No %s fit: %s", name, error)
        notes[name] = str(error)
        return None


def stability_report(
    history,
    omega0_norms: Dict[str, float],
    scatter_residuals: Sequence[Tuple[float, float]] = (),
    tolerances: Tolerances = None,
    window: Tuple[float, float] = None,
) -> StabilityReport:
    """Summarizes one mode's history; energy snapshots are read from records['energy']"""
    tolerances = tolerances or Tolerances()
    snapshots = history.series("energy")
    ratios = {}
    for key in ("l2", "h1", "h2"):
        reference = omega0_norms[key]
        sup = max(getattr(snapshot, key) for snapshot in snapshots)
        ratios[key] = sup / reference if reference > 0 else 1.0
    monotonicity = {
        key: monotonicity_stats([getattr(s, key) for s in snapshots], tolerances.monotonicity_rel_tol)
        for key in ("I0", "I1", "I2", "E2")
    }
    notes: Dict[str, str] = {}
    fits = {
        name: _safe_fit(fit_power_law, [(s.t, getattr(s, name)) for s in snapshots], window, name, notes)
        for name in ("v_norm", "v2_norm")
    }
    fits["scatter_residual"] = _safe_fit(
        fit_scattering_rate, list(scatter_residuals), window, "scatter_residual", notes
    )

    damping_constant = None
    if fits["v2_norm"] is not None:
        low, high = fits["v2_norm"].window
        sup_h2 = max(s.h2 for s in snapshots)
        inside = [s for s in snapshots if low <= s.t <= high]
        if sup_h2 > 0 and inside:
            damping_constant = max(s.v2_norm * s.t**2 for s in inside) / sup_h2
    return StabilityReport(history.k, ratios, monotonicity, fits, damping_constant, tolerances, notes)
