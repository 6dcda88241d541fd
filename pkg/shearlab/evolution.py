"""
Time evolution of the scattered vorticity

Each x-mode evolves independently under dt W = (i f / k) Phi[W] with a
fixed-step classical RK4 integrator. The loop also accumulates the
Duhamel integral and, for channels with walls, the wall traces of dy W.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from shearlab.elliptic import ComplexField, boundary_dy_phi, homogeneous_pair, solve_phi
from shearlab.exceptions import DataValidationError, NonFiniteState
from shearlab.profiles import ChannelGeometry, ShearProfile

logger = logging.getLogger("flask.app")

Observer = Callable[["ModeState"], Any]


######################################################################
#  S T A T E   A N D   H I S T O R Y
######################################################################
@dataclass(frozen=True)
class ModeState:
    """Scattered vorticity of one x-mode at time t"""

    k: float
    t: float
    w: ComplexField

    def __post_init__(self):
        if self.k == 0:
            raise DataValidationError("mode wavenumber k must be nonzero")

    def advanced(self, values: np.ndarray, t: float) -> "ModeState":
        return ModeState(self.k, t, ComplexField(values, self.w.grid))


@dataclass
class Snapshot:
    """Sampled state at one observation time"""

    t: float
    w: np.ndarray
    records: Dict[str, Any] = field(default_factory=dict)
    wall_traces: Optional[Tuple[complex, complex]] = None


@dataclass
class EvolutionHistory:
    """Observation snapshots of a single mode plus the Duhamel accumulator"""

    k: float
    snapshots: List[Snapshot]
    duhamel_partial: ComplexField
    boundary_drift: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return np.array([snapshot.t for snapshot in self.snapshots])

    @property
    def initial(self) -> ModeState:
        return self.state_at(0)

    @property
    def final(self) -> ModeState:
        return self.state_at(-1)

    def state_at(self, index: int) -> ModeState:
        snapshot = self.snapshots[index]
        return ModeState(self.k, snapshot.t, ComplexField(snapshot.w, self.duhamel_partial.grid))

    def series(self, name: str) -> List[Any]:
        return [snapshot.records[name] for snapshot in self.snapshots]


######################################################################
#  R I G H T - H A N D   S I D E   A N D   S T E P P E R
######################################################################
def rhs(state: ModeState, profile: ShearProfile, geometry: ChannelGeometry) -> ComplexField:
    """(i f / k) Phi at the state's clock"""
    if profile.is_shear_free:
        return ComplexField.zeros(state.w.grid)
    phi = solve_phi(state.w, state.k, state.t, profile, geometry)
    return ComplexField(1j * profile.f_values / state.k * phi.values, state.w.grid)


def _rk4_values(state, dt, profile, geometry, first_slope=None) -> np.ndarray:
    def slope(values, t):
        return rhs(state.advanced(values, t), profile, geometry).values

    w, t = state.w.values, state.t
    k1 = first_slope if first_slope is not None else slope(w, t)
    k2 = slope(w + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = slope(w + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = slope(w + dt * k3, t + dt)
    return w + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_rk4(
    state: ModeState, dt: float, profile: ShearProfile, geometry: ChannelGeometry
) -> ModeState:
    """One classical RK4 step; wall values are pinned to their pre-step values"""
    if not dt > 0:
        raise DataValidationError(f"time step must be positive, got {dt}")
    values = _rk4_values(state, dt, profile, geometry)
    if geometry.has_walls:
        values[0], values[-1] = state.w.values[0], state.w.values[-1]
    return state.advanced(values, state.t + dt)


def wall_trace_rate(state: ModeState, profile: ShearProfile) -> np.ndarray:
    """d/dt of dy W at both walls: (i f / k) dy Phi, with f Phi' the only surviving term"""
    pair = homogeneous_pair(state.k, state.t, profile)
    dy_phi = boundary_dy_phi(state.w, state.k, profile, pair, quadrature="filon")
    f = profile.f_values
    return np.array([1j * f[0] / state.k * dy_phi[0], 1j * f[-1] / state.k * dy_phi[1]])


######################################################################
#  E V O L U T I O N   L O O P
######################################################################
def evolve(
    initial: ModeState,
    T: float,
    dt: float,
    profile: ShearProfile,
    geometry: ChannelGeometry,
    observers: Optional[Mapping[str, Observer]] = None,
    stride: int = 1,
) -> EvolutionHistory:
    """Fixed-step RK4 from initial.t to initial.t + T"""
    observers = observers or {}
    if T < 0 or not dt > 0 or stride < 1:
        raise DataValidationError(f"invalid horizon T={T}, dt={dt}, stride={stride}")
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1.0e-9 * max(1.0, T):
        raise DataValidationError(f"dt={dt} does not divide the horizon T={T}")
    if not initial.w.is_finite():
        raise NonFiniteState("initial vorticity is not finite", t=initial.t)

    grid = initial.w.grid
    walls = geometry.has_walls
    pinned = initial.w.values[[0, -1]].copy()
    traces = rates = None
    if walls:
        traces = grid.derivative(initial.w.values)[[0, -1]].astype(np.complex128)
        rates = wall_trace_rate(initial, profile)

    def observe(state: ModeState) -> Snapshot:
        records = {name: observer(state) for name, observer in observers.items()}
        wall = tuple(complex(value) for value in traces) if walls else None
        return Snapshot(state.t, state.w.values.copy(), records, wall)

    logger.debug("Evolving k=%s over T=%s with dt=%s (%d steps)", initial.k, T, dt, n_steps)
    state = initial
    snapshots = [observe(state)]
    slope = rhs(state, profile, geometry).values
    duhamel = np.zeros(grid.n_points, dtype=np.complex128)
    drift = 0.0

    for step in range(1, n_steps + 1):
        values = _rk4_values(state, dt, profile, geometry, first_slope=slope)
        if not np.all(np.isfinite(values)):
            t_fail = initial.t + step * dt
            raise NonFiniteState(f"vorticity became non-finite at t={t_fail:.6g}", t=t_fail)
        if walls:
            drift = max(drift, float(np.max(np.abs(values[[0, -1]] - pinned))))
            values[0], values[-1] = pinned
        state = initial.advanced(values, initial.t + step * dt)
        next_slope = rhs(state, profile, geometry).values
        duhamel += 0.5 * dt * (slope + next_slope)
        slope = next_slope
        if walls:
            next_rates = wall_trace_rate(state, profile)
            traces = traces + 0.5 * dt * (rates + next_rates)
            rates = next_rates
        if step % stride == 0 or step == n_steps:
            snapshots.append(observe(state))

    return EvolutionHistory(
        k=initial.k,
        snapshots=snapshots,
        duhamel_partial=ComplexField(duhamel, grid),
        boundary_drift=drift,
    )


def evolve_modes(
    states: Sequence[ModeState],
    T: float,
    dt: float,
    profile: ShearProfile,
    geometry: ChannelGeometry,
    observers: Optional[Callable[[ModeState], Mapping[str, Observer]]] = None,
    stride: int = 1,
    threads: int = 1,
) -> List[EvolutionHistory]:
    """Evolves independent modes on a worker pool; results come back in sorted k order"""
    ordered = sorted(states, key=lambda state: state.k)

    def run(state: ModeState) -> EvolutionHistory:
        mode_observers = observers(state) if observers else None
        return evolve(state, T, dt, profile, geometry, mode_observers, stride)

    if threads <= 1 or len(ordered) == 1:
        return [run(state) for state in ordered]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(run, ordered))


def scattering_profile(history: EvolutionHistory) -> Tuple[ComplexField, List[Tuple[float, float]]]:
    """W(T) as the scattering-profile estimate and the residuals ||W(t) - W(T)||"""
    final = history.final.w
    residuals = [
        (snapshot.t, final.grid.norm(snapshot.w - final.values)) for snapshot in history.snapshots
    ]
    return final, residuals
