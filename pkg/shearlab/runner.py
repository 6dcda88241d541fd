"""
Run orchestration

Evolves every mode of a scenario, writes one CSV per mode, the PASS/FAIL
summary and a manifest. All reductions happen in sorted k order so that the
artifacts do not depend on the worker count.
"""
import functools
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from shearlab import config as settings
from shearlab.common import status
from shearlab.common.tables import read_table, write_manifest, write_table
from shearlab.diagnostics import (
    RateFit,
    StabilityReport,
    consistency_term,
    derived_log_slope,
    fit_log_growth,
    fit_power_law,
    fit_scattering_rate,
    monotonicity_stats,
    printed_log_slope,
    stability_report,
)
from shearlab.energy import energy_suite
from shearlab.evolution import EvolutionHistory, evolve, evolve_modes, scattering_profile
from shearlab.exceptions import LabError
from shearlab.models import RunConfig
from shearlab.oracle import cc_propagator, couette_velocity_norms, gaussian_spectrum
from shearlab.profiles import smallness_parameter

logger = logging.getLogger("flask.app")

MODE_COLUMNS = [
    "t",
    "l2_norm",
    "h1_norm",
    "h2_norm",
    "I0",
    "I1",
    "I2",
    "E2",
    "v_norm",
    "v2_norm",
    "dyW_at_0",
    "dyW_at_1",
    "dyW_at_0_im",
    "dyW_at_1_im",
    "dyW_fd_at_0",
    "dyW_fd_at_1",
    "scatter_residual",
]


@dataclass
class ModeResult:
    """Everything measured for one mode"""

    k: float
    history: EvolutionHistory
    report: StabilityReport
    duhamel_mismatch: float
    table: Path


@dataclass
class RunResult:
    exit_code: int
    out_dir: Path
    modes: List[ModeResult]
    summary: List[str]
    artifacts: List[Path] = field(default_factory=list)
    consistency_fit: Optional[RateFit] = None

    @property
    def passed(self) -> bool:
        return all(mode.report.passed for mode in self.modes)


def mode_filename(k: float) -> str:
    return f"mode_k{k:.6g}.csv"


def resolve_out_dir(config: RunConfig, out_dir=None) -> Path:
    if out_dir:
        return Path(out_dir)
    if config.output_dir:
        return Path(config.output_dir)
    return Path(settings.OUTPUT_DIR) / config.name


######################################################################
#  S I M U L A T E
######################################################################
def _mode_rows(history: EvolutionHistory, residuals: Sequence[Tuple[float, float]]) -> List[Dict]:
    rows = []
    for snapshot, (_, residual) in zip(history.snapshots, residuals):
        energy = snapshot.records["energy"].as_row()
        traces = snapshot.wall_traces or (complex(np.nan, np.nan),) * 2
        rows.append(
            {
                "t": snapshot.t,
                "l2_norm": energy["l2"],
                "h1_norm": energy["h1"],
                "h2_norm": energy["h2"],
                "I0": energy["I0"],
                "I1": energy["I1"],
                "I2": energy["I2"],
                "E2": energy["E2"],
                "v_norm": energy["v_norm"],
                "v2_norm": energy["v2_norm"],
                "dyW_at_0": traces[0].real,
                "dyW_at_1": traces[1].real,
                "dyW_at_0_im": traces[0].imag,
                "dyW_at_1_im": traces[1].imag,
                "dyW_fd_at_0": energy.get("dyW_fd_at_0", np.nan),
                "dyW_fd_at_1": energy.get("dyW_fd_at_1", np.nan),
                "scatter_residual": residual,
            }
        )
    return rows


def _duhamel_mismatch(history: EvolutionHistory) -> float:
    """||omega0 + int_0^T rhs - W(T)|| / ||W(T)||"""
    initial, final = history.initial.w, history.final.w
    scale = final.norm()
    gap = (initial + history.duhamel_partial - final).norm()
    return gap / scale if scale > 0 else gap


def _consistency_series(histories, profile, geometry, max_k) -> List[Dict]:
    rows = []
    for index in range(len(histories[0].snapshots)):
        modes = [history.state_at(index) for history in histories]
        rows.append(
            {"t": modes[0].t, "consistency": consistency_term(modes, profile, geometry, max_k)}
        )
    return rows


def _header(config: RunConfig, profile, geometry) -> List[str]:
    smallness = " ".join(
        f"s={s}:{smallness_parameter(profile, config.period_L, s):.6g}" for s in range(4)
    )
    return [
        f"scenario {config.name}",
        f"profile {profile.label} geometry {geometry.kind.value} n_points {config.grid}",
        f"T {config.T:.6g} dt {config.dt:.6g} stride {config.stride}",
        f"smallness {smallness}",
    ]


def run(config: RunConfig, out_dir=None, threads: int = None, strict: bool = False) -> RunResult:
    """Evolves all modes of a scenario and writes its artifacts"""
    out = resolve_out_dir(config, out_dir)
    out.mkdir(parents=True, exist_ok=True)
    threads = threads or settings.THREADS
    profile = config.build_profile()
    geometry = config.build_geometry()
    weight = config.build_weight()
    states = config.build_initial_states(profile)
    window = tuple(config.fits.window) if config.fits.window else None
    logger.info("Running %s: %d modes on %d threads", config.name, len(states), threads)

    def observers(_state):
        return {"energy": functools.partial(energy_suite, profile=profile, geometry=geometry, spec=weight)}

    histories = evolve_modes(
        states, config.T, config.dt, profile, geometry, observers, config.stride, threads
    )

    summary = _header(config, profile, geometry)
    results, artifacts = [], []
    for history in histories:
        _, residuals = scattering_profile(history)
        first = history.series("energy")[0]
        norms = {"l2": first.l2, "h1": first.h1, "h2": first.h2}
        report = stability_report(history, norms, residuals, config.tolerances, window)
        table = write_table(_mode_rows(history, residuals), out / mode_filename(history.k), MODE_COLUMNS)
        mismatch = _duhamel_mismatch(history)
        results.append(ModeResult(history.k, history, report, mismatch, table))
        artifacts.append(table)
        summary.extend(report.lines())
        summary.append(f"  boundary drift {history.boundary_drift:.3e}")
        summary.append(f"  duhamel mismatch {mismatch:.3e}")

    consistency_fit = None
    if config.consistency:
        max_k = max(state.k for state in states)
        rows = _consistency_series(histories, profile, geometry, max_k)
        artifacts.append(write_table(rows, out / "consistency.csv", ["t", "consistency"]))
        try:
            consistency_fit = fit_power_law([(row["t"], row["consistency"]) for row in rows], window)
            summary.append(
                f"consistency exponent {consistency_fit.exponent:.4f} r2 {consistency_fit.r_squared:.4f}"
            )
        except LabError as error:
            summary.append(f"consistency NA ({error})")

    passed = all(result.report.passed for result in results)
    summary.append(f"OVERALL {'PASS' if passed else 'FAIL'}")
    summary_path = out / "summary.txt"
    summary_path.write_text("\n".join(summary) + "\n", encoding="utf-8")
    artifacts.append(summary_path)
    write_manifest(out / "manifest.json", config.serialize(), artifacts, settings.VERSION)

    code = status.EXIT_CHECKS_FAILED if strict and not passed else status.EXIT_OK
    return RunResult(code, out, results, summary, artifacts, consistency_fit)


######################################################################
#  B O U N D A R Y   B L O W - U P   P R O B E
######################################################################
@dataclass
class ProbeResult:
    exit_code: int
    rows: List[Dict]
    lines: List[str]
    passed: bool


def blowup_probe(
    config: RunConfig, horizons: Sequence[float] = (25.0, 50.0, 100.0), out_dir=None, strict: bool = False
) -> ProbeResult:
    """Log-growth of dy W at the lower wall and H2 growth across horizons

    A single run to the largest horizon is truncated at each smaller one.
    """
    horizons = sorted(float(value) for value in horizons)
    profile = config.build_profile()
    geometry = config.build_geometry()
    if not geometry.has_walls:
        raise LabError("the blow-up check needs a channel with walls")
    state = min(
        (item for item in config.build_initial_states(profile) if item.k > 0), key=lambda item: item.k
    )
    grid = state.w.grid
    wall_value = complex(state.w.values[0])
    derived = derived_log_slope(profile, wall_value)
    printed = printed_log_slope(profile, state.k, wall_value)
    h1_initial = float(np.hypot(grid.norm(state.w.values), grid.norm(grid.derivative(state.w.values))))

    def h2_norm(mode):
        values = mode.w.values
        parts = [grid.norm(values), grid.norm(grid.derivative(values)), grid.norm(grid.derivative(values, 2))]
        return float(np.sqrt(sum(part**2 for part in parts)))

    history = evolve(state, horizons[-1], config.dt, profile, geometry, {"h2": h2_norm}, config.stride)
    times = history.times
    traces = np.array([snapshot.wall_traces[0].real for snapshot in history.snapshots])
    h2 = np.array(history.series("h2"))

    rows, lines = [], [f"blow-up k={state.k:.6g} omega0(0)={wall_value.real:.6g}"]
    zero_trace = abs(wall_value) <= 1.0e-12
    passed = True
    for horizon in horizons:
        inside = times <= horizon + 1.0e-9
        window = tuple(config.fits.log_window) if config.fits.log_window else (horizon / 20.0, horizon)
        fit = fit_log_growth(list(zip(times[inside], traces[inside])), window)
        ratio = float(h2[inside].max() / h2[0]) if h2[0] > 0 else 1.0
        if zero_trace:
            verdict = abs(fit.beta) < 0.05 * h1_initial
            detail = f"|beta| {abs(fit.beta):.4g} < {0.05 * h1_initial:.4g}"
        else:
            verdict = fit.r_squared >= 0.99 and abs(fit.beta - derived) <= 0.25 * abs(derived)
            detail = f"beta {fit.beta:.6g} vs derived {derived:.6g}, r2 {fit.r_squared:.4f}"
        passed = passed and verdict
        lines.append(f"  {'PASS' if verdict else 'FAIL'} log_growth T={horizon:.6g}: {detail}")
        rows.append(
            {
                "T": horizon,
                "alpha": fit.alpha,
                "beta": fit.beta,
                "r_squared": fit.r_squared,
                "derived_slope": derived,
                "printed_slope": printed,
                "h2_ratio": ratio,
            }
        )
    if not zero_trace and len(rows) > 1:
        growing = all(later["h2_ratio"] > earlier["h2_ratio"] for earlier, later in zip(rows, rows[1:]))
        passed = passed and growing
        ratios = ", ".join(f"{row['h2_ratio']:.6g}" for row in rows)
        lines.append(f"  {'PASS' if growing else 'FAIL'} h2_growth: ratios {ratios}")
    lines.append(f"OVERALL {'PASS' if passed else 'FAIL'}")
    if out_dir:
        out = Path(out_dir)
        write_table(rows, out / "blowup.csv", list(rows[0]))
        (out / "blowup.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    code = status.EXIT_CHECKS_FAILED if strict and not passed else status.EXIT_OK
    return ProbeResult(code, rows, lines, passed)


######################################################################
#  P O S T - P R O C E S S I N G
######################################################################
def _fit_row(k, quantity, series, window, fitter=fit_power_law) -> Dict:
    row = {"k": k, "quantity": quantity}
    try:
        fit = fitter(series, window)
    except LabError:
        fit = None
    if fit is None:
        row.update(exponent=np.nan, intercept=np.nan, r_squared=np.nan, t_min=np.nan, t_max=np.nan)
    else:
        row.update(
            exponent=fit.exponent, intercept=fit.intercept, r_squared=fit.r_squared,
            t_min=fit.window[0], t_max=fit.window[1],
        )
    return row


def decay_report(run_dir, window=None) -> List[Dict]:
    """Power-law fits of v_norm, v2_norm and scatter_residual for every mode CSV of a run"""
    run_dir = Path(run_dir)
    tables = []
    for path in run_dir.glob("mode_k*.csv"):
        k = float(path.stem[len("mode_k"):])
        tables.append((k, read_table(path)))
    if not tables:
        raise LabError(f"no mode_k*.csv files in {run_dir}")
    rows = []
    for k, frame in sorted(tables, key=lambda item: item[0]):
        for quantity in ("v_norm", "v2_norm", "scatter_residual"):
            series = list(zip(frame["t"], frame[quantity]))
            fitter = fit_scattering_rate if quantity == "scatter_residual" else fit_power_law
            rows.append(_fit_row(k, quantity, series, window, fitter))
    write_table(rows, run_dir / "decay_report.csv", list(rows[0]))
    return rows


def energy_report(csv_path, tolerance: float = settings.MONOTONICITY_FLOOR) -> List[Dict]:
    """Monotonicity-violation counts of the weighted energies in a mode CSV"""
    frame = read_table(csv_path)
    rows = []
    for quantity in ("I0", "I1", "I2", "E2"):
        stats = monotonicity_stats(frame[quantity].to_numpy(), tolerance)
        rows.append(
            {
                "quantity": quantity,
                "violations": stats.violations,
                "max_relative_violation": stats.max_relative_violation,
            }
        )
    squared = frame["l2_norm"].to_numpy() ** 2
    positive = squared > 0
    if np.any(positive):
        ratio = frame["I0"].to_numpy()[positive] / squared[positive]
        rows.append({"quantity": "I0/l2^2 min", "violations": 0, "max_relative_violation": float(ratio.min())})
        rows.append({"quantity": "I0/l2^2 max", "violations": 0, "max_relative_violation": float(ratio.max())})
    return rows


def oracle_tables(
    k: float = 1.0,
    width: float = 1.0,
    t_values: Sequence[float] = tuple(np.linspace(1.0, 100.0, 200)),
    cc_strength: float = 0.1,
    eta_values: Sequence[float] = tuple(np.linspace(-5.0, 5.0, 11)),
) -> Tuple[List[Dict], List[Dict], Dict[str, RateFit]]:
    """Couette velocity decay curves, their fits, and constant-coefficient propagator values"""
    spectrum = gaussian_spectrum(width)
    eta_grid = np.linspace(-12.0 * width, 12.0 * width, 4001)
    decay = []
    for t in t_values:
        v1, v2 = couette_velocity_norms(spectrum, k, float(t), eta_grid)
        decay.append({"t": float(t), "v1_norm": v1, "v2_norm": v2})
    window = (10.0, float(max(t_values)))
    fits = {
        name: fit_power_law([(row["t"], row[name]) for row in decay], window)
        for name in ("v1_norm", "v2_norm")
    }
    constant = 1j * cc_strength / k
    propagator = []
    for t in t_values[:: max(1, len(t_values) // 10)]:
        values = cc_propagator(constant, k, np.asarray(eta_values), float(t))
        for eta, value in zip(eta_values, values):
            propagator.append(
                {"k": k, "eta": float(eta), "t": float(t), "re": value.real, "im": value.imag, "abs": abs(value)}
            )
    return decay, propagator, fits
