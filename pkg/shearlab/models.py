"""
Models for run configurations

A RunConfig is the validated form of a scenario file. It serializes itself
to a dictionary and deserializes (and validates) itself from one.
"""
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, List, Optional, Tuple

import numpy as np

from shearlab import config
from shearlab.diagnostics import Tolerances
from shearlab.energy import WeightSpec, WeightVariant
from shearlab.evolution import ModeState
from shearlab.elliptic import ComplexField
from shearlab.exceptions import ConfigParseError, DataValidationError
from shearlab.profiles import (
    ChannelGeometry,
    GeometryKind,
    Grid,
    ShearFlow,
    ShearProfile,
    WavenumberSet,
    build_profile,
)

logger = logging.getLogger("flask.app")

PROFILE_KINDS = ("couette", "affine", "sine_perturbed", "expression", "constant_coefficient")
INITIAL_FAMILIES = ("sine", "cosine", "gaussian", "polynomial")
WALL_TOLERANCE = 1.0e-12


######################################################################
#  S E C T I O N S
######################################################################
@dataclass
class ProfileSpec:
    """Which shear flow to build; unused parameters keep their defaults"""

    kind: str = "couette"
    amplitude: float = 0.0
    wavenumber: float = 1.0
    phase: float = 0.0
    slope: float = 1.0
    u: Optional[str] = None
    du: Optional[str] = None
    d2u: Optional[str] = None
    d3u: Optional[str] = None
    domain: Optional[List[float]] = None


@dataclass
class GeometrySpec:
    kind: str = "finite"
    half_width: Optional[float] = None


@dataclass
class InitialSpec:
    """Initial vorticity family evaluated in the physical coordinate y"""

    family: str = "sine"
    amplitude: float = 1.0
    modes: List[int] = field(default_factory=lambda: [1])
    center: float = 0.0
    width: float = 1.0
    coefficients: List[float] = field(default_factory=lambda: [0.0, 1.0])
    project: bool = False
    zero_dirichlet: bool = False
    random_phase: bool = False


@dataclass
class WeightSection:
    C: float = config.DEFAULT_WEIGHT_C
    beta: float = config.DEFAULT_BETA
    gamma: float = config.DEFAULT_GAMMA
    variant: str = WeightVariant.L2.value


@dataclass
class FitSection:
    """Fit windows; None selects [T/10, T]"""

    window: Optional[List[float]] = None
    log_window: Optional[List[float]] = None


def _section(cls, data, name):
    """Builds a section dataclass from a dictionary, rejecting unknown keys"""
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise DataValidationError(f"Invalid RunConfig: {name} must be an object")
    known = {item.name for item in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise DataValidationError(f"Invalid RunConfig: unknown keys in {name}: {sorted(unknown)}")
    return cls(**data)


def _window(value, name) -> Optional[Tuple[float, float]]:
    if value is None:
        return None
    if len(value) != 2 or not float(value[0]) < float(value[1]):
        raise DataValidationError(f"Invalid RunConfig: {name} must be [t_min, t_max] with t_min < t_max")
    return (float(value[0]), float(value[1]))


######################################################################
#  R U N   C O N F I G   M O D E L
######################################################################
class RunConfig:  # pylint: disable=too-many-instance-attributes
    """
    Class that represents a scenario
    """

    def __init__(self):
        self.name = "unnamed"
        self.profile = ProfileSpec()
        self.grid = 512
        self.geometry = GeometrySpec()
        self.period_L = 1.0
        self.max_mode_K = 1
        self.initial = InitialSpec()
        self.T = 10.0
        self.dt = config.DEFAULT_DT
        self.stride = config.DEFAULT_STRIDE
        self.weight = WeightSection()
        self.fits = FitSection()
        self.tolerances = Tolerances()
        self.consistency = False
        self.output_dir = None
        self.seed = 0

    def __repr__(self):
        return f"<RunConfig {self.name} profile=[{self.profile.kind}] geometry=[{self.geometry.kind}]>"

    def serialize(self) -> dict:
        """Serializes a RunConfig into a dictionary"""
        return {
            "name": self.name,
            "profile": asdict(self.profile),
            "grid": {"n_points": self.grid},
            "geometry": asdict(self.geometry),
            "period_L": self.period_L,
            "max_mode_K": self.max_mode_K,
            "initial": asdict(self.initial),
            "T": self.T,
            "dt": self.dt,
            "stride": self.stride,
            "weight": asdict(self.weight),
            "fits": asdict(self.fits),
            "tolerances": asdict(self.tolerances),
            "consistency": self.consistency,
            "output_dir": self.output_dir,
            "seed": self.seed,
        }

    def deserialize(self, data: dict):
        """
        Deserializes a RunConfig from a dictionary

        Args:
            data (dict): A dictionary containing the scenario
        """
        try:
            unknown = set(data) - set(RunConfig().serialize())
            if unknown:
                raise DataValidationError(f"Invalid RunConfig: unknown keys {sorted(unknown)}")
            self.name = str(data.get("name", "unnamed"))
            self.profile = _section(ProfileSpec, data["profile"], "profile")
            grid = data.get("grid") or {}
            if set(grid) - {"n_points"}:
                raise DataValidationError(f"Invalid RunConfig: unknown keys in grid: {sorted(set(grid) - {'n_points'})}")
            self.grid = int(grid.get("n_points", 512))
            self.geometry = _section(GeometrySpec, data.get("geometry"), "geometry")
            self.period_L = float(data.get("period_L", 1.0))
            self.max_mode_K = int(data.get("max_mode_K", 1))
            self.initial = _section(InitialSpec, data.get("initial"), "initial")
            self.T = float(data["T"])
            self.dt = float(data.get("dt", config.DEFAULT_DT))
            self.stride = int(data.get("stride", config.DEFAULT_STRIDE))
            self.weight = _section(WeightSection, data.get("weight"), "weight")
            self.fits = _section(FitSection, data.get("fits"), "fits")
            self.tolerances = _section(Tolerances, data.get("tolerances"), "tolerances")
            self.consistency = bool(data.get("consistency", False))
            self.output_dir = data.get("output_dir")
            self.seed = int(data.get("seed", 0))
        except KeyError as error:
            raise DataValidationError("Invalid RunConfig: missing " + error.args[0]) from error
        except (TypeError, ValueError) as error:
            raise DataValidationError(
                "Invalid RunConfig: scenario contained bad or no data - " + str(error)
            ) from error
        self.validate()
        return self

    ##################################################
    # VALIDATION
    ##################################################

    def validate(self):
        """Checks every gate that can be decided before a run"""
        if self.profile.kind not in PROFILE_KINDS:
            raise DataValidationError(f"Invalid RunConfig: unknown profile kind {self.profile.kind!r}")
        if self.initial.family not in INITIAL_FAMILIES:
            raise DataValidationError(f"Invalid RunConfig: unknown initial family {self.initial.family!r}")
        if not self.T > 0:
            raise DataValidationError(f"Invalid RunConfig: T must be positive, got {self.T}")
        if not self.dt > 0:
            raise DataValidationError(f"Invalid RunConfig: dt must be positive, got {self.dt}")
        if abs(round(self.T / self.dt) * self.dt - self.T) > 1.0e-9 * self.T:
            raise DataValidationError(f"Invalid RunConfig: dt={self.dt} does not divide T={self.T}")
        if self.stride < 1:
            raise DataValidationError(f"Invalid RunConfig: stride must be >= 1, got {self.stride}")
        if self.initial.family == "gaussian" and not self.initial.width > 0:
            raise DataValidationError("Invalid RunConfig: gaussian width must be positive")
        _window(self.fits.window, "fits.window")
        _window(self.fits.log_window, "fits.log_window")
        self.build_weight()
        self.build_wavenumbers()
        geometry = self.build_geometry()
        geometry.grid(self.grid)
        if self.profile.kind == "expression" and not (self.profile.u and self.profile.du and self.profile.d2u):
            raise DataValidationError("Invalid RunConfig: expression profiles need u, du and d2u")
        if self.initial.zero_dirichlet and geometry.has_walls and not self.initial.project:
            walls = self.initial_values(np.array([0.0, 1.0]))
            if np.any(np.abs(walls) > WALL_TOLERANCE):
                raise DataValidationError(
                    f"Invalid RunConfig: zero_dirichlet is set but the {self.initial.family} "
                    f"family has wall values {walls.tolist()}"
                )

    ##################################################
    # BUILDERS
    ##################################################

    def build_weight(self) -> WeightSpec:
        try:
            variant = WeightVariant(self.weight.variant)
        except ValueError as error:
            raise DataValidationError(f"Invalid RunConfig: unknown weight variant {self.weight.variant!r}") from error
        return WeightSpec(self.weight.C, self.weight.beta, self.weight.gamma, variant)

    def build_wavenumbers(self) -> WavenumberSet:
        return WavenumberSet(self.period_L, self.max_mode_K)

    def build_geometry(self) -> ChannelGeometry:
        try:
            kind = GeometryKind(self.geometry.kind)
        except ValueError as error:
            raise DataValidationError(f"Invalid RunConfig: unknown geometry kind {self.geometry.kind!r}") from error
        return ChannelGeometry(kind, self.geometry.half_width)

    def build_grid(self) -> Grid:
        return self.build_geometry().grid(self.grid)

    def physical_domain(self) -> Tuple[float, float]:
        """Interval in y whose image under U covers the z-range of the geometry"""
        spec = self.profile
        if spec.domain is not None:
            return (float(spec.domain[0]), float(spec.domain[1]))
        low, high = self.build_geometry().z_range
        if spec.kind in ("couette", "affine"):
            slope = 1.0 if spec.kind == "couette" else spec.slope
            return (low / slope, high / slope)
        if spec.kind == "sine_perturbed" and not self.build_geometry().has_walls:
            margin = 2.0 * abs(spec.amplitude)
            return (low - margin, high + margin)
        return (low, high)

    def build_flow(self) -> Optional[ShearFlow]:
        """The ShearFlow descriptor, or None for the constant-coefficient surrogate"""
        spec = self.profile
        domain = self.physical_domain()
        if spec.kind == "constant_coefficient":
            return None
        if spec.kind == "couette":
            return ShearFlow.couette(domain)
        if spec.kind == "affine":
            return ShearFlow.affine(spec.slope, domain)
        if spec.kind == "sine_perturbed":
            return ShearFlow.sine_perturbed(spec.amplitude, spec.wavenumber, spec.phase, domain)
        return ShearFlow.expression(spec.u, spec.du, spec.d2u, spec.d3u, domain)

    def build_profile(self) -> ShearProfile:
        grid = self.build_grid()
        flow = self.build_flow()
        if flow is None:
            return ShearProfile.constant_coefficient(self.profile.amplitude, grid)
        return build_profile(flow, grid)

    def initial_values(self, y: np.ndarray) -> np.ndarray:
        """Real initial vorticity of the configured family at physical points y"""
        spec = self.initial
        if spec.family == "sine":
            values = np.prod([np.sin(m * np.pi * y) for m in spec.modes], axis=0)
        elif spec.family == "cosine":
            values = np.prod([np.cos(m * np.pi * y) for m in spec.modes], axis=0)
        elif spec.family == "gaussian":
            values = np.exp(-0.5 * ((y - spec.center) / spec.width) ** 2)
        else:
            values = np.polynomial.polynomial.polyval(y, spec.coefficients)
        return spec.amplitude * np.asarray(values, dtype=float)

    def build_initial_states(self, profile: ShearProfile) -> List[ModeState]:
        """One ModeState per wavenumber; mode -k carries the conjugate of mode +k"""
        geometry = self.build_geometry()
        grid = profile.grid
        y = profile.y_nodes
        values = self.initial_values(y)
        if self.initial.project and geometry.has_walls:
            values = values - (values[0] + (values[-1] - values[0]) * (y - y[0]) / (y[-1] - y[0]))
        if not geometry.supports(values, grid):
            raise DataValidationError(
                "Invalid RunConfig: initial data must vanish outside the inner half of [-Y, Y]"
            )
        rng = np.random.default_rng(self.seed)
        states = []
        for k in sorted(k for k in self.build_wavenumbers().modes if k > 0):
            phase = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi)) if self.initial.random_phase else 1.0
            data = phase * values.astype(np.complex128)
            states.append(ModeState(k, 0.0, ComplexField(data, grid)))
            states.append(ModeState(-k, 0.0, ComplexField(np.conj(data), grid)))
        return sorted(states, key=lambda state: state.k)


######################################################################
#  L O A D I N G
######################################################################
def parse_override(text: str) -> Tuple[List[str], object]:
    """Splits 'a.b=value'; the value is JSON when it parses, a string otherwise"""
    key, separator, raw = text.partition("=")
    if not separator or not key.strip():
        raise ConfigParseError(f"override {text!r} is not of the form key=value", key=key or None)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def apply_overrides(data: dict, overrides: Iterable[str]) -> dict:
    """Writes dotted overrides into a nested dictionary"""
    for text in overrides:
        path, value = parse_override(text)
        node = data
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigParseError(f"override {text!r} descends into a scalar", key=part)
            node = child
        node[path[-1]] = value
    return data


def load_config(path: str, overrides: Iterable[str] = ()) -> RunConfig:
    """Reads a JSON scenario file, applies overrides and validates it"""
    logger.info("Loading scenario %s", path)
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as error:
        raise ConfigParseError(f"{path}: {error.msg}", line=error.lineno) from error
    except OSError as error:
        raise ConfigParseError(f"{path}: {error.strerror}") from error
    if not isinstance(data, dict):
        raise ConfigParseError(f"{path}: top level must be an object", line=1)
    return RunConfig().deserialize(apply_overrides(data, overrides))
