"""Run configuration: dataclasses per section, strict JSON parsing and provenance."""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ahres import __version__
from ahres.absorption import AbsorptionConfig
from ahres.base import ConfigError
from ahres.geometry import EvenMetricModel
from ahres.utils import config_hash

logger = logging.getLogger(__name__)

MODEL_TYPES = ("hyperbolic-plane", "hyperbolic-space-3", "cylinder", "funnel", "custom")
THREADS_ENV = "AHRES_THREADS"


@dataclass(frozen=True)
class ModelConfig:
    """Model section.

    ``type`` selects the model; ``ell`` is the closed geodesic length of the
    cylinder and funnel; ``custom_warp`` holds the polynomial coefficients of
    ``w`` in mu for the custom model.
    """

    type: str = "hyperbolic-plane"
    mu_left: float = -0.75
    ell: float = 2 * math.pi
    neck_parity: str = None
    n: int = 2
    mu_right: float = 1.0
    custom_warp: tuple = None
    trapping: bool = False

    def __post_init__(self):
        """Validate."""
        if self.type not in MODEL_TYPES:
            raise ConfigError("Unknown model type {}, choose from {}.".format(self.type, MODEL_TYPES),
                              "/model/type")
        if not self.mu_left < 0:
            raise ConfigError("mu_left has to be negative.", "/model/mu_left")
        if self.type == "custom" and not self.custom_warp:
            raise ConfigError("The custom model needs custom_warp coefficients.", "/model/custom_warp")
        if self.custom_warp is not None:
            object.__setattr__(self, "custom_warp", tuple(float(c) for c in self.custom_warp))

    def build(self):
        """Construct the metric model."""
        try:
            if self.type == "hyperbolic-plane":
                return EvenMetricModel.hyperbolic_plane(self.mu_left)
            if self.type == "hyperbolic-space-3":
                return EvenMetricModel.hyperbolic_space_3(self.mu_left)
            if self.type == "cylinder":
                return EvenMetricModel.cylinder(self.ell, self.mu_left, self.neck_parity or "both")
            if self.type == "funnel":
                return EvenMetricModel.funnel(self.ell, self.mu_left, self.neck_parity or "even")
            return EvenMetricModel.custom(self.custom_warp, self.n, self.mu_left, self.mu_right,
                                          trapping_flag=self.trapping)
        except ValueError as err:
            raise ConfigError(str(err), "/model")


@dataclass(frozen=True)
class ExtensionConfig:
    """Interior phase weight: ``plateau = [start, end]`` (end null means mu_right) and ``mu_match``."""

    plateau: tuple = (1.5, None)
    mu_match: float = 0.5

    def __post_init__(self):
        """Validate."""
        if len(self.plateau) != 2:
            raise ConfigError("plateau has to be [start, end].", "/extension/plateau")
        object.__setattr__(self, "plateau", tuple(self.plateau))


@dataclass(frozen=True)
class GridConfig:
    """Grid section, ``bc = "auto"`` uses the model's right end treatment."""

    N: int = 128
    bc: str = "auto"

    def __post_init__(self):
        """Validate."""
        if int(self.N) != self.N or self.N < 8:
            raise ConfigError("N has to be an integer >= 8.", "/grid/N")
        if self.bc not in ("auto", "dirichlet_right", "center_regularity", "periodic_double_cover"):
            raise ConfigError("Unknown bc {}.".format(self.bc), "/grid/bc")


@dataclass(frozen=True)
class SolverConfig:
    """Resonance search settings.

    ``window`` is ``{"re": [a, b], "im": [c, d]}``; ``s`` is the Sobolev order
    of the Fredholm setting, the window has to satisfy ``Im sigma > 1 - 2s``.
    """

    method: str = "contour"
    window: dict = field(default_factory=lambda: {"re": [-0.5, 0.5], "im": [-4.0, -0.2]})
    s: float = 3.0
    n_nodes: int = 32
    probe_rank: int = 8
    filter_tol: float = 1e-6
    residual_tol: float = 1e-8

    def __post_init__(self):
        """Validate."""
        if self.method not in ("contour", "linearized"):
            raise ConfigError("Unknown method {}.".format(self.method), "/solver/method")
        if set(self.window) != {"re", "im"}:
            raise ConfigError("window needs exactly the keys re and im.", "/solver/window")
        for key in ("re", "im"):
            low, high = self.window[key]
            if not low < high:
                raise ConfigError("window bounds have to be increasing.", "/solver/window/{}".format(key))
        threshold = 1 - 2 * self.s
        if not self.window["im"][0] > threshold:
            raise ConfigError("Window violates Im sigma > 1 - 2s: 1 - 2s = {} but Im sigma reaches {}.".format(
                threshold, self.window["im"][0]), "/solver/window/im", {"threshold": threshold})
        if self.n_nodes < 4 or self.probe_rank < 1:
            raise ConfigError("n_nodes >= 4 and probe_rank >= 1 required.", "/solver")


@dataclass(frozen=True)
class SweepConfig:
    """High energy sweep along ``Im sigma = im_sigma`` with ``n_points`` real parts in ``re_range``."""

    im_sigma: float = -1.0
    re_range: tuple = (20.0, 160.0)
    n_points: int = 18
    s: float = 2.0
    source: dict = field(default_factory=lambda: {"center": 1.0, "width": 1.0})
    oscillation: str = "characteristic"
    dual_order: float = None
    mode: int = 0
    n_min: int = 96

    def __post_init__(self):
        """Validate."""
        if self.n_points < 3:
            raise ConfigError("A slope fit needs n_points >= 3.", "/sweep/n_points")
        if self.oscillation not in ("characteristic", "none"):
            raise ConfigError("Unknown oscillation {}.".format(self.oscillation), "/sweep/oscillation")
        if set(self.source) != {"center", "width"}:
            raise ConfigError("source needs exactly the keys center and width.", "/sweep/source")
        if not self.s > 0.5 + abs(min(self.im_sigma, 0.0)):
            raise ConfigError("Sweep order violates s > 1/2 + |Im sigma|.", "/sweep/s")
        object.__setattr__(self, "re_range", tuple(self.re_range))

    @property
    def re_values(self):
        """Real parts of the sweep points."""
        return list(np.linspace(self.re_range[0], self.re_range[1], self.n_points))


@dataclass(frozen=True)
class FlowConfig:
    """Stopping rules and sample sizes of the bicharacteristic checks."""

    eps0: float = 0.1
    eps1: float = 1e-14
    max_time: float = 1e3
    radius: float = 1e-3
    n_samples: int = 200

    def __post_init__(self):
        """Validate."""
        for name in ("eps0", "eps1", "max_time", "radius"):
            if not getattr(self, name) > 0:
                raise ConfigError("{} has to be positive.".format(name), "/flow/{}".format(name))


SECTIONS = {
    "model": ModelConfig,
    "extension": ExtensionConfig,
    "absorption": AbsorptionConfig,
    "grid": GridConfig,
    "solver": SolverConfig,
    "sweep": SweepConfig,
    "flow": FlowConfig,
}


@dataclass(frozen=True)
class RunConfig:
    """Complete, validated run configuration."""

    model: ModelConfig = field(default_factory=ModelConfig)
    extension: ExtensionConfig = field(default_factory=ExtensionConfig)
    absorption: AbsorptionConfig = field(default_factory=AbsorptionConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    modes: tuple = (0,)
    solver: SolverConfig = field(default_factory=SolverConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    flow: FlowConfig = field(default_factory=FlowConfig)
    seed: int = 0

    def to_dict(self):
        """Every field including defaults."""
        out = {name: _section_dict(getattr(self, name)) for name in SECTIONS}
        out["modes"] = list(self.modes)
        out["seed"] = self.seed
        return out

    @property
    def hash(self):
        """SHA-256 of the canonical JSON."""
        return config_hash(self.to_dict())

    def provenance(self, **extra):
        """Block embedded in every artifact."""
        out = {"config_hash": self.hash, "version": __version__, "config": self.to_dict()}
        out.update(extra)
        return out

    def check_sweep(self, model=None):
        """Refuse high energy sweeps on trapping models without interior absorption."""
        model = self.model.build() if model is None else model
        if model.trapping_flag and self.absorption.interior_window is None:
            raise ConfigError("Trapping model: high energy estimates need complex absorption inside X0, "
                              "set absorption.interior_window.", "/absorption/interior_window")


def _section_dict(section):
    if hasattr(section, "to_dict"):
        return section.to_dict()
    out = asdict(section)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in out.items()}


def _build_section(cls, data, pointer):
    if not isinstance(data, dict):
        raise ConfigError("Section has to be an object.", pointer)
    allowed = {f.name for f in fields(cls)}
    for key in data:
        if key not in allowed:
            raise ConfigError("Unknown key {}.".format(key), "{}/{}".format(pointer, key))
    try:
        return cls(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err), pointer)


def parse_config(text):
    """Parse and validate a JSON run configuration.

    Parameters
    ----------
    text : str
        UTF-8 JSON text; missing sections and fields take their defaults.

    Returns
    -------
    config : RunConfig
        Validated configuration.

    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError("Invalid JSON: {}".format(err), "")
    if not isinstance(data, dict):
        raise ConfigError("Configuration has to be a JSON object.", "")

    allowed = set(SECTIONS) | {"modes", "seed"}
    for key in data:
        if key not in allowed:
            raise ConfigError("Unknown key {}.".format(key), "/{}".format(key))

    kwargs = {name: _build_section(cls, data[name], "/" + name) for name, cls in SECTIONS.items() if name in data}
    if "modes" in data:
        modes = data["modes"]
        if not isinstance(modes, list) or not modes or not all(isinstance(m, int) for m in modes):
            raise ConfigError("modes has to be a non-empty list of integers.", "/modes")
        kwargs["modes"] = tuple(modes)
    if "seed" in data:
        if not isinstance(data["seed"], int):
            raise ConfigError("seed has to be an integer.", "/seed")
        kwargs["seed"] = data["seed"]

    config = RunConfig(**kwargs)
    config.model.build()
    logger.debug("Parsed configuration with hash %s", config.hash)
    return config


def resolve_threads(threads=None):
    """Thread count from the CLI value, else ``AHRES_THREADS``, else 1; 0 means all cores."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV)
        if raw is None:
            return 1
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigError("{} has to be an integer, got {}.".format(THREADS_ENV, raw), "/threads")
    if threads < 0:
        raise ConfigError("threads has to be non-negative.", "/threads")
    return threads or (os.cpu_count() or 1)
