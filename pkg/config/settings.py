import math
import os
from dataclasses import dataclass, field, fields
from typing import Any, Dict, Mapping, Optional

from utils.errors import ConfigurationError

CASES = ("burgers", "cos", "nonlinear2d", "eikonal", "hjb", "control")
MODES = ("full", "sparse", "adaptive")
BOUNDARY_CONDITIONS = ("periodic", "outflow")
ALPHA_MODES = ("analytic", "sampled")


@dataclass
class DiscretizationConfig:
    """Configuration for the approximation space"""
    dim: int = 2
    k: int = 1
    m: Optional[int] = None
    max_level: int = 4
    mode: str = "sparse"
    bc: Optional[str] = None
    quadrature_points: Optional[int] = None
    max_error_points: int = 5_000_000


@dataclass
class HamiltonianConfig:
    """Configuration for the numerical Hamiltonian"""
    alpha_mode: str = "analytic"
    alpha_safety: float = 1.1
    alpha_floor: float = 1e-12
    regularize: bool = True
    delta_factor: float = 2.0


@dataclass
class AdaptConfig:
    """Configuration for refinement and coarsening"""
    eps: float = 1e-4
    eta: Optional[float] = None
    scaled_indicator: bool = False
    predictor: bool = True

    @property
    def enabled(self) -> bool:
        return math.isfinite(self.eps)

    @property
    def coarsen_threshold(self) -> float:
        return self.eta if self.eta is not None else self.eps / 10


@dataclass
class TimeConfig:
    """Configuration for time stepping"""
    t_final: Optional[float] = None
    t_start: float = 0.0
    cfl: float = 0.1
    dt_override: Optional[float] = None


@dataclass
class OutputConfig:
    """Configuration for result files"""
    output: Optional[str] = None
    dump_solution: Optional[str] = None
    dump_active: Optional[str] = None
    dump_controls: Optional[str] = None
    dump_field: Optional[str] = None
    dump_tables: Optional[str] = None
    restart: Optional[str] = None
    trace: Optional[str] = None
    trace_error: bool = False
    plot_folder: Optional[str] = None
    sample_points: int = 129
    table_cache: Optional[str] = None


@dataclass
class LoggingConfig:
    """Configuration for logging"""
    level: str = "INFO"
    log_file: str = "logs/hjsg.log"
    max_file_size: int = 10 * 1024 * 1024  # 10MB
    backup_count: int = 5


_SECTIONS = ("discretization", "hamiltonian", "adapt", "time", "output", "logging")
_ALIASES = {
    "t_final": ("time", "t_final"),
    "alpha": ("hamiltonian", "alpha_mode"),
    "log_level": ("logging", "level"),
    "plot_dir": ("output", "plot_folder"),
}


def _parse_value(text: str, current: Any, annotation: Any) -> Any:
    text = text.strip()
    if text.lower() in ("none", ""):
        return None
    kind = type(current) if current is not None else None
    if kind is None:
        name = getattr(annotation, '__args__', (annotation,))[0]
        kind = name if isinstance(name, type) else str
    if kind is bool:
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigurationError(f"Expected a boolean, got {text!r}")
    try:
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
    except ValueError as e:
        raise ConfigurationError(f"Cannot parse {text!r}: {e}") from None
    return text


@dataclass
class Config:
    """Main configuration class"""
    discretization: DiscretizationConfig = field(default_factory=DiscretizationConfig)
    hamiltonian: HamiltonianConfig = field(default_factory=HamiltonianConfig)
    adapt: AdaptConfig = field(default_factory=AdaptConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    # General settings
    case: str = "burgers"
    seed: int = 0
    parallel_processing: bool = True
    max_workers: int = 4

    def __post_init__(self):
        threads = os.environ.get("HJSG_THREADS")
        if threads:
            try:
                self.max_workers = max(1, min(self.max_workers, int(threads)))
            except ValueError:
                raise ConfigurationError(f"HJSG_THREADS must be an integer, got {threads!r}") from None

    def _locate(self, key: str):
        key = key.strip().replace('-', '_')
        if key in _ALIASES:
            section, name = _ALIASES[key]
            return getattr(self, section), name
        for section in _SECTIONS:
            target = getattr(self, section)
            if key in {f.name for f in fields(target)}:
                return target, key
        if key in ("case", "seed", "parallel_processing", "max_workers"):
            return self, key
        raise ConfigurationError(f"Unknown configuration key {key!r}")

    def apply(self, values: Mapping[str, Any]) -> "Config":
        """Set flat keys (CLI flag names with '-' or '_') on their sections"""
        for key, value in values.items():
            if value is None:
                continue
            target, name = self._locate(key)
            if isinstance(value, str):
                annotation = {f.name: f.type for f in fields(target)}.get(name, str)
                value = _parse_value(value, getattr(target, name), annotation)
            setattr(target, name, value)
        return self

    @classmethod
    def from_file(cls, config_path: str) -> "Config":
        """Load configuration from a flat `key = value` file"""
        if not os.path.exists(config_path):
            raise ConfigurationError(f"Configuration file {config_path} not found")
        values: Dict[str, str] = {}
        with open(config_path, 'r') as f:
            for number, line in enumerate(f, start=1):
                line = line.split('#', 1)[0].strip()
                if not line:
                    continue
                if '=' not in line:
                    raise ConfigurationError(f"{config_path}:{number}: expected 'key = value'")
                key, value = line.split('=', 1)
                values[key.strip()] = value.strip()
        return cls().apply(values)

    def to_file(self, config_path: str) -> None:
        """Save configuration in the format read by from_file"""
        lines = [f"case = {self.case}", f"seed = {self.seed}",
                 f"parallel_processing = {self.parallel_processing}", f"max_workers = {self.max_workers}"]
        for section in _SECTIONS:
            lines.append(f"# {section}")
            target = getattr(self, section)
            for f in fields(target):
                lines.append(f"{f.name} = {getattr(target, f.name)}")
        with open(config_path, 'w') as stream:
            stream.write('\n'.join(lines) + '\n')

    def validate(self) -> "Config":
        """Raise ConfigurationError for invalid combinations"""
        d, h, a, t = self.discretization, self.hamiltonian, self.adapt, self.time
        if self.case not in CASES:
            raise ConfigurationError(f"Unknown case {self.case!r}; choose from {', '.join(CASES)}")
        if d.mode not in MODES:
            raise ConfigurationError(f"Unknown mode {d.mode!r}; choose from {', '.join(MODES)}")
        if d.bc is not None and d.bc not in BOUNDARY_CONDITIONS:
            raise ConfigurationError(f"Unknown boundary condition {d.bc!r}")
        if h.alpha_mode not in ALPHA_MODES:
            raise ConfigurationError(f"Unknown alpha mode {h.alpha_mode!r}")
        if d.dim < 1:
            raise ConfigurationError(f"Dimension must be positive, got {d.dim}")
        if not 0 <= d.k <= 3:
            raise ConfigurationError(f"Polynomial degree k={d.k} outside 0..3")
        if d.m is not None:
            if not 1 <= d.m <= 5:
                raise ConfigurationError(f"Interpolation degree M={d.m} outside 1..5")
            if d.m < d.k:
                raise ConfigurationError(f"Interpolation degree M={d.m} must be at least k={d.k}")
        if not 1 <= d.max_level <= 10:
            raise ConfigurationError(f"Maximum level {d.max_level} outside 1..10")
        if d.max_level * d.dim > 62:
            raise ConfigurationError(f"Maximum level {d.max_level} too large for dimension {d.dim}")
        if a.eps <= 0:
            raise ConfigurationError(f"Refinement threshold must be positive, got {a.eps}")
        if a.eta is not None and not 0 < a.eta < a.eps:
            raise ConfigurationError(f"Coarsening threshold {a.eta} must lie in (0, eps={a.eps})")
        if not 0 < t.cfl <= 1:
            raise ConfigurationError(f"CFL number {t.cfl} outside (0, 1]")
        if t.t_start < 0:
            raise ConfigurationError(f"Start time must be non-negative, got {t.t_start}")
        if t.t_final is not None and t.t_final <= t.t_start:
            raise ConfigurationError(f"Final time {t.t_final} must exceed the start time {t.t_start}")
        if t.dt_override is not None and t.dt_override <= 0:
            raise ConfigurationError(f"Time step override must be positive, got {t.dt_override}")
        return self
