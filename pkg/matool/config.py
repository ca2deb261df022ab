"""Run configuration loaded from .matool.yml, with ${ENV_VAR} expansion and flag overrides."""

from __future__ import annotations

import math
import os
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from matool.errors import ConfigError
from matool.setlim import SEQUENCE_PRESETS

CONFIG_FILENAMES = (".matool.yml", ".matool.yaml")
MIN_SOLVER_MESH = 64
MAX_DEFAULT_THREADS = 8


class ConfigLoader(yaml.SafeLoader):
    """SafeLoader that also reads 1e-6 and 1e8 as floats."""


ConfigLoader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*)(?:\.[0-9_]*)?[eE][-+]?[0-9]+$"),
    list("-+0123456789"),
)


def worker_count() -> int:
    """Worker threads for parallel scans: MATOOL_THREADS, else the CPU count (max 8)."""
    raw = os.environ.get("MATOOL_THREADS", "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"MATOOL_THREADS must be an integer, got {raw!r}") from None
        if value < 1:
            raise ConfigError(f"MATOOL_THREADS must be >= 1, got {value}")
        return value
    return max(1, min(MAX_DEFAULT_THREADS, os.cpu_count() or 1))


# =============================================================================
# Config sections
# =============================================================================


@dataclass
class ProblemConfig:
    N: int = 1
    p: float | None = None
    R: float = 1.0
    a_preset: str = "one"
    gamma: float = 0.0
    f_preset: str = "exponential"
    f_params: dict[str, Any] = field(default_factory=dict)

    @property
    def exponent(self) -> float:
        return float(self.p) if self.p is not None else self.N + 1.0


@dataclass
class NumericsConfig:
    mesh_n: int = 1025
    grading: str = "uniform"
    tol_bisect: float = 1e-10
    tol_picard: float = 1e-10
    tol_eigen: float = 1e-4
    s_min: float = 1e-4
    s_max: float = 1e4
    points_per_decade: int = 48
    lambda_floor: float = 1e-6
    lambda_cap: float = 1e8
    p_grid: list[float] = field(default_factory=lambda: [2.0, 2.5, 3.0, 3.5, 4.0])
    probes: list[float] | None = None
    sturm_trials: int = 100


@dataclass
class OutputConfig:
    format: str = "csv"
    svg: bool = True
    out_dir: str = "matool-out"
    seed: int = 0


@dataclass
class SetlimConfig:
    epsilon: float = 0.05
    window: int = 4
    terms: int = 40
    sequence: Any = "two_gap"


SECTIONS = {
    "problem": ProblemConfig,
    "numerics": NumericsConfig,
    "output": OutputConfig,
    "setlim": SetlimConfig,
}


# =============================================================================
# RunConfig
# =============================================================================


@dataclass
class RunConfig:
    """Configuration loaded from .matool.yml"""

    problem: ProblemConfig = field(default_factory=ProblemConfig)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    setlim: SetlimConfig = field(default_factory=SetlimConfig)
    source: Path | None = None

    @classmethod
    def load(cls, config_path: Path | None = None) -> RunConfig:
        """Load config from .matool.yml, expanding ${ENV_VAR} references.

        With no path and no file found upward from the working directory,
        the defaults are returned.
        """
        if config_path is None:
            config_path = cls.find_config_file()
            if config_path is None:
                return cls()
        config_path = Path(config_path).expanduser()
        if not config_path.exists():
            raise ConfigError(f"Config file not found: {config_path}. Run 'matool init'.")

        content = cls._expand_env_vars(config_path.read_text())
        try:
            data = yaml.load(content, Loader=ConfigLoader) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Malformed config {config_path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Config {config_path} must be a mapping of sections")

        config = cls.from_dict(data)
        config.source = config_path
        return config

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        unknown = set(data) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"Unknown config sections: {sorted(unknown)}")
        sections = {}
        for name, section_cls in SECTIONS.items():
            raw = data.get(name) or {}
            if not isinstance(raw, dict):
                raise ConfigError(f"Section {name!r} must be a mapping")
            known = {f.name for f in fields(section_cls)}
            extra = set(raw) - known
            if extra:
                raise ConfigError(f"Unknown keys in {name!r}: {sorted(extra)}")
            sections[name] = section_cls(**raw)
        return cls(**sections)

    @classmethod
    def find_config_file(cls, start: Path | None = None) -> Path | None:
        """Search start (default: cwd), then parent dirs for .matool.yml."""
        current = Path(start) if start is not None else Path.cwd()
        for directory in [current, *current.parents]:
            for name in CONFIG_FILENAMES:
                config_path = directory / name
                if config_path.exists():
                    return config_path
        return None

    @staticmethod
    def _expand_env_vars(content: str) -> str:
        """Expand ${ENV_VAR} and ${ENV_VAR:-default} patterns in content."""

        def replacer(match: re.Match) -> str:
            var_name, default = match.group(1), match.group(3)
            return os.environ.get(var_name, default if default is not None else "")

        return re.sub(r"\$\{(\w+)(:-([^}]*))?\}", replacer, content)

    def apply_overrides(self, overrides: list[str]) -> RunConfig:
        """Apply `section.key=value` overrides; values are parsed as YAML scalars."""
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"Override {item!r} must look like section.key=value")
            path, raw = item.split("=", 1)
            parts = path.strip().split(".")
            if len(parts) != 2 or parts[0] not in SECTIONS:
                raise ConfigError(f"Unknown override key {path!r}")
            section = getattr(self, parts[0])
            if parts[1] not in {f.name for f in fields(section)}:
                raise ConfigError(f"Unknown override key {path!r}")
            try:
                value = yaml.load(raw, Loader=ConfigLoader)
            except yaml.YAMLError as e:
                raise ConfigError(f"Bad value in override {item!r}: {e}") from e
            setattr(section, parts[1], value)
        return self

    def validate(self, solver: bool = True) -> RunConfig:
        """Check ranges; raises ConfigError on the first problem."""
        problem, numerics = self.problem, self.numerics
        if not isinstance(problem.N, int) or isinstance(problem.N, bool) or problem.N < 1:
            raise ConfigError(f"problem.N must be an integer >= 1, got {problem.N!r}")
        if problem.p is not None and not problem.p >= 2:
            raise ConfigError(f"problem.p must be >= 2, got {problem.p}")
        if not problem.R > 0:
            raise ConfigError(f"problem.R must be positive, got {problem.R}")
        for name in ("tol_bisect", "tol_picard", "tol_eigen"):
            value = getattr(numerics, name)
            if not (isinstance(value, int | float) and value > 0 and math.isfinite(value)):
                raise ConfigError(f"numerics.{name} must be a positive number, got {value!r}")
        if solver and numerics.mesh_n < MIN_SOLVER_MESH:
            raise ConfigError(
                f"numerics.mesh_n must be >= {MIN_SOLVER_MESH} for solver commands, "
                f"got {numerics.mesh_n}"
            )
        if not 0 < numerics.s_min < numerics.s_max:
            raise ConfigError("numerics.s_min and s_max must satisfy 0 < s_min < s_max")
        if not 0 < numerics.lambda_floor < numerics.lambda_cap:
            raise ConfigError("numerics.lambda_floor and lambda_cap must satisfy 0 < floor < cap")
        if numerics.points_per_decade < 4:
            raise ConfigError("numerics.points_per_decade must be >= 4")
        if self.output.format not in ("csv", "json"):
            raise ConfigError(f"output.format must be csv or json, got {self.output.format!r}")
        if not self.setlim.epsilon > 0 or self.setlim.window < 1:
            raise ConfigError("setlim.epsilon must be > 0 and setlim.window >= 1")
        if isinstance(self.setlim.sequence, str) and self.setlim.sequence not in SEQUENCE_PRESETS:
            raise ConfigError(
                f"setlim.sequence must be one of {SEQUENCE_PRESETS} or a term list, "
                f"got {self.setlim.sequence!r}"
            )
        return self

    def to_dict(self) -> dict[str, Any]:
        return {name: asdict(getattr(self, name)) for name in SECTIONS}


# =============================================================================
# Template
# =============================================================================

CONFIG_TEMPLATE = """# matool run configuration
# Every key is optional; command-line `--set section.key=value` overrides win.

problem:
  N: 1                 # dimension
  # p: 2.0             # exponent for eigen commands (default N + 1)
  R: 1.0               # ball radius
  a_preset: one        # one | linear | power
  gamma: 0.0           # exponent for a_preset=power
  f_preset: exponential  # power | homogeneous | ratpow | exponential | table
  f_params: {}         # e.g. {alpha: 2, beta: 2, coefficient: 1}

numerics:
  mesh_n: 1025
  grading: uniform     # uniform | geometric
  tol_bisect: 1.0e-10
  tol_picard: 1.0e-10  # Picard cross-check of `solve` shots
  tol_eigen: 1.0e-4    # allowed gap between eigen methods
  s_min: 1.0e-4
  s_max: 1.0e4
  points_per_decade: 48
  lambda_floor: 1.0e-6
  lambda_cap: 1.0e8
  p_grid: [2.0, 2.5, 3.0, 3.5, 4.0]
  # probes: [0.5, 1.2, 2.0]   # lambda probes for `cases` (default: derived)
  sturm_trials: 100

output:
  format: csv          # csv | json
  svg: true
  out_dir: ${MATOOL_OUT:-matool-out}
  seed: 0

setlim:
  epsilon: 0.05
  window: 4
  terms: 40
  # two_gap | two_gap_head | two_gap_even | two_gap_odd | connected
  # | list of interval lists | {cycle: [...]}
  sequence: two_gap
"""
