"""Experiment configuration and the flat key=value config format."""

from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from ..errors import TrpcaLabError

KINDS = ("certify", "sign", "pt", "ptomega", "infty", "dev", "phase")
# Kinds whose operators carry a 1/rho factor.
_DIVIDES_BY_RHO = ("pt", "infty", "dev")
_GRID_FIELDS = ("n", "r", "rho")

MAX_N = 64
MAX_N3 = 16
MAX_TRIALS = 500


class ConfigError(TrpcaLabError, ValueError):
    """Raised when an experiment configuration is malformed or out of range."""
    pass


def _format_scalar(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_grid(values) -> str:
    """Comma list that parse_grid reads back to the same values."""
    return ",".join(_format_scalar(v) for v in values)


def parse_grid(text: str, kind: type = float) -> tuple:
    """Parse a grid given as a single value, a comma list or a:b:s.

    a:b:s is inclusive of b when b lies on the step lattice.

    Raises:
        ConfigError: If the text cannot be parsed or the range is empty.
    """
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ConfigError(f"Range '{text}' must have the form start:stop:step")
            start, stop, step = (kind(p) for p in parts)
            if step <= 0:
                raise ConfigError(f"Range step must be positive in '{text}'")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            if count < 1:
                raise ConfigError(f"Range '{text}' is empty")
            values = [start + i * step for i in range(count)]
            if kind is float:
                values = [round(v, 12) for v in values]
            return tuple(values)
        values = tuple(kind(p) for p in text.split(",") if p.strip())
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"Could not parse grid '{text}': {e}") from e
    if not values:
        raise ConfigError("Grid is empty")
    return values


def read_flat_config(path: str | Path) -> dict[str, str]:
    """Read a flat key=value file; '#' starts a comment, blank lines are skipped.

    Raises:
        OSError: If the file cannot be read.
        ConfigError: If a line is not of the form key=value.
    """
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{lineno}: expected key=value, got '{raw.strip()}'")
        entries[key.strip().replace("-", "_")] = value.strip()
    return entries


@dataclass
class ExperimentConfig:
    """One experiment: a parameter grid, a trial count and a seed.

    Grids n, r and rho are crossed; n3 is fixed. Every point is run for
    `trials` independent trials.
    """
    kind: str
    n: tuple[int, ...] = (20,)
    n3: int = 4
    r: tuple[int, ...] = (1,)
    rho: tuple[float, ...] = (0.1,)
    trials: int = 10
    seed: int = 0
    workers: int = 1
    tol: float = 1e-8
    max_iter: int = 1000
    success_tol: float = 1e-5
    pass_threshold: float = 0.9
    j0: int | None = None
    out: Path | None = None
    xlsx: Path | None = None
    allow_large: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"Unknown experiment kind '{self.kind}', expected one of {KINDS}")
        self.n = tuple(int(v) for v in self.n)
        self.r = tuple(int(v) for v in self.r)
        self.rho = tuple(float(v) for v in self.rho)
        for name in _GRID_FIELDS:
            if not getattr(self, name):
                raise ConfigError(f"Grid '{name}' is empty")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        if min(self.n) < 1 or self.n3 < 1:
            raise ConfigError("Dimensions must be positive")
        if any(not 0.0 <= v <= 1.0 for v in self.rho):
            raise ConfigError(f"rho values must lie in [0, 1], got {self.rho}")
        if self.kind in _DIVIDES_BY_RHO and min(self.rho) <= 0.0:
            raise ConfigError(f"Experiment '{self.kind}' needs rho > 0")
        if any(v < 0 or v > n for v in self.r for n in self.n):
            raise ConfigError(f"Tubal ranks {self.r} must lie in [0, n] for n in {self.n}")
        if self.kind == "certify" and max(self.rho) >= 1.0:
            raise ConfigError("Experiment 'certify' needs rho < 1 (Omega must leave a complement)")
        if self.kind == "infty" and min(self.r) < 1:
            raise ConfigError("Experiment 'infty' needs r >= 1 (Z = 0 is excluded)")
        if self.tol <= 0 or self.success_tol <= 0:
            raise ConfigError("Tolerances must be positive")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be at least 1, got {self.max_iter}")
        if not 0.0 <= self.pass_threshold <= 1.0:
            raise ConfigError(f"pass_threshold must lie in [0, 1], got {self.pass_threshold}")
        if self.j0 is not None and self.j0 < 1:
            raise ConfigError(f"j0 must be at least 1, got {self.j0}")
        if not self.allow_large and (max(self.n) > MAX_N or self.n3 > MAX_N3
                                     or self.trials > MAX_TRIALS):
            raise ConfigError(
                f"Desk-scale caps exceeded (n <= {MAX_N}, n3 <= {MAX_N3}, "
                f"trials <= {MAX_TRIALS}); set allow_large=true to override"
            )
        if self.out is not None:
            self.out = Path(self.out)
        if self.xlsx is not None:
            self.xlsx = Path(self.xlsx)

    @property
    def points(self) -> list[tuple[int, int, float]]:
        """Parameter points (n, r, rho) in deterministic order."""
        return [(n, r, rho) for n in self.n for r in self.r for rho in self.rho]

    def to_flat(self) -> dict[str, str]:
        """Flat string mapping that from_flat reads back to an equal config."""
        flat = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.name in _GRID_FIELDS:
                flat[f.name] = format_grid(value)
            elif isinstance(value, bool):
                flat[f.name] = "true" if value else "false"
            else:
                flat[f.name] = _format_scalar(value)
        return flat

    @classmethod
    def from_flat(cls, flat: dict[str, str]) -> "ExperimentConfig":
        """Build a config from string values.

        Raises:
            ConfigError: On unknown keys, unparsable values or invalid ranges.
        """
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, text in flat.items():
            if key not in known:
                raise ConfigError(f"Unknown config key '{key}'")
            try:
                kwargs[key] = _parse_field(key, text)
            except ValueError as e:
                if isinstance(e, ConfigError):
                    raise
                raise ConfigError(f"Invalid value for '{key}': {text!r}") from e
        if "kind" not in kwargs:
            raise ConfigError("Config is missing 'kind'")
        return cls(**kwargs)


_INT_FIELDS = {"n3", "trials", "seed", "workers", "max_iter", "j0"}
_FLOAT_FIELDS = {"tol", "success_tol", "pass_threshold"}


def _parse_field(key: str, text: str):
    if key in ("n", "r"):
        return parse_grid(text, int)
    if key == "rho":
        return parse_grid(text, float)
    if key in _INT_FIELDS:
        return int(text)
    if key in _FLOAT_FIELDS:
        return float(text)
    if key in ("out", "xlsx"):
        return Path(text)
    if key == "allow_large":
        lowered = text.lower()
        if lowered not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"Invalid boolean for '{key}': {text!r}")
        return lowered in ("true", "1", "yes")
    return text
