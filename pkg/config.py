"""Run configuration: a frozen dataclass, a ``key = value`` file parser and flag overlay."""

from __future__ import annotations

import dataclasses
import logging
import os
from dataclasses import dataclass
from typing import Any, Callable, Dict, Mapping, Optional

from errors import ConfigError

logger = logging.getLogger(__name__)

# Fields that change how a run executes but never what it computes.
RUNTIME_FIELDS = ("threads", "timestamp", "timing")

KEY_ALIASES = {"seed": "master_seed"}


def safe_int_convert(value: Any, default: int, min_val: int, max_val: int) -> int:
    """Convert various input types to an int within [min_val, max_val].

    Returns default when conversion fails or value is NaN/inf.
    """
    try:
        if value is None or isinstance(value, bool):
            return default
        if isinstance(value, int):
            n = value
        elif isinstance(value, float):
            if value != value or value in (float("inf"), float("-inf")):
                return default
            n = int(value)
        elif isinstance(value, str):
            s = value.strip()
            if s == "":
                return default
            try:
                f = float(s)
            except Exception:
                return default
            if f != f or f in (float("inf"), float("-inf")):
                return default
            n = int(f)
        else:
            return default
        return max(min_val, min(max_val, n))
    except Exception:
        return default


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a run. ``None`` means "the subcommand's default"."""

    subcommand: str = ""
    # ensemble
    atom: Optional[str] = None
    atom_b: str = "matched-discrete-complex"
    variance_b: float = 1.0
    dim: int = 64
    count: int = 1000
    master_seed: int = 0
    threads: int = 1
    # test function
    case: str = "bulk"
    family: Optional[str] = None
    center_re: Optional[float] = None
    center_im: Optional[float] = None
    radius: Optional[float] = None
    degree: int = 1
    amplitude: float = 1.0
    normalization: Optional[str] = None
    quarter_dim: str = "half"
    # kernels / classical positions
    regime: str = "complex-complex"
    half_dim: int = 16
    grid: Optional[str] = None
    z_re: float = 0.3
    z_im: float = 0.2
    grid_points: int = 401
    nodes_2d: int = 96
    panels_2d: int = 1
    pair_nodes: int = 32
    nodes_1d: int = 200
    pair_nodes_1d: int = 160
    costin_lebowitz: bool = False
    # checks and output
    suite: str = "all"
    tolerance: float = 0.12
    ks_max: Optional[float] = None
    output: str = ""
    stats_output: str = ""
    matrix_output: str = ""
    timestamp: bool = True
    timing: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "threads", safe_int_convert(self.threads, 1, 1, os.cpu_count() or 1))
        if self.dim < 2:
            raise ConfigError(f"dim must be >= 2, got {self.dim}")
        if self.count < 1:
            raise ConfigError(f"count must be positive, got {self.count}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError(f"seed must fit in 64 unsigned bits, got {self.master_seed}")
        if not self.tolerance > 0.0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Copy with every non-None override applied (command-line flags win over the file)."""
        changes = {}
        for key, value in overrides.items():
            if value is None:
                continue
            key = KEY_ALIASES.get(key, key)
            if key not in _FIELDS:
                raise ConfigError(f"unknown key {key!r}")
            if isinstance(value, str) and _CONVERTERS[key] is not str:
                try:
                    value = _CONVERTERS[key](value.strip())
                except ValueError as e:
                    raise ConfigError(f"bad value for {key}: {e}") from e
            changes[key] = value
        if not changes:
            return self
        try:
            return dataclasses.replace(self, **changes)
        except TypeError as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "RunConfig":
        return cls().with_overrides(**dict(values))

    def to_dict(self, include_runtime: bool = False) -> Dict[str, Any]:
        """Serializable copy; runtime-only knobs are left out so reports do not depend on them."""
        out = dataclasses.asdict(self)
        if not include_runtime:
            for key in RUNTIME_FIELDS:
                out.pop(key, None)
        return out


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _to_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _to_int(text: str) -> int:
    return int(text, 0)


_CONVERTERS: Dict[str, Callable[[str], Any]] = {}
for _f in dataclasses.fields(RunConfig):
    _kind = str(_f.type)
    if "bool" in _kind:
        _CONVERTERS[_f.name] = _to_bool
    elif "int" in _kind:
        _CONVERTERS[_f.name] = _to_int
    elif "float" in _kind:
        _CONVERTERS[_f.name] = float
    else:
        _CONVERTERS[_f.name] = str


def _strip_value(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def parse_config_text(text: str) -> RunConfig:
    values: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", number)
        key, value = line.split("=", 1)
        key = key.strip().lower().replace("-", "_")
        key = KEY_ALIASES.get(key, key)
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}", number)
        value = _strip_value(value)
        try:
            values[key] = _CONVERTERS[key](value)
        except ValueError as e:
            raise ConfigError(f"bad value for {key}: {e}", number) from e
    try:
        return RunConfig(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e


def parse_config(path: str) -> RunConfig:
    """Read a ``key = value`` file (``#`` comments and blank lines allowed)."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    logger.debug(f"loaded config from {path}")
    return parse_config_text(text)
