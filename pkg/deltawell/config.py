"""
Run configuration for the command-line tools

Settings come from three layers: built-in defaults, an optional flat
key=value file (read with python-dotenv), and command-line flags. Later
layers win.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
from dotenv import dotenv_values

from .eigenbasis import PotentialConfig
from .errors import ConfigError, DeltaWellError
from .spectral import gaussian, load_tabulated, square_pulse

logger = logging.getLogger(__name__)

CONFIG_ENV = "DELTAWELL_CONFIG"
LOG_LEVEL_ENV = "DELTAWELL_LOG_LEVEL"
FORMATS = ("csv", "json")
DENSITY_TIMES = (0.0, 0.3, 0.6, 0.9, 1.2, 1.5)


@dataclass(frozen=True)
class GridSpec:
    """Sample grid parsed from 'min:max:n' or 'min:max:n:log'"""
    start: float
    stop: float
    count: int
    log: bool = False

    def __post_init__(self):
        if self.count < 2:
            raise ConfigError("grid", "count must be at least 2")
        if not self.start < self.stop:
            raise ConfigError("grid", "min must be smaller than max")
        if self.log and self.start <= 0:
            raise ConfigError("grid", "log spacing needs a positive minimum")

    @classmethod
    def parse(cls, text, name="grid"):
        parts = str(text).strip().split(":")
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ("log", "lin")):
            raise ConfigError(name, f"expected min:max:n[:log], got {text!r}")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as error:
            raise ConfigError(name, f"expected min:max:n[:log], got {text!r}") from error
        try:
            return cls(start, stop, count, log=len(parts) == 4 and parts[3] == "log")
        except ConfigError as error:
            raise ConfigError(name, error.reason) from error

    def values(self):
        if self.log:
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    def __str__(self):
        suffix = ":log" if self.log else ""
        return f"{self.start!r}:{self.stop!r}:{self.count}{suffix}"


def _parse_window(text, name="fit_window"):
    parts = str(text).split(":")
    try:
        lo, hi = (float(part) for part in parts)
    except ValueError as error:
        raise ConfigError(name, f"expected lo:hi, got {text!r}") from error
    if not lo < hi:
        raise ConfigError(name, "lo must be smaller than hi")
    return lo, hi


def _parse_bool(text, name):
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(name, f"expected a boolean, got {text!r}")


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI command needs"""
    L: float = 3.0
    V0: float = 1.0
    K: float = 0.5
    sf: str = "gaussian"
    x_grid: GridSpec = field(default_factory=lambda: GridSpec(0.0, 15.0, 1501))
    t_grid: GridSpec = field(default_factory=lambda: GridSpec(0.0, 10.0, 101))
    times: tuple = DENSITY_TIMES
    upper: float | None = None
    fit_window: tuple | None = None
    out: str | None = None
    format: str = "csv"
    tol_abs: float = 1e-10
    tol_rel: float = 1e-8
    gnuplot: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise ConfigError("L", "must be positive")
        if not (np.isfinite(self.V0) and self.V0 >= 0):
            raise ConfigError("V0", "must be non-negative")
        if not (np.isfinite(self.K) and self.K > 0):
            raise ConfigError("K", "must be positive")
        if self.sf not in ("gaussian", "square") and not self.sf.startswith("table:"):
            raise ConfigError("sf", f"expected gaussian, square or table:<path>, got {self.sf!r}")
        if self.format not in FORMATS:
            raise ConfigError("format", f"expected one of {FORMATS}, got {self.format!r}")
        if not (self.tol_abs > 0):
            raise ConfigError("tol_abs", "must be positive")
        if not (self.tol_rel > 0):
            raise ConfigError("tol_rel", "must be positive")
        if self.upper is not None and not self.upper > 0:
            raise ConfigError("upper", "must be positive")
        if not self.times:
            raise ConfigError("times", "needs at least one time")

    @property
    def potential(self):
        return PotentialConfig(L=self.L, V0=self.V0)

    def spectral_function(self):
        """SpectralFunction named by `sf`"""
        if self.sf == "gaussian":
            return gaussian(self.K)
        if self.sf == "square":
            return square_pulse(self.L)
        path = Path(self.sf.split(":", 1)[1])
        if not path.is_file():
            raise ConfigError("sf", f"table file not found: {path}")
        try:
            return load_tabulated(path)
        except DeltaWellError as error:
            raise ConfigError("sf", str(error)) from error

    def metadata(self):
        meta = {"L": self.L, "V0": self.V0}
        if self.sf == "gaussian":
            meta["K"] = self.K
        else:
            meta["sf"] = self.sf
        return meta


_CONVERTERS = {
    "L": float,
    "V0": float,
    "K": float,
    "sf": str,
    "x_grid": lambda text: GridSpec.parse(text, "x_grid"),
    "t_grid": lambda text: GridSpec.parse(text, "t_grid"),
    "times": lambda text: tuple(float(part) for part in str(text).split(",") if part.strip()),
    "upper": lambda text: float(text),
    "fit_window": _parse_window,
    "out": str,
    "format": str,
    "tol_abs": float,
    "tol_rel": float,
    "gnuplot": lambda text: _parse_bool(text, "gnuplot"),
}


def _normalize_key(key):
    key = key.strip().replace("-", "_")
    for name in _CONVERTERS:
        if key.lower() == name.lower():
            return name
    raise ConfigError(key, "unknown setting")


def _convert(name, raw):
    if not isinstance(raw, str):
        return raw
    try:
        return _CONVERTERS[name](raw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as error:
        raise ConfigError(name, f"cannot parse {raw!r}") from error


def read_config_file(path):
    """Flat key=value settings from `path`"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    raw = dotenv_values(path)
    settings = {}
    for key, value in raw.items():
        if value is None:
            raise ConfigError(key, "missing value")
        settings[_normalize_key(key)] = value
    return settings


def load_run_config(path=None, **overrides):
    """
    Merge defaults, the config file and explicit overrides into a RunConfig

    Args:
        path (str, optional): Config file; falls back to $DELTAWELL_CONFIG
        **overrides: Settings from flags; None means "not given"

    Returns:
        RunConfig
    """
    path = path or os.environ.get(CONFIG_ENV)
    settings = {}
    if path:
        settings.update(read_config_file(path))
        logger.info("loaded run config from %s", path)
    for key, value in overrides.items():
        if value is not None:
            settings[_normalize_key(key)] = value
    known = {item.name for item in fields(RunConfig)}
    values = {name: _convert(name, raw) for name, raw in settings.items() if name in known}
    return RunConfig(**values)
