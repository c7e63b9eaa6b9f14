"""Sweep configuration files (TOML, sections cavity/dye/pump/sweep/numerics)."""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .dye import build_profiles, ks_rates, load_rate_table
from .dynamics import ModelParams, calibrate_peak_rate
from .modes import build_basis

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


# key -> (section, type, default). ``None`` defaults are derived from other keys.
_SCHEMA = {
    "n_modes": ("cavity", int, 6),
    "width": ("cavity", float, 10.0),
    "grid_extent": ("cavity", float, None),
    "grid_points": ("cavity", int, 513),
    "omega0": ("cavity", float, 535.0),
    "delta_omega": ("cavity", float, 1.7),
    "kappa": ("cavity", float, 0.2),
    "zpl": ("dye", float, 545.0),
    "temperature": ("dye", float, 300.0),
    "bandwidth": ("dye", float, 15.0),
    "peak_rate": ("dye", float, None),
    "calibration_target": ("dye", float, 5.0),
    "rate_table": ("dye", str, None),
    "n_mol": ("dye", float, 1e9),
    "density_shape": ("dye", str, "uniform"),
    "density_width": ("dye", float, None),
    "center": ("pump", float, 0.0),
    "width_factor": ("pump", float, 1.2),
    "decay_rate": ("pump", float, 3e-5),
    "pump_min": ("sweep", float, 0.0),
    "pump_max": ("sweep", float, 2.0),
    "pump_points": ("sweep", int, 60),
    "out": ("sweep", str, "results"),
    "workers": ("sweep", int, 1),
    "tol": ("numerics", float, 1e-10),
    "max_iter": ("numerics", int, 2000),
    "coherence_samples": ("numerics", int, 2001),
    "coherence_window": ("numerics", float, 5.0),
}
SECTIONS = ("cavity", "dye", "pump", "sweep", "numerics")


@dataclass(frozen=True)
class SweepConfig:
    n_modes: int = 6
    width: float = 10.0
    grid_extent: float | None = None
    grid_points: int = 513
    omega0: float = 535.0
    delta_omega: float = 1.7
    kappa: float = 0.2
    zpl: float = 545.0
    temperature: float = 300.0
    bandwidth: float = 15.0
    peak_rate: float | None = None
    calibration_target: float = 5.0
    rate_table: str | None = None
    n_mol: float = 1e9
    density_shape: str = "uniform"
    density_width: float | None = None
    center: float = 0.0
    width_factor: float = 1.2
    decay_rate: float = 3e-5
    pump_min: float = 0.0
    pump_max: float = 2.0
    pump_points: int = 60
    out: str = "results"
    workers: int = 1
    tol: float = 1e-10
    max_iter: int = 2000
    coherence_samples: int = 2001
    coherence_window: float = 5.0
    source: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.pump_min < self.pump_max:
            raise ConfigError(
                f"pump_min ({self.pump_min}) must be smaller than pump_max ({self.pump_max})"
            )
        if self.pump_min < 0:
            raise ConfigError("pump_min must be non-negative")
        if self.pump_points < 2:
            raise ConfigError("pump_points must be >= 2")
        for name in ("width", "kappa", "temperature", "bandwidth", "n_mol", "width_factor",
                     "decay_rate", "tol", "calibration_target", "coherence_window"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("grid_extent", "peak_rate", "density_width"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive")
        if self.n_modes < 1 or self.workers < 1:
            raise ConfigError("n_modes and workers must be >= 1")
        if self.density_shape not in ("uniform", "gaussian"):
            raise ConfigError(f"density_shape must be 'uniform' or 'gaussian', got {self.density_shape!r}")
        if self.density_shape == "gaussian" and self.density_width is None:
            raise ConfigError("density_width is required when density_shape = 'gaussian'")

    # derived model pieces -------------------------------------------------
    def pump_values(self):
        import numpy as np

        return np.linspace(self.pump_min, self.pump_max, self.pump_points)

    def basis(self):
        return build_basis(self.n_modes, self.width, self.grid_extent, self.grid_points,
                           self.omega0, self.delta_omega)

    def model(self, pump_over_gdown: float = 0.0, basis=None) -> ModelParams:
        basis = basis if basis is not None else self.basis()
        shape = "uniform" if self.density_shape == "uniform" else ("gaussian", self.density_width)
        profiles = build_profiles(
            basis, self.n_mol, shape, self.center, self.width_factor * self.width,
            pump_over_gdown * self.decay_rate, self.decay_rate,
        )
        if self.rate_table is not None:
            rates = load_rate_table(self._resolve(self.rate_table), basis.frequencies)
        else:
            peak = self.peak_rate
            if peak is None:
                peak = calibrate_peak_rate(basis, profiles, self.kappa, self.zpl, self.temperature,
                                           self.bandwidth, self.calibration_target)
            rates = ks_rates(basis.frequencies, self.zpl, self.temperature, peak, self.bandwidth)
        return ModelParams(self.kappa, rates, profiles, basis)

    def _resolve(self, path):
        p = Path(path)
        if not p.is_absolute() and self.source is not None:
            p = Path(self.source).parent / p
        return p

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("source")
        return d

    def digest(self) -> str:
        # physics and numerics only: worker count and output path do not change results
        d = {k: v for k, v in self.as_dict().items() if k not in ("workers", "out")}
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _line_of(text: str, section: str | None, key: str | None) -> int | None:
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return lineno
            continue
        if key is not None and current == section and re.match(rf"\s*{re.escape(key)}\s*=", line):
            return lineno
    return None


def _where(path, text, section, key=None):
    line = _line_of(text, section, key)
    return f"{path}:{line}" if line else str(path)


def parse_config_text(text: str, path="<string>") -> SweepConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    values = {}
    for section, body in raw.items():
        if section not in SECTIONS:
            raise ConfigError(f"{_where(path, text, section)}: unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"{_where(path, text, None, section)}: '{section}' must be a section")
        for key, value in body.items():
            spec = _SCHEMA.get(key)
            if spec is None or spec[0] != section:
                raise ConfigError(f"{_where(path, text, section, key)}: unknown key '{key}' in [{section}]")
            typ = spec[1]
            ok = (
                isinstance(value, typ) and not isinstance(value, bool)
                or (typ is float and isinstance(value, int) and not isinstance(value, bool))
            )
            if not ok:
                raise ConfigError(
                    f"{_where(path, text, section, key)}: '{key}' must be {typ.__name__}, "
                    f"got {type(value).__name__}"
                )
            values[key] = typ(value)
    for key, (section, _, default) in _SCHEMA.items():
        if key not in values:
            log.info("config default: [%s] %s = %r", section, key, default)
    try:
        return SweepConfig(**values, source=str(path))
    except ConfigError as exc:
        msg = str(exc)
        keys = [k for k in values if re.search(rf"\b{k}\b", msg)]
        where = ", ".join(_where(path, text, _SCHEMA[k][0], k) for k in keys)
        raise ConfigError(f"{where or path}: {msg}") from None


def parse_config(path) -> SweepConfig:
    """Read and validate a configuration file; every default applied is logged."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(), path)


def default_config_path() -> Path:
    return Path(str(resources.files("pbecsim") / "data" / "figure1.toml"))
