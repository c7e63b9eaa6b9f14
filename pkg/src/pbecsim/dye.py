"""Dye rates (absorption/emission per mode) and spatial molecule/pump profiles."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.constants import h as PLANCK, k as BOLTZMANN

from .modes import ModeBasis

RATE_TABLE_HEADER = ("omega_THz", "absorption_THz", "emission_THz")


def thermal_frequency(temperature: float) -> float:
    """k_B T / h in THz."""
    return BOLTZMANN * temperature / PLANCK / 1e12


@dataclass(frozen=True, eq=False)
class RateSet:
    """Per-mode absorption and emission rates."""

    absorption: np.ndarray
    emission: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.absorption, dtype=float)
        e = np.asarray(self.emission, dtype=float)
        if a.shape != e.shape or a.ndim != 1:
            raise ValueError("absorption and emission must be 1D arrays of equal length")
        if np.any(a < 0) or np.any(e < 0) or not (np.all(np.isfinite(a)) and np.all(np.isfinite(e))):
            raise ValueError("rates must be finite and non-negative")
        object.__setattr__(self, "absorption", a)
        object.__setattr__(self, "emission", e)

    def __len__(self):
        return self.absorption.size

    def scaled(self, factor: float) -> "RateSet":
        return RateSet(self.absorption * factor, self.emission * factor)


def ks_rates(
    frequencies,
    zpl: float = 545.0,
    temperature: float = 300.0,
    peak_rate: float = 1.0,
    bandwidth: float = 15.0,
) -> RateSet:
    """Analytic Kennard-Stepanov stand-in for measured dye spectra.

    Emission is a Gaussian of standard deviation ``bandwidth`` around the
    zero-phonon line; absorption follows from the Boltzmann factor
    ``A/E = exp((omega - zpl) / (k_B T / h))``.
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if peak_rate <= 0:
        raise ValueError("peak_rate must be positive")
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    detuning = np.asarray(frequencies, dtype=float) - zpl
    emission = peak_rate * np.exp(-(detuning**2) / (2.0 * bandwidth**2))
    absorption = emission * np.exp(detuning / thermal_frequency(temperature))
    return RateSet(absorption, emission)


def load_rate_table(path, frequencies) -> RateSet:
    """Interpolate a tabulated spectrum at the mode frequencies.

    The file is CSV with the exact header ``omega_THz,absorption_THz,emission_THz``,
    rows sorted by frequency and ``#`` comment lines allowed. No extrapolation.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"rate table not found: {path}")
    rows = []
    header_seen = False
    with path.open(newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = next(csv.reader([stripped]))
            if not header_seen:
                if tuple(fields) != RATE_TABLE_HEADER:
                    raise ValueError(
                        f"{path}:{lineno}: header must be {','.join(RATE_TABLE_HEADER)!r}"
                    )
                header_seen = True
                continue
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns, got {len(fields)}")
            try:
                rows.append([float(v) for v in fields])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value in {stripped!r}") from None
    if not header_seen:
        raise ValueError(f"{path}: missing header")
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two data rows")
    table = np.array(rows)
    omega = table[:, 0]
    if np.any(np.diff(omega) <= 0):
        raise ValueError(f"{path}: rows must be strictly increasing in omega_THz")
    freqs = np.asarray(frequencies, dtype=float)
    outside = (freqs < omega[0]) | (freqs > omega[-1])
    if np.any(outside):
        raise ValueError(
            f"mode frequencies {freqs[outside].tolist()} lie outside the table range "
            f"[{omega[0]}, {omega[-1]}] THz"
        )
    return RateSet(np.interp(freqs, omega, table[:, 1]), np.interp(freqs, omega, table[:, 2]))


@dataclass(frozen=True, eq=False)
class SpatialProfiles:
    """Molecular density (molecules/um), pump shape and the two molecular rates."""

    x: np.ndarray
    density: np.ndarray
    pump_shape: np.ndarray
    pump_rate: float
    decay_rate: float

    def with_pump(self, pump_rate: float) -> "SpatialProfiles":
        if pump_rate < 0:
            raise ValueError("pump_rate must be non-negative")
        return SpatialProfiles(self.x, self.density, self.pump_shape, float(pump_rate), self.decay_rate)


def build_profiles(
    basis: ModeBasis,
    n_mol: float,
    density_shape="uniform",
    pump_center: float = 0.0,
    pump_width: float | None = None,
    pump_rate: float = 0.0,
    decay_rate: float = 3e-5,
) -> SpatialProfiles:
    """Molecular density normalized to ``n_mol`` and a Gaussian pump spot.

    ``density_shape`` is ``"uniform"`` or ``("gaussian", width)``.
    """
    if n_mol <= 0:
        raise ValueError("n_mol must be positive")
    if pump_width is None:
        pump_width = basis.width
    if pump_width <= 0:
        raise ValueError("pump_width must be positive")
    if pump_rate < 0 or decay_rate <= 0:
        raise ValueError("pump_rate must be >= 0 and decay_rate > 0")
    x = basis.x
    if density_shape == "uniform":
        shape = np.ones_like(x)
    elif isinstance(density_shape, (tuple, list)) and density_shape[0] == "gaussian":
        sigma = float(density_shape[1])
        if sigma <= 0:
            raise ValueError("density width must be positive")
        shape = np.exp(-(x**2) / (2.0 * sigma**2))
    else:
        raise ValueError(f"unknown density_shape {density_shape!r}")
    density = shape * (n_mol / np.sum(shape * basis.weights))
    pump = np.exp(-((x - pump_center) ** 2) / (2.0 * pump_width**2))
    pump = pump / pump.max()
    return SpatialProfiles(x, density, pump, float(pump_rate), float(decay_rate))
