"""Cavity mode basis: 1D Hermite-Gaussian modes on a uniform symmetric grid."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, pi, sqrt

import numpy as np

TAIL_TOLERANCE = 1e-6


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    """Trapezoid quadrature weights for a uniform grid."""
    dx = x[1] - x[0]
    w = np.full(x.shape, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


def symmetric_grid(extent: float, points: int) -> np.ndarray:
    """Uniform grid on [-extent, extent] that is bit-exactly mirror symmetric."""
    full = np.linspace(-extent, extent, points)
    half = -full[: points // 2][::-1]
    if points % 2:
        return np.concatenate([-half[::-1], [0.0], half])
    return np.concatenate([-half[::-1], half])


def hermite_gauss(p: int, x: np.ndarray, width: float) -> np.ndarray:
    """Normalized Hermite-Gaussian mode function of order ``p``.

    Evaluated with the orthonormal three-term recurrence so that high orders
    do not overflow. Units are length^(-1/2).
    """
    u = np.asarray(x, dtype=float) / width
    env = np.exp(-0.5 * u**2) / (pi**0.25 * sqrt(width))
    prev = np.zeros_like(u)
    cur = env
    for k in range(p):
        prev, cur = cur, sqrt(2.0 / (k + 1)) * u * cur - sqrt(k / (k + 1)) * prev
    return cur


def hermite_gauss_closed(p: int, x, width: float):
    """Same function through the explicit polynomial; kept as a cross-check."""
    from numpy.polynomial.hermite import hermval

    u = np.asarray(x, dtype=float) / width
    norm = 1.0 / sqrt(2.0**p * factorial(p) * sqrt(pi) * width)
    return norm * hermval(u, [0.0] * p + [1.0]) * np.exp(-0.5 * u**2)


@dataclass(frozen=True, eq=False)
class ModeBasis:
    """Mode table ``psi[p, g]`` on grid ``x`` plus the frequency ladder (THz)."""

    width: float
    x: np.ndarray
    psi: np.ndarray
    frequencies: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.psi.shape[0]

    @property
    def grid_points(self) -> int:
        return self.x.size

    @property
    def grid_extent(self) -> float:
        return float(self.x[-1])

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.x)

    def gram(self) -> np.ndarray:
        return (self.psi * self.weights) @ self.psi.T


def build_basis(
    n_modes: int,
    width: float = 10.0,
    grid_extent: float | None = None,
    grid_points: int = 513,
    omega0: float = 535.0,
    delta_omega: float = 1.7,
) -> ModeBasis:
    """Tabulate the lowest ``n_modes`` Hermite-Gaussian modes.

    Parameters
    ----------
    n_modes : int
        Number of modes M.
    width : float
        Mode length scale in micrometres.
    grid_extent : float, optional
        Half extent L of the grid; defaults to ``8 * width``.
    grid_points : int
        Number of grid nodes. An odd count puts a node at the origin.
    omega0, delta_omega : float
        Cutoff frequency and mode spacing (THz).

    Raises
    ------
    ValueError
        For non-positive sizes or a grid too small to hold the highest mode.
    """
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if width <= 0:
        raise ValueError("width must be positive")
    if grid_extent is None:
        grid_extent = 8.0 * width
    if grid_extent <= 0:
        raise ValueError("grid_extent must be positive")
    if grid_points < 64:
        raise ValueError("grid_points must be >= 64")
    if delta_omega <= 0:
        raise ValueError("delta_omega must be positive")

    x = symmetric_grid(grid_extent, grid_points)
    # evaluate on |x| and restore parity so psi_p(-x) == (-1)^p psi_p(x) exactly
    ax = np.abs(x)
    sign = np.where(x < 0, -1.0, 1.0)
    psi = np.empty((n_modes, grid_points))
    for p in range(n_modes):
        psi[p] = hermite_gauss(p, ax, width) * (sign if p % 2 else 1.0)

    top = np.abs(psi[-1])
    if max(top[0], top[-1]) >= TAIL_TOLERANCE * top.max():
        raise ValueError(
            f"grid_extent={grid_extent} truncates mode {n_modes - 1}; "
            "increase the extent"
        )
    freqs = omega0 + delta_omega * np.arange(n_modes)
    psi.setflags(write=False)
    x.setflags(write=False)
    freqs.setflags(write=False)
    return ModeBasis(width=float(width), x=x, psi=psi, frequencies=freqs)


def mode_value(basis: ModeBasis, p: int, x: float) -> float:
    """Linear interpolation of the stored table; exact at grid nodes."""
    if not 0 <= p < basis.n_modes:
        raise IndexError(f"mode index {p} out of range")
    if abs(x) > basis.grid_extent:
        raise ValueError(f"position {x} outside the grid")
    return float(np.interp(x, basis.x, basis.psi[p]))


def quadrature_drift(basis: ModeBasis) -> float:
    """Largest change of any Gram-matrix element when the grid is refined 2x."""
    fine = build_basis(
        basis.n_modes,
        basis.width,
        basis.grid_extent,
        2 * (basis.grid_points - 1) + 1,
        float(basis.frequencies[0]),
        float(basis.frequencies[1] - basis.frequencies[0]) if basis.n_modes > 1 else 1.0,
    )
    return float(np.abs(fine.gram() - basis.gram()).max())
