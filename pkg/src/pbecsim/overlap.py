"""Density-weighted mode overlap matrices h and f (trapezoid quadrature)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dye import SpatialProfiles
from .modes import ModeBasis


@dataclass(frozen=True, eq=False)
class OverlapMatrices:
    h: np.ndarray
    f: np.ndarray


def _check_grid(basis: ModeBasis, profiles: SpatialProfiles) -> None:
    if profiles.x.shape != basis.x.shape or not np.array_equal(profiles.x, basis.x):
        raise ValueError("basis and profiles are defined on different grids")


def pair_products(psi: np.ndarray) -> np.ndarray:
    """Rows ``psi_p * psi_q`` for the upper triangle ``p <= q``."""
    i, j = np.triu_indices(psi.shape[0])
    return psi[i] * psi[j]


def weighted_gram(psi: np.ndarray, weight: np.ndarray, pairs: np.ndarray | None = None) -> np.ndarray:
    """``sum_g psi_p psi_q weight_g``; only the upper triangle is summed, so the
    result is bit-exactly symmetric."""
    m = psi.shape[0]
    if pairs is None:
        pairs = pair_products(psi)
    i, j = np.triu_indices(m)
    out = np.empty((m, m))
    vals = pairs @ weight
    out[i, j] = vals
    out[j, i] = vals
    return out


def compute_h(basis: ModeBasis, profiles: SpatialProfiles) -> np.ndarray:
    _check_grid(basis, profiles)
    return weighted_gram(basis.psi, profiles.density * basis.weights)


def compute_f(basis: ModeBasis, profiles: SpatialProfiles, excitation) -> np.ndarray:
    _check_grid(basis, profiles)
    f = np.asarray(excitation, dtype=float)
    if f.shape != basis.x.shape:
        raise ValueError("excitation field must live on the basis grid")
    if np.any(f < 0) or np.any(f > 1) or not np.all(np.isfinite(f)):
        raise ValueError("excitation fraction must lie in [0, 1]")
    return weighted_gram(basis.psi, (profiles.density * f) * basis.weights)


def compute_overlaps(basis, profiles, excitation) -> OverlapMatrices:
    return OverlapMatrices(compute_h(basis, profiles), compute_f(basis, profiles, excitation))
