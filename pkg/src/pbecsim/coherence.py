"""Two-time correlations, coherence times and correlation-matrix analysis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm
from scipy.optimize import linear_sum_assignment

from .dynamics import ModelParams, SteadyState

DIVERGENT = np.inf
_EIG_COND_LIMIT = 1e8


def generator(params: ModelParams, ss: SteadyState) -> np.ndarray:
    """``G = (kappa + A h - (A+E) f) / 2`` with rates on the row index."""
    a, e = params.absorption, params.emission
    m = params.n_modes
    return 0.5 * (params.kappa * np.eye(m) + a[:, None] * ss.h_matrix - (a + e)[:, None] * ss.f_matrix)


def _propagator_eig(gen):
    lam, vec = np.linalg.eig(gen)
    if np.linalg.cond(vec) > _EIG_COND_LIMIT:
        return None
    inv = np.linalg.inv(vec)

    def at(t):
        out = (vec * np.exp(-lam * t)) @ inv
        return out.real

    return at


def propagator(gen, t, method: str = "auto"):
    """``exp(-G t)``; eigendecomposition first, scaling-and-squaring if defective."""
    if t == 0:
        return np.eye(np.shape(gen)[0])
    if method in ("auto", "eig"):
        at = _propagator_eig(gen)
        if at is not None:
            return at(t)
        if method == "eig":
            raise np.linalg.LinAlgError("generator is numerically defective")
    return expm(-gen * t)


class Traces(NamedTuple):
    times: np.ndarray
    values: np.ndarray  # (M, samples): |c_pp(t)| / n_pp


def propagate(gen, ss: SteadyState, t_max: float, samples: int = 2001, method: str = "auto") -> Traces:
    """Evolve every correlation vector ``c_p`` from ``c_pq(0) = n_pq``.

    Returns the normalized diagonal traces; modes with zero population give NaN.
    """
    if t_max <= 0 or samples < 2:
        raise ValueError("need t_max > 0 and at least two samples")
    n = ss.n_matrix
    times = np.linspace(0.0, t_max, samples)
    m = n.shape[0]
    out = np.empty((m, samples))
    at = _propagator_eig(gen) if method in ("auto", "eig") else None
    if at is None and method == "eig":
        raise np.linalg.LinAlgError("generator is numerically defective")
    diag = np.diag(n)
    with np.errstate(invalid="ignore", divide="ignore"):
        for k, t in enumerate(times):
            if k == 0:
                c = n
            else:
                c = (at(t) if at is not None else expm(-gen * t)) @ n
            # column p of c is the propagated vector c_p (n is symmetric)
            out[:, k] = np.abs(np.diag(c)) / diag
    out[diag <= 0, :] = np.nan
    return Traces(times, out)


def tau_from_trace(trace, dt: float) -> float:
    """1/e time of a normalized decay, linearly interpolated.

    Falls back to a log-linear least-squares fit over the second half of the
    window when the trace never crosses 1/e. Returns ``inf`` for traces that
    do not decay.
    """
    y = np.asarray(trace, dtype=float)
    if y.size < 2 or not np.all(np.isfinite(y)):
        raise ValueError("trace must be finite with at least two samples")
    if abs(y[0] - 1.0) > 1e-9:
        raise ValueError("trace must start at 1")
    target = np.exp(-1.0)
    below = np.nonzero(y <= target)[0]
    if below.size:
        k = below[0]
        y0, y1 = y[k - 1], y[k]
        return float(dt * (k - 1 + (y0 - target) / (y0 - y1)))
    tail = slice(y.size // 2, None)
    t = np.arange(y.size)[tail] * dt
    if np.any(y[tail] <= 0):
        return DIVERGENT
    slope, _ = np.polyfit(t, np.log(y[tail]), 1)
    if slope >= -1e-15:
        return DIVERGENT
    return float(-1.0 / slope)


def tau_closed_form(params: ModelParams, ss: SteadyState) -> np.ndarray:
    """Diagonal-approximation coherence times ``2 / (kappa + A h - (A+E) f)``."""
    a, e = params.absorption, params.emission
    den = params.kappa + a * np.diag(ss.h_matrix) - (a + e) * np.diag(ss.f_matrix)
    with np.errstate(divide="ignore"):
        tau = np.where(den > 0, 2.0 / np.where(den > 0, den, 1.0), DIVERGENT)
    return tau


@dataclass(frozen=True)
class Analysis:
    fractions: np.ndarray
    phase_lock: float
    ne: float
    nc: float
    denominator: float

    @property
    def split_defined(self) -> bool:
        return self.denominator > 0


def condensate_fractions(n_matrix) -> np.ndarray:
    """Eigenvalue shares of ``N`` labelled by their best-matching bare mode."""
    lam, vec = np.linalg.eigh(n_matrix)
    total = lam.sum()
    m = lam.size
    if total <= 0:
        return np.zeros(m)
    # one-to-one labelling that maximizes total overlap; ties resolve to lower index
    rows, cols = linear_sum_assignment(-(vec**2).T)
    fr = np.zeros(m)
    fr[cols] = lam[rows] / total
    return fr


def analyze(ss: SteadyState, params: ModelParams, partner: int = 2) -> Analysis:
    """Condensate fractions, phase locking of modes 0 and ``partner`` and the
    split of the ground population into emission-driven and correlation-driven
    parts."""
    n, fm, hm = ss.n_matrix, ss.f_matrix, ss.h_matrix
    a, e = params.absorption, params.emission
    m = params.n_modes
    q = min(partner, m - 1)
    lock = 0.0
    if q > 0 and n[0, 0] > 0 and n[q, q] > 0:
        lock = float(abs(n[0, q]) / np.sqrt(n[0, 0] * n[q, q]))
    den = float(params.kappa + a[0] * hm[0, 0] - (a[0] + e[0]) * fm[0, 0])
    if den > 0:
        ne = float(e[0] * fm[0, 0] / den)
        nc = float(sum((e[j] + a[j]) * fm[0, j] * n[j, 0] for j in range(1, m)) / den)
    else:
        ne = nc = float("nan")
    return Analysis(condensate_fractions(n), lock, ne, nc, den)


@dataclass(frozen=True)
class CoherenceResult:
    times: np.ndarray
    traces: np.ndarray
    tau: np.ndarray
    tau_closed: np.ndarray
    fractions: np.ndarray
    phase_lock: float
    ne_nc: tuple


def coherence(params: ModelParams, ss: SteadyState, t_max: float | None = None, samples: int = 2001) -> CoherenceResult:
    """Full coherence analysis of one steady state."""
    gen = generator(params, ss)
    tau_c = tau_closed_form(params, ss)
    if t_max is None:
        finite = tau_c[np.isfinite(tau_c)]
        t_max = 5.0 * float(finite.max()) if finite.size else 50.0 / params.kappa
    tr = propagate(gen, ss, t_max, samples)
    dt = tr.times[1] - tr.times[0]
    tau = np.array([tau_from_trace(v, dt) if np.all(np.isfinite(v)) else np.nan for v in tr.values])
    an = analyze(ss, params)
    return CoherenceResult(tr.times, tr.values, tau, tau_c, an.fractions, an.phase_lock, (an.ne, an.nc))
