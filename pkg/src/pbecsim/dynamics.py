"""Coupled photon-correlation / molecular-excitation model and its steady states.

State is the equal-time correlation matrix ``N`` (``n_pq = <a_p^dag a_q>``) and the
local excitation fraction ``f(x)``. Per-molecule rates enter the photon side
through the overlap integrals and the molecular side through the local mode
intensities, so no extra scale factor appears anywhere.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .dye import RateSet, SpatialProfiles, ks_rates
from .modes import ModeBasis
from .overlap import OverlapMatrices, compute_h, pair_products, weighted_gram

log = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    """Raised on NaN/overflow; carries the offending state for inspection."""

    def __init__(self, message, n_matrix=None, excitation=None):
        super().__init__(message)
        self.n_matrix = n_matrix
        self.excitation = excitation


class ConvergenceError(RuntimeError):
    """Steady-state search gave up; ``state`` is the last iterate."""

    def __init__(self, message, state, residual_trace):
        super().__init__(message)
        self.state = state
        self.residual_trace = list(residual_trace)


@dataclass(frozen=True, eq=False)
class ModelParams:
    kappa: float
    rates: RateSet
    profiles: SpatialProfiles
    basis: ModeBasis
    diagonal_h: bool = False

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not self.profiles.decay_rate > 0:
            raise ValueError("decay rate must be positive")
        if self.profiles.pump_rate < 0:
            raise ValueError("pump rate must be non-negative")
        if len(self.rates) != self.basis.n_modes:
            raise ValueError("rate set length does not match the number of modes")
        if not np.array_equal(self.profiles.x, self.basis.x):
            raise ValueError("profiles and basis use different grids")

    @property
    def n_modes(self) -> int:
        return self.basis.n_modes

    @property
    def pump_rate(self) -> float:
        return self.profiles.pump_rate

    @property
    def decay_rate(self) -> float:
        return self.profiles.decay_rate

    @property
    def absorption(self) -> np.ndarray:
        return self.rates.absorption

    @property
    def emission(self) -> np.ndarray:
        return self.rates.emission

    @cached_property
    def h(self) -> np.ndarray:
        h = compute_h(self.basis, self.profiles)
        return np.diag(np.diag(h)) if self.diagonal_h else h

    @cached_property
    def _pairs(self) -> np.ndarray:
        return pair_products(self.basis.psi)

    @cached_property
    def _density_weights(self) -> np.ndarray:
        return self.profiles.density * self.basis.weights

    @cached_property
    def _amp_a(self) -> np.ndarray:
        return self.basis.psi * np.sqrt(self.absorption)[:, None]

    @cached_property
    def _amp_e(self) -> np.ndarray:
        return self.basis.psi * np.sqrt(self.emission)[:, None]

    @cached_property
    def _sqrt_ee(self) -> np.ndarray:
        return np.sqrt(np.outer(self.emission, self.emission))

    def with_pump(self, pump_rate: float) -> "ModelParams":
        return replace(self, profiles=self.profiles.with_pump(pump_rate))

    def f_matrix(self, excitation: np.ndarray) -> np.ndarray:
        return weighted_gram(self.basis.psi, self._density_weights * excitation, self._pairs)

    def drift(self, f_mat: np.ndarray) -> np.ndarray:
        """``K`` with ``dN/dt = K N + N K^T + S``."""
        a, e = self.absorption, self.emission
        return -0.5 * (self.kappa * np.eye(self.n_modes) + self.h * a[None, :] - f_mat * (a + e)[None, :])


@dataclass(frozen=True, eq=False)
class SteadyState:
    n_matrix: np.ndarray
    excitation: np.ndarray
    overlaps: OverlapMatrices
    residual_norm: float
    iterations: int
    pump_rate: float
    converged: bool = True
    residual_trace: list = field(default_factory=list, repr=False)

    @property
    def h_matrix(self) -> np.ndarray:
        return self.overlaps.h

    @property
    def f_matrix(self) -> np.ndarray:
        return self.overlaps.f

    @property
    def populations(self) -> np.ndarray:
        return np.diag(self.n_matrix).copy()


def _mode_intensity(amp: np.ndarray, n_matrix: np.ndarray) -> np.ndarray:
    # sum_pq amp_p(x) n_pq amp_q(x)
    return np.einsum("px,px->x", n_matrix @ amp, amp)


def rhs(n_matrix, excitation, params: ModelParams):
    """Time derivatives ``(dN/dt, df/dt)`` of the coupled model."""
    n = np.asarray(n_matrix, dtype=float)
    f = np.asarray(excitation, dtype=float)
    if not (np.all(np.isfinite(n)) and np.all(np.isfinite(f))):
        raise SimulationError("non-finite state passed to rhs", n, f)
    f_mat = params.f_matrix(f)
    k = params.drift(f_mat)
    dn = k @ n + n @ k.T + params._sqrt_ee * f_mat
    absorbed = _mode_intensity(params._amp_a, n)
    emitted = _mode_intensity(params._amp_e, n + np.eye(params.n_modes))
    gu = params.pump_rate * params.profiles.pump_shape
    df = gu * (1.0 - f) - params.decay_rate * f + (1.0 - f) * absorbed - f * emitted
    if not (np.all(np.isfinite(dn)) and np.all(np.isfinite(df))):
        raise SimulationError("overflow in rhs", n, f)
    return dn, df


def quasi_static_excitation(n_matrix, params: ModelParams) -> np.ndarray:
    """Excitation field that zeroes ``df/dt`` for a fixed photon state."""
    absorbed = _mode_intensity(params._amp_a, n_matrix)
    emitted = _mode_intensity(params._amp_e, n_matrix + np.eye(params.n_modes))
    gain = params.pump_rate * params.profiles.pump_shape + absorbed
    f = gain / (gain + params.decay_rate + emitted)
    return np.clip(f, 0.0, 1.0)


def initial_excitation(params: ModelParams) -> np.ndarray:
    gu = params.pump_rate * params.profiles.pump_shape
    return gu / (gu + params.decay_rate)


class _Packing:
    def __init__(self, m):
        self.m = m
        self.iu = np.triu_indices(m)

    def pack(self, n):
        return n[self.iu].copy()

    def unpack(self, v):
        n = np.zeros((self.m, self.m))
        n[self.iu] = v
        return n + n.T - np.diag(np.diag(n))


def _reduced_residual(v, params, packing):
    n = packing.unpack(v)
    f = quasi_static_excitation(n, params)
    f_mat = params.f_matrix(f)
    k = params.drift(f_mat)
    r = k @ n + n @ k.T + params._sqrt_ee * f_mat
    return r[packing.iu]


def _jacobian(v, r0, params, packing):
    m = v.size
    jac = np.empty((m, m))
    for i in range(m):
        step = 1e-7 * max(1.0, abs(v[i]))
        vp = v.copy()
        vp[i] += step
        jac[:, i] = (_reduced_residual(vp, params, packing) - r0) / step
    return jac


def _is_psd(n, rel=1e-8):
    lam = np.linalg.eigvalsh(n)
    return lam[0] >= -rel * max(abs(lam.sum()), 1e-300) - 1e-300


def residual_scale(params: ModelParams, n_matrix) -> float:
    return max(params.kappa, params.decay_rate) * (1.0 + float(np.abs(n_matrix).max()))


def solve_steady(
    params: ModelParams,
    init: SteadyState | None = None,
    tol: float = 1e-10,
    max_time: float = 1e12,
    max_iter: int = 2000,
) -> SteadyState:
    """Steady state by pseudo-transient continuation.

    The excitation field is slaved to the photon state (it relaxes pointwise
    in closed form), leaving ``M(M+1)/2`` unknowns. Each pseudo-time step is a
    linearly implicit Euler step ``(I/dt - J) dv = R``; ``dt`` grows with the
    residual ratio so the iteration turns into Newton near the root and
    stays on the physical (PSD, stable) branch far from it. The accepted
    state is checked against the full right-hand side.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    packing = _Packing(params.n_modes)
    n0 = np.zeros((params.n_modes, params.n_modes)) if init is None else np.array(init.n_matrix, dtype=float)
    v = packing.pack(n0)
    r = _reduced_residual(v, params, packing)
    dt = 1.0 / params.kappa
    t = 0.0
    trace = []
    converged = False
    it = 0
    for it in range(max_iter + 1):
        rn = float(np.abs(r).max())
        trace.append(rn)
        if rn <= tol * residual_scale(params, packing.unpack(v)):
            converged = True
            break
        if t > max_time or it == max_iter:
            break
        jac = _jacobian(v, r, params, packing)
        with np.errstate(all="ignore"):
            try:
                dv = np.linalg.solve(np.eye(v.size) / dt - jac, r)
            except np.linalg.LinAlgError:
                dv = np.full_like(v, np.nan)
        trial = v + dv
        ok = np.all(np.isfinite(trial)) and _is_psd(packing.unpack(trial))
        if ok:
            r_trial = _reduced_residual(trial, params, packing)
            ok = np.all(np.isfinite(r_trial))
        if not ok:
            dt *= 0.25
            if dt < 1e-12 / params.kappa:
                break
            continue
        t += dt
        growth = rn / max(float(np.abs(r_trial).max()), 1e-300)
        dt = min(dt * min(max(growth, 0.5), 10.0), 1e15)
        v, r = trial, r_trial

    if converged:
        v, r = _polish(v, r, params, packing)
    n = packing.unpack(v)
    f = quasi_static_excitation(n, params)
    dn, df = rhs(n, f, params)
    resid = max(float(np.abs(dn).max()), float(np.abs(df).max()))
    state = SteadyState(
        n_matrix=n,
        excitation=f,
        overlaps=OverlapMatrices(params.h, params.f_matrix(f)),
        residual_norm=resid,
        iterations=it,
        pump_rate=params.pump_rate,
        converged=converged,
        residual_trace=trace,
    )
    if not converged:
        raise ConvergenceError(
            f"no steady state at pump {params.pump_rate:g} THz after {it} iterations "
            f"(residual {trace[-1]:.3e})",
            state,
            trace,
        )
    return state


def solve_ramp(params: ModelParams, steps: int = 24, tol: float = 1e-10, max_iter: int = 2000) -> SteadyState:
    """Steady state reached by ramping the pump up from zero.

    A cold start far above threshold can stall; walking the pump up in
    ``steps`` equal increments and warm-starting each solve keeps every
    intermediate on the stable branch.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    ss = None
    for pump in np.linspace(0.0, params.pump_rate, steps + 1)[1:]:
        ss = solve_steady(params.with_pump(pump), init=ss, tol=tol, max_iter=max_iter)
    return ss


def _polish(v, r, params, packing, steps=3):
    # plain Newton steps, kept only while they lower the residual
    for _ in range(steps):
        rn = float(np.abs(r).max())
        if rn == 0.0:
            break
        jac = _jacobian(v, r, params, packing)
        try:
            dv = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            break
        trial = v + dv
        if not (np.all(np.isfinite(trial)) and _is_psd(packing.unpack(trial))):
            break
        r_trial = _reduced_residual(trial, params, packing)
        if float(np.abs(r_trial).max()) >= rn:
            break
        v, r = trial, r_trial
    return v, r


class Trajectory(NamedTuple):
    times: np.ndarray
    n_final: np.ndarray
    f_final: np.ndarray
    min_eig_ratio: np.ndarray
    f_min: np.ndarray
    f_max: np.ndarray
    fallbacks: int


def integrate(
    params: ModelParams,
    n_matrix,
    excitation,
    t_end: float,
    rtol: float = 1e-6,
    atol: float = 1e-9,
    dt0: float | None = None,
    dt_floor: float = 1e-9,
    max_steps: int = 200_000,
) -> Trajectory:
    """Explicit RK4 time integration with step-doubling error control.

    When the controller pushes the step below ``dt_floor`` the excitation
    field is relaxed part-way toward its quasi-static value (a damped
    fixed-point step) and integration resumes at the floor step.
    """
    n = np.array(n_matrix, dtype=float)
    f = np.array(excitation, dtype=float)
    m = params.n_modes

    def pack(nm, fv):
        return np.concatenate([nm.ravel(), fv])

    def deriv(y):
        dn, df = rhs(y[: m * m].reshape(m, m), y[m * m :], params)
        dn = 0.5 * (dn + dn.T)
        return pack(dn, df)

    def rk4(y, h):
        k1 = deriv(y)
        k2 = deriv(y + 0.5 * h * k1)
        k3 = deriv(y + 0.5 * h * k2)
        k4 = deriv(y + h * k3)
        return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    y = pack(n, f)
    t = 0.0
    dt = dt0 if dt0 is not None else 0.1 / params.kappa
    times, eigs, fmins, fmaxs = [0.0], [], [], []
    fallbacks = 0

    def record(y):
        nm = y[: m * m].reshape(m, m)
        lam = np.linalg.eigvalsh(nm)
        tr = max(abs(lam.sum()), 1e-300)
        eigs.append(lam[0] / tr)
        fmins.append(y[m * m :].min())
        fmaxs.append(y[m * m :].max())

    record(y)
    steps = 0
    while t < t_end and steps < max_steps:
        steps += 1
        h = min(dt, t_end - t)
        full = rk4(y, h)
        half = rk4(rk4(y, 0.5 * h), 0.5 * h)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(half))
        err = float(np.max(np.abs(half - full) / scale)) / 15.0
        if err <= 1.0 or h <= dt_floor:
            if err > 1.0:
                fallbacks += 1
                nm = half[: m * m].reshape(m, m)
                fq = quasi_static_excitation(nm, params)
                half[m * m :] += 0.5 * (fq - half[m * m :])
            y = half + (half - full) / 15.0 if err <= 1.0 else half
            t += h
            times.append(t)
            record(y)
        factor = 0.9 * (max(err, 1e-10)) ** (-0.2)
        dt = max(min(h * min(max(factor, 0.2), 5.0), 1e6), dt_floor)
    nm = y[: m * m].reshape(m, m)
    return Trajectory(
        np.array(times), 0.5 * (nm + nm.T), y[m * m :].copy(),
        np.array(eigs), np.array(fmins), np.array(fmaxs), fallbacks,
    )


class ClampDiagnostics(NamedTuple):
    clamp_value: float
    threshold_value: float
    clamp_ratio: float


def clamp_diagnostics(ss: SteadyState, params: ModelParams) -> ClampDiagnostics:
    a0, e0 = params.absorption[0], params.emission[0]
    clamp = (a0 + e0) * ss.f_matrix[0, 0]
    threshold = params.kappa + a0 * ss.h_matrix[0, 0]
    return ClampDiagnostics(float(clamp), float(threshold), float(clamp / threshold))


def ground_balance_terms(ss: SteadyState, params: ModelParams) -> dict:
    """Pieces of the ground-mode balance with off-diagonal ``h`` dropped."""
    a, e = params.absorption, params.emission
    n, fm, hm = ss.n_matrix, ss.f_matrix, ss.h_matrix
    corr = [(e[j] + a[j]) * fm[0, j] * n[j, 0] for j in range(1, params.n_modes)]
    return {
        "loss": n[0, 0] * params.kappa,
        "absorption": n[0, 0] * a[0] * hm[0, 0],
        "stimulated": n[0, 0] * (a[0] + e[0]) * fm[0, 0],
        "spontaneous": e[0] * fm[0, 0],
        "correlation": corr,
    }


def eq6_residual(ss: SteadyState, params: ModelParams) -> float:
    """Relative violation of the ground-mode population balance.

    ``|n00 (kappa + A0 h00 - (A0+E0) f00) - E0 f00 - sum_j (Ej+Aj) f0j nj0|``
    divided by the largest individual term.
    """
    t = ground_balance_terms(ss, params)
    corr = float(np.sum(t["correlation"])) if t["correlation"] else 0.0
    lhs = t["loss"] + t["absorption"] - t["stimulated"] - t["spontaneous"] - corr
    scale = max(
        abs(t["loss"]), abs(t["absorption"]), abs(t["stimulated"]), abs(t["spontaneous"]),
        max((abs(c) for c in t["correlation"]), default=0.0),
    )
    if scale == 0.0:
        return 0.0
    return float(abs(lhs) / scale)


def threshold_scan(sweep: Sequence[SteadyState], mode: int, n_threshold: float = 1.0):
    """First pump rate at which ``n_pp`` reaches ``n_threshold``.

    Linear interpolation between sweep points; ``None`` when never reached.
    """
    pumps = np.array([s.pump_rate for s in sweep])
    if np.any(np.diff(pumps) < 0):
        raise ValueError("sweep must be sorted by pump rate")
    pops = np.array([s.n_matrix[mode, mode] for s in sweep])
    hits = np.nonzero(pops >= n_threshold)[0]
    if hits.size == 0:
        return None
    k = hits[0]
    if k == 0:
        return float(pumps[0])
    y0, y1 = pops[k - 1], pops[k]
    return float(pumps[k - 1] + (n_threshold - y0) * (pumps[k] - pumps[k - 1]) / (y1 - y0))


def calibrate_peak_rate(
    basis: ModeBasis,
    profiles: SpatialProfiles,
    kappa: float,
    zpl: float = 545.0,
    temperature: float = 300.0,
    bandwidth: float = 15.0,
    target: float = 5.0,
) -> float:
    """Peak per-molecule rate that makes ``A0 h00 = target * kappa``."""
    unit = ks_rates(basis.frequencies, zpl, temperature, 1.0, bandwidth)
    h00 = compute_h(basis, profiles)[0, 0]
    return target * kappa / (unit.absorption[0] * h00)
