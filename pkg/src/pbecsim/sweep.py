"""Pump sweeps, per-point diagnostics and CSV output."""

from __future__ import annotations

import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .coherence import coherence, tau_closed_form
from .config import SweepConfig
from .dynamics import ConvergenceError, ModelParams, SteadyState, clamp_diagnostics, eq6_residual, solve_steady

log = logging.getLogger(__name__)

FIGURES = ("fig1", "fig2", "fig3a", "fig3b")


def sweep_columns(n_modes: int) -> list[str]:
    return (
        ["pump_over_gdown"]
        + [f"n_{p}" for p in range(n_modes)]
        + ["tau0_ps", "tau0_closed_ps", "clamp_ratio", "f00", "f02", "ne", "nc", "n02",
           "p0", "p2", "p4", "eq6_residual", "iterations", "converged"]
    )


def schema_string(n_modes: int) -> str:
    return ",".join(sweep_columns(n_modes))


def _get(arr, *idx):
    try:
        return float(arr[idx])
    except IndexError:
        return math.nan


def point_row(params: ModelParams, ss: SteadyState, pump_over_gdown: float,
              samples: int = 2001, window: float = 5.0) -> dict:
    """All per-point quantities; superset of the CSV columns."""
    tau_c = tau_closed_form(params, ss)
    finite = tau_c[np.isfinite(tau_c)]
    t_max = window * float(finite.max()) if finite.size else window * 2.0 / params.kappa
    coh = coherence(params, ss, t_max=t_max, samples=samples)
    clamp = clamp_diagnostics(ss, params)
    n, fm = ss.n_matrix, ss.f_matrix
    row = {"pump_over_gdown": pump_over_gdown}
    for p in range(params.n_modes):
        row[f"n_{p}"] = float(n[p, p])
    row.update(
        tau0_ps=float(coh.tau[0]),
        tau0_closed_ps=float(coh.tau_closed[0]),
        clamp_ratio=clamp.clamp_ratio,
        f00=float(fm[0, 0]),
        f02=_get(fm, 0, 2),
        ne=float(coh.ne_nc[0]),
        nc=float(coh.ne_nc[1]),
        n02=_get(n, 0, 2),
        p0=_get(coh.fractions, 0),
        p2=_get(coh.fractions, 2),
        p4=_get(coh.fractions, 4),
        eq6_residual=eq6_residual(ss, params),
        iterations=int(ss.iterations),
        converged=int(ss.converged),
        clamp_value=clamp.clamp_value,
        threshold_value=clamp.threshold_value,
        phase_lock=float(coh.phase_lock),
        fractions=[float(v) for v in coh.fractions],
        n20=_get(n, 2, 0),
        f20=_get(fm, 2, 0),
        residual_norm=float(ss.residual_norm),
    )
    return row


def _point_job(args):
    params, ss, s, samples, window = args
    return point_row(params, ss, s, samples, window)


@dataclass
class SweepResult:
    config: SweepConfig
    pumps: np.ndarray
    states: list
    rows: list
    params: list

    @property
    def converged(self) -> bool:
        return all(r["converged"] for r in self.rows)

    def column(self, name) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)

    def populations(self) -> np.ndarray:
        return np.array([s.populations for s in self.states])


def run_sweep(config: SweepConfig, workers: int | None = None, tol: float | None = None) -> SweepResult:
    """Solve every pump point (warm-started low to high) and tabulate diagnostics.

    Steady states are found sequentially so each point starts from its
    neighbour; the per-point coherence analysis is independent and is
    fanned out to ``workers`` processes. Output is identical for any worker count.
    """
    workers = config.workers if workers is None else workers
    tol = config.tol if tol is None else tol
    basis = config.basis()
    pumps = config.pump_values()
    base = config.model(0.0, basis)
    states, plist = [], []
    prev = None
    for s in pumps:
        params = base.with_pump(s * config.decay_rate)
        try:
            ss = solve_steady(params, init=prev, tol=tol, max_iter=config.max_iter)
        except ConvergenceError as exc:
            log.warning("pump %.4g: %s", s, exc)
            ss = exc.state
        if ss.converged:
            prev = ss
        states.append(ss)
        plist.append(params)
        log.info("pump %.4f Gdown: n0=%.4g iterations=%d", s, ss.n_matrix[0, 0], ss.iterations)
    jobs = [(p, ss, float(s), config.coherence_samples, config.coherence_window)
            for p, ss, s in zip(plist, states, pumps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_point_job, jobs))
    else:
        rows = [_point_job(j) for j in jobs]
    return SweepResult(config, pumps, states, rows, plist)


def format_value(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def to_csv(columns, rows, metadata: dict | None = None) -> str:
    buf = io.StringIO()
    for key, value in (metadata or {}).items():
        buf.write(f"# {key}: {value}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(format_value(r[c]) for c in columns) + "\n")
    return buf.getvalue()


def metadata(config: SweepConfig) -> dict:
    return {"pbecsim_version": __version__, "config_hash": config.digest()}


def sweep_csv(result: SweepResult) -> str:
    return to_csv(sweep_columns(result.config.n_modes), result.rows, metadata(result.config))


def figure_data(result: SweepResult, which: str):
    """Column subset and rows for one figure panel."""
    m = result.config.n_modes
    if which == "fig1":
        cols = ["pump_over_gdown", "tau0_ps", "tau0_closed_ps"] + [f"n_{p}" for p in range(m)]
        rows = result.rows
    elif which == "fig2":
        cols = ["pump_over_gdown", "clamp_value", "threshold_value"]
        rows = result.rows
    elif which == "fig3a":
        cols = ["pump_over_gdown", "n0", "ne", "nc"]
        rows = [{**r, "n0": r["n_0"]} for r in result.rows]
    elif which == "fig3b":
        cols = ["pump_over_gdown", "n0", "n2", "abs_n02", "sqrt_n0n2"]
        rows = [
            {**r, "n0": r["n_0"], "n2": r.get("n_2", math.nan), "abs_n02": abs(r["n02"]),
             "sqrt_n0n2": math.sqrt(max(r["n_0"] * r.get("n_2", math.nan), 0.0))}
            for r in result.rows
        ]
    else:
        raise ValueError(f"unknown figure {which!r}; choose from {', '.join(FIGURES)}")
    return cols, rows


def figure_csv(result: SweepResult, which: str) -> str:
    cols, rows = figure_data(result, which)
    return to_csv(cols, rows, {**metadata(result.config), "figure": which})
