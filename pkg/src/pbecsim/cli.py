"""Command line entry point: ``pbecsim {steady,sweep,coherence,figure,calibrate}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .coherence import coherence
from .config import ConfigError, default_config_path, parse_config
from .dynamics import ConvergenceError, calibrate_peak_rate, clamp_diagnostics, eq6_residual, solve_ramp
from .sweep import FIGURES, figure_csv, metadata, run_sweep, sweep_csv, to_csv

LOG_ENV = "PBECSIM_LOG_LEVEL"


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="TOML config (default: shipped figure1.toml)")
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--tol", type=float, default=None, help="steady-state residual tolerance")

    ap = argparse.ArgumentParser(prog="pbecsim", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    st = sub.add_parser("steady", parents=[common], help="solve a single pump point")
    st.add_argument("--pump", type=float, default=None, help="pump rate in units of the decay rate")
    sub.add_parser("sweep", parents=[common], help="full pump sweep to sweep.csv")
    co = sub.add_parser("coherence", parents=[common], help="two-time traces at one pump point")
    co.add_argument("--pump", type=float, default=None)
    fi = sub.add_parser("figure", parents=[common], help="figure column subsets")
    fi.add_argument("which", choices=FIGURES)
    sub.add_parser("calibrate", parents=[common], help="print the calibrated dye peak rate")
    return ap


def _load(args):
    cfg = parse_config(args.config or default_config_path())
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    if args.tol is not None:
        cfg = replace(cfg, tol=args.tol)
    out = args.out if args.out is not None else Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def _single_point(cfg, pump):
    pump = cfg.pump_max if pump is None else pump
    params = cfg.model(pump)
    return pump, params, solve_ramp(params, tol=cfg.tol, max_iter=cfg.max_iter)


def cmd_steady(args) -> int:
    cfg, out = _load(args)
    pump, params, ss = _single_point(cfg, args.pump)
    clamp = clamp_diagnostics(ss, params)
    doc = {
        **metadata(cfg),
        "pump_over_gdown": pump,
        "n_matrix": ss.n_matrix.tolist(),
        "f_matrix": ss.f_matrix.tolist(),
        "h_matrix": ss.h_matrix.tolist(),
        "excitation_max": float(ss.excitation.max()),
        "clamp_ratio": clamp.clamp_ratio,
        "eq6_residual": eq6_residual(ss, params),
        "residual_norm": ss.residual_norm,
        "iterations": ss.iterations,
    }
    path = out / "steady.json"
    path.write_text(json.dumps(doc, indent=2))
    print(f"n = {np.round(ss.populations, 4).tolist()}  clamp_ratio = {clamp.clamp_ratio:.6f}  -> {path}")
    return 0


def cmd_sweep(args) -> int:
    cfg, out = _load(args)
    res = run_sweep(cfg)
    path = out / "sweep.csv"
    path.write_text(sweep_csv(res))
    bad = [r["pump_over_gdown"] for r in res.rows if not r["converged"]]
    print(f"{len(res.rows)} points -> {path}" + (f"; NOT converged at {bad}" if bad else ""))
    return 0 if not bad else 2


def cmd_coherence(args) -> int:
    cfg, out = _load(args)
    pump, params, ss = _single_point(cfg, args.pump)
    coh = coherence(params, ss, samples=cfg.coherence_samples)
    cols = ["t_ps"] + [f"c_{p}{p}" for p in range(cfg.n_modes)]
    rows = [dict(t_ps=t, **{f"c_{p}{p}": coh.traces[p, k] for p in range(cfg.n_modes)})
            for k, t in enumerate(coh.times)]
    path = out / "coherence.csv"
    path.write_text(to_csv(cols, rows, {**metadata(cfg), "pump_over_gdown": pump,
                                        "tau_ps": coh.tau.tolist(), "tau_closed_ps": coh.tau_closed.tolist()}))
    print(f"tau0 = {coh.tau[0]:.6g} ps (closed form {coh.tau_closed[0]:.6g} ps) -> {path}")
    return 0


def cmd_figure(args) -> int:
    cfg, out = _load(args)
    res = run_sweep(cfg)
    path = out / f"{args.which}.csv"
    path.write_text(figure_csv(res, args.which))
    print(f"-> {path}")
    return 0 if res.converged else 2


def cmd_calibrate(args) -> int:
    cfg, _ = _load(args)
    basis = cfg.basis()
    params = cfg.model(0.0, basis)
    peak = calibrate_peak_rate(basis, params.profiles, cfg.kappa, cfg.zpl, cfg.temperature,
                               cfg.bandwidth, cfg.calibration_target)
    a0h00 = params.absorption[0] * params.h[0, 0]
    print(f"peak_rate = {peak!r} THz um  (A0 h00 / kappa = {a0h00 / cfg.kappa:.6g})")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get(LOG_ENV, "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    handler = {"steady": cmd_steady, "sweep": cmd_sweep, "coherence": cmd_coherence,
               "figure": cmd_figure, "calibrate": cmd_calibrate}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
