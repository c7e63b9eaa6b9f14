import time

import numpy as np
import pytest

from pbecsim import ModelParams, RateSet, build_basis, build_profiles, parse_config, run_sweep
from pbecsim.config import default_config_path
from pbecsim.dynamics import calibrate_peak_rate
from pbecsim.dye import ks_rates

GDOWN = 3e-5


def small_model(n_modes=3, pump=0.0, density="uniform", grid_points=257, diagonal_h=False,
                kappa=0.2, width_factor=1.2, target=5.0):
    """Reduced-grid model with the default dye stand-in; ``pump`` in units of the decay rate."""
    basis = build_basis(n_modes, grid_points=grid_points)
    prof = build_profiles(basis, 1e9, density, 0.0, width_factor * basis.width, pump * GDOWN, GDOWN)
    peak = calibrate_peak_rate(basis, prof, kappa, target=target)
    rates = ks_rates(basis.frequencies, peak_rate=peak)
    return ModelParams(kappa, rates, prof, basis, diagonal_h=diagonal_h)


def bare_model(n_modes=2, kappa=0.2, grid_points=129):
    basis = build_basis(n_modes, grid_points=grid_points)
    prof = build_profiles(basis, 1e9, "uniform", 0.0, None, 0.0, GDOWN)
    zero = np.zeros(n_modes)
    return ModelParams(kappa, RateSet(zero, zero), prof, basis)


@pytest.fixture(scope="session")
def default_config():
    return parse_config(default_config_path())


@pytest.fixture(scope="session")
def default_sweep(default_config):
    t0 = time.perf_counter()
    res = run_sweep(default_config)
    res.elapsed = time.perf_counter() - t0
    return res


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
