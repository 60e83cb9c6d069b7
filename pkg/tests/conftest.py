import numpy as np
import pytest

from qstirling.bath import BathSpec
from qstirling.cli import RunConfig
from qstirling.cycle import run_cycle

# Reference parameter set used throughout (beta_h=2, beta_c=5, g1, f=2).
OMEGA_R = 0.6
OMEGA_1 = 0.49
OMEGA_2 = 0.78
DELTA = 0.1
BETA_H = 2.0
BETA_C = 5.0
G_COLD = 0.2
G_HOT = 0.17


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def hot_spec():
    return BathSpec(beta=BETA_H, g=G_HOT, omega_res=OMEGA_R, f=2.0, label="hot")


@pytest.fixture(scope="session")
def cold_spec():
    return BathSpec(beta=BETA_C, g=G_COLD, omega_res=OMEGA_R, f=2.0, label="cold")


@pytest.fixture(scope="session")
def run_config():
    return RunConfig().validate()


# Shared dynamical runs (seconds each, reused across test modules).

@pytest.fixture(scope="session")
def default_run(run_config):
    return run_cycle(run_config.cycle_config())


@pytest.fixture(scope="session")
def slow_run(run_config):
    return run_cycle(run_config.cycle_config(tau_ab=20.0, tau_cd=20.0))


@pytest.fixture(scope="session")
def fast_run(run_config):
    return run_cycle(run_config.cycle_config(tau_ab=0.01, tau_cd=0.01))


@pytest.fixture(scope="session")
def fs_run(run_config):
    """Fast compression, slow expansion."""
    return run_cycle(run_config.cycle_config(tau_ab=0.01, tau_cd=20.0))


@pytest.fixture(scope="session")
def sf_run(run_config):
    """Slow compression, fast expansion."""
    return run_cycle(run_config.cycle_config(tau_ab=20.0, tau_cd=0.01))
