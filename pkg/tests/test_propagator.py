import math

import numpy as np
import pytest
from scipy.linalg import expm

from qstirling.drive import COMPRESS, DriveProtocol, HOLD
from qstirling.propagator import (
    StepSizeError,
    default_step,
    evolve_unitaries,
    evolve_window,
    two_time_op,
)
from qstirling.qops import InvalidParameterError, SIGMA_X, SIGMA_Y, SIGMA_Z


HOLD_PROTO = DriveProtocol(0.49, 0.49, 0.1, HOLD, 40.0)
RAMP_PROTO = DriveProtocol(0.49, 0.78, 0.1, COMPRESS, 40.0)


def hold_hamiltonian():
    q = math.sqrt(0.49**2 / 4.0 - 0.01)
    return q * SIGMA_Z + 0.1 * SIGMA_X


class TestUnitaries:
    def test_initial_condition(self):
        grid = evolve_unitaries(RAMP_PROTO, dt=0.05)
        assert np.abs(grid.U[0] - np.eye(2)).max() == 0.0

    def test_hold_matches_matrix_exponential(self):
        grid = evolve_unitaries(HOLD_PROTO, dt=0.02)
        oracle = expm(-1j * hold_hamiltonian() * 40.0)
        assert np.abs(grid.U[-1] - oracle).max() < 1e-9

    def test_unitarity(self):
        for proto in (HOLD_PROTO, RAMP_PROTO):
            grid = evolve_unitaries(proto, dt=0.05)
            for k in (len(grid) // 3, len(grid) - 1):
                u = grid.U[k]
                assert np.abs(u.conj().T @ u - np.eye(2)).max() < 1e-10

    def test_fourth_order_self_convergence(self):
        u1 = evolve_unitaries(RAMP_PROTO, dt=0.02).U[-1]
        u2 = evolve_unitaries(RAMP_PROTO, dt=0.01).U[-1]
        assert np.abs(u1 - u2).max() < 1e-8

    def test_drift_monitor_raises_on_coarse_step(self):
        long_ramp = DriveProtocol(0.49, 0.78, 0.1, COMPRESS, 4000.0)
        with pytest.raises(StepSizeError):
            evolve_unitaries(long_ramp, dt=5.0)

    def test_divisibility(self, rng):
        grid = evolve_unitaries(RAMP_PROTO, dt=0.02)
        n = len(grid)
        for _ in range(100):
            j, k = sorted(rng.integers(0, n, size=2))
            u_tk = grid.U[k]
            u_between = grid.U[k] @ grid.U[j].conj().T
            assert np.abs(u_between @ grid.U[j] - u_tk).max() < 1e-9

    def test_window_continuity(self):
        window = evolve_window([DriveProtocol(0.78, 0.78, 0.1, HOLD, 10.0), RAMP_PROTO], dt=0.05)
        k = int(window.seg_bounds[1])
        assert window.t[k] == pytest.approx(10.0)
        # the unitary is continuous: the boundary entry serves both segments
        assert len(window.t) == window.seg_bounds[-1] + 1


class TestTwoTimeOp:
    def test_coincident_times_return_sigma_y(self):
        grid = evolve_unitaries(RAMP_PROTO, dt=0.05)
        for k in (0, 150, len(grid) - 1):
            st = two_time_op(grid, k, k)
            assert np.abs(st.matrix() - SIGMA_Y).max() < 1e-10

    def test_traceless_real_pauli_vector(self, rng):
        grid = evolve_unitaries(RAMP_PROTO, dt=0.05)
        n = len(grid)
        for _ in range(50):
            j, k = sorted(rng.integers(0, n, size=2))
            st = two_time_op(grid, k, j)
            coeffs = st.coeffs()
            assert coeffs[0] == 0.0
            assert np.abs(coeffs.imag).max() < 1e-12

    def test_matches_direct_conjugation(self, rng):
        grid = evolve_unitaries(RAMP_PROTO, dt=0.05)
        n = len(grid)
        for _ in range(20):
            j, k = sorted(rng.integers(0, n, size=2))
            u_rel = grid.U[k] @ grid.U[j].conj().T
            oracle = u_rel @ SIGMA_Y @ u_rel.conj().T
            assert np.abs(two_time_op(grid, k, j).matrix() - oracle).max() < 1e-10

    def test_hold_time_translation_invariance(self):
        grid = evolve_unitaries(HOLD_PROTO, dt=0.02)
        lag = 200
        a = two_time_op(grid, 400, 400 - lag).coeffs()
        b = two_time_op(grid, 1200, 1200 - lag).coeffs()
        assert np.abs(a - b).max() < 1e-9

    def test_tau_after_t_rejected(self):
        grid = evolve_unitaries(RAMP_PROTO, dt=0.05)
        with pytest.raises(InvalidParameterError):
            two_time_op(grid, 10, 20)


def test_default_step_respects_bounds():
    dt = default_step(RAMP_PROTO)
    assert dt <= 0.02 * 2.0 * math.pi / 0.78 + 1e-15
    assert dt <= 40.0 / 200 + 1e-15
    short = DriveProtocol(0.49, 0.78, 0.1, COMPRESS, 0.4)
    assert default_step(short) <= 0.4 / 200 + 1e-15
