import math

import numpy as np
import pytest

from qstirling.bath import correlation_function, coupling_spectrum
from qstirling.drive import COMPRESS, DriveProtocol, HOLD
from qstirling.generator import (
    BASIS_LABELS,
    ConvergenceError,
    GeneratorMode,
    RateSet,
    apply_generator,
    asymptotic_state,
    bloch_generator,
    kernel_integrals,
    memory_rates,
    rotating_invariant_state,
    step_state,
)
from qstirling.propagator import evolve_unitaries
from qstirling.qops import (
    DensityMatrix,
    SIGMA_X,
    SIGMA_Z,
    eigenframe_at,
    gibbs_state,
    hamiltonian_operator,
    trace_distance,
)

Q1 = math.sqrt(0.49**2 / 4.0 - 0.01)
DELTA = 0.1


@pytest.fixture(scope="module")
def cold_table(cold_spec):
    return correlation_function(cold_spec, dt=0.02, t_max=80.0)


@pytest.fixture(scope="module")
def hold_rates(cold_table):
    """Rates after a long hold: effectively Markovian."""
    proto = DriveProtocol(0.49, 0.49, DELTA, HOLD, 60.0)
    grid = evolve_unitaries(proto, dt=0.05)
    frame = eigenframe_at(Q1, DELTA)
    return memory_rates(len(grid) - 1, grid, cold_table, frame)


@pytest.fixture(scope="module")
def ramp_rates(cold_table):
    """Rates mid-ramp: genuinely time-dependent with nonzero CR content."""
    proto = DriveProtocol(0.49, 0.78, DELTA, COMPRESS, 30.0)
    grid = evolve_unitaries(proto, dt=0.02)
    k = int(0.6 * len(grid))
    t_loc = grid.t[k]
    w = proto.omega_at(t_loc)
    q = math.sqrt(w * w / 4.0 - DELTA**2)
    return memory_rates(k, grid, cold_table, eigenframe_at(q, DELTA)), q


def rateset_from_gammas(gamma_down, gamma_up, q, delta):
    """Kernel vector realizing prescribed rotating rates with zero Lamb part."""
    root = math.hypot(q, delta)
    i_y = (gamma_down + gamma_up) / 4.0
    i_v = 1j * (gamma_down - gamma_up) / 4.0
    i_x = i_v * q / root
    i_z = -i_v * delta / root
    return RateSet(i_vec=np.array([i_x, i_y, i_z]), q=q, delta=delta)


def dissipator_from_table(rates: RateSet, frame):
    """Independent oracle: assemble the dissipator from the (nm, rs) table."""
    basis = {
        "ee": np.outer(frame.e_vec, frame.e_vec.conj()),
        "eg": np.outer(frame.e_vec, frame.g_vec.conj()),
        "ge": np.outer(frame.g_vec, frame.e_vec.conj()),
        "gg": np.outer(frame.g_vec, frame.g_vec.conj()),
    }
    r_down, r_up = rates.r_table()

    def apply(rho):
        out = np.zeros((2, 2), dtype=complex)
        for nm in BASIS_LABELS:
            for rs in BASIS_LABELS:
                e_nm, e_rs = basis[nm], basis[rs]
                out += r_down[(nm, rs)] * (e_nm @ rho @ e_rs - e_rs @ e_nm @ rho)
                out += r_up[(nm, rs)] * (e_rs @ rho @ e_nm - rho @ e_nm @ e_rs)
        return out

    return apply


def random_states(rng, n):
    for _ in range(n):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        rho = m @ m.conj().T
        yield DensityMatrix.from_matrix(rho / np.trace(rho).real)


class TestMemoryRates:
    def test_zero_at_window_start(self, cold_table):
        proto = DriveProtocol(0.49, 0.49, DELTA, HOLD, 10.0)
        grid = evolve_unitaries(proto, dt=0.05)
        rs = memory_rates(0, grid, cold_table, eigenframe_at(Q1, DELTA))
        assert np.abs(rs.i_vec).max() == 0.0
        assert rs.gamma_down == rs.gamma_up == 0.0

    def test_markovian_limit(self, hold_rates, cold_spec):
        g_plus = coupling_spectrum(0.49, cold_spec)
        g_minus = coupling_spectrum(-0.49, cold_spec)
        assert hold_rates.gamma_down == pytest.approx(2 * math.pi * g_plus, rel=0.05)
        assert hold_rates.gamma_up == pytest.approx(2 * math.pi * g_minus, rel=0.05)

    def test_detailed_balance_in_markov_limit(self, hold_rates, cold_spec):
        ratio = hold_rates.gamma_up / hold_rates.gamma_down
        assert ratio == pytest.approx(math.exp(-cold_spec.beta * 0.49), rel=0.05)

    def test_table_symmetries(self, ramp_rates):
        rates, _ = ramp_rates
        r_down, r_up = rates.r_table()
        # exact pair relations between the down and up tables
        assert r_down[("eg", "ge")] == pytest.approx(np.conj(r_up[("ge", "eg")]), abs=1e-10)
        assert r_down[("ge", "eg")] == pytest.approx(np.conj(r_up[("eg", "ge")]), abs=1e-10)
        # diagonal-sector relations likewise couple down to up (the
        # same-superscript version only holds for a real kernel)
        assert r_down[("ee", "ge")] == pytest.approx(-np.conj(r_up[("gg", "eg")]), abs=1e-10)
        assert r_up[("ee", "eg")] == pytest.approx(-np.conj(r_down[("gg", "ge")]), abs=1e-10)

    def test_named_rates_match_table_extraction(self, ramp_rates):
        rates, _ = ramp_rates
        r_down, r_up = rates.r_table()
        assert rates.gamma_down == pytest.approx(2 * r_down[("ge", "eg")].real, abs=1e-14)
        assert rates.gamma_up == pytest.approx(2 * np.conj(r_up[("ge", "eg")]).real, abs=1e-14)
        d_r = (r_down[("ge", "eg")].imag + np.conj(r_up[("ge", "eg")]).imag) / 2.0
        assert rates.delta_R == pytest.approx(d_r, abs=1e-14)
        assert rates.delta_CR == pytest.approx(r_down[("ee", "eg")].imag, abs=1e-14)

    def test_kernel_integrals_match_pointwise_rates(self, cold_table):
        proto = DriveProtocol(0.49, 0.78, DELTA, COMPRESS, 20.0)
        grid = evolve_unitaries(proto, dt=0.05)
        ivecs = kernel_integrals(grid, cold_table)
        for k in (0, 17, 150, len(grid) - 1):
            w = proto.omega_at(grid.t[k])
            q = math.sqrt(w * w / 4.0 - DELTA**2)
            rs = memory_rates(k, grid, cold_table, eigenframe_at(q, DELTA))
            assert np.abs(rs.i_vec - ivecs[k]).max() < 1e-12

    def test_window_truncation_is_negligible(self, cold_table):
        proto = DriveProtocol(0.49, 0.49, DELTA, HOLD, 70.0)
        grid = evolve_unitaries(proto, dt=0.05)
        full = kernel_integrals(grid, cold_table, window=None)
        trunc = kernel_integrals(grid, cold_table, window=52.0)
        scale = np.abs(full[-1]).max()
        assert np.abs(full - trunc).max() / scale < 2e-3


class TestApplyGenerator:
    def test_zero_rates_give_pure_commutator(self, rng):
        h = hamiltonian_operator(Q1, DELTA)
        frame = eigenframe_at(Q1, DELTA)
        zero = RateSet.zero(Q1, DELTA)
        for rho in random_states(rng, 20):
            d = apply_generator(rho, zero, frame, h, Q1)
            oracle = -1j * (h.matrix() @ rho.matrix() - rho.matrix() @ h.matrix())
            assert np.abs(d.matrix() - oracle).max() < 1e-14

    def test_trace_free_and_hermitian(self, ramp_rates, rng):
        rates, q = ramp_rates
        h = hamiltonian_operator(q, DELTA)
        frame = eigenframe_at(q, DELTA)
        for rho in random_states(rng, 20):
            d = apply_generator(rho, rates, frame, h, q)
            assert abs(d.trace()) < 1e-12
            assert d.is_hermitian(tol=1e-12)

    def test_full_generator_matches_table_assembly(self, ramp_rates, rng):
        rates, q = ramp_rates
        h = hamiltonian_operator(q, DELTA)
        frame = eigenframe_at(q, DELTA)
        oracle = dissipator_from_table(rates, frame)
        for rho in random_states(rng, 20):
            d = apply_generator(rho, rates, frame, h, q, GeneratorMode.FULL)
            m = rho.matrix()
            expected = -1j * (h.matrix() @ m - m @ h.matrix()) + oracle(m)
            assert np.abs(d.matrix() - expected).max() < 1e-12

    def test_rotating_part_matches_table_assembly(self, ramp_rates, rng):
        rates, q = ramp_rates
        h = hamiltonian_operator(q, DELTA)
        frame = eigenframe_at(q, DELTA)
        basis = {
            "eg": np.outer(frame.e_vec, frame.g_vec.conj()),
            "ge": np.outer(frame.g_vec, frame.e_vec.conj()),
        }
        r_down, r_up = rates.r_table()

        def rotating_oracle(m):
            out = -1j * (h.matrix() @ m - m @ h.matrix())
            for nm, mn in (("eg", "ge"), ("ge", "eg")):
                e_nm, e_mn = basis[nm], basis[mn]
                out += r_down[(nm, mn)] * (e_nm @ m @ e_mn - e_mn @ e_nm @ m)
                out += r_up[(nm, mn)] * (e_mn @ m @ e_nm - m @ e_nm @ e_mn)
            return out

        for rho in random_states(rng, 20):
            d = apply_generator(rho, rates, frame, h, q, GeneratorMode.ROTATING_ONLY)
            assert np.abs(d.matrix() - rotating_oracle(rho.matrix())).max() < 1e-12

    def test_full_bloch_y_row_is_hamiltonian_only(self, ramp_rates):
        # the memory dissipator never moves r_y; only the commutator does
        rates, q = ramp_rates
        a, b = bloch_generator(np.array([DELTA, 0.0, q]), [rates], GeneratorMode.FULL)
        a0, b0 = bloch_generator(np.array([DELTA, 0.0, q]), [RateSet.zero(q, DELTA)], GeneratorMode.FULL)
        assert np.abs(a[1] - a0[1]).max() < 1e-15
        assert b[1] == 0.0

    def test_cr_direction_does_not_commute(self):
        h = hamiltonian_operator(Q1, DELTA).matrix()
        x_cr = DELTA * SIGMA_Z - Q1 * SIGMA_X
        comm = h @ x_cr - x_cr @ h
        assert np.abs(comm).max() > 1e-3


class TestRotatingInvariantState:
    def test_fixed_point(self, ramp_rates):
        rates, q = ramp_rates
        frame = eigenframe_at(q, DELTA)
        rho_eq = rotating_invariant_state(rates, frame)
        d = apply_generator(rho_eq, rates, frame, hamiltonian_operator(q, DELTA), q,
                            GeneratorMode.ROTATING_ONLY)
        assert np.abs(d.coeffs()).max() < 1e-10

    def test_symmetric_rates_maximally_mixed(self):
        rates = rateset_from_gammas(0.1, 0.1, Q1, DELTA)
        rho = rotating_invariant_state(rates, eigenframe_at(Q1, DELTA))
        assert np.abs(rho.bloch()).max() < 1e-14

    def test_markov_limit_is_gibbs(self, hold_rates, cold_spec):
        frame = eigenframe_at(Q1, DELTA)
        rho = rotating_invariant_state(hold_rates, frame)
        gibbs = gibbs_state(hamiltonian_operator(Q1, DELTA), cold_spec.beta)
        assert trace_distance(rho, gibbs) < 5e-3

    def test_populations_normalized(self, ramp_rates):
        rates, q = ramp_rates
        rho = rotating_invariant_state(rates, eigenframe_at(q, DELTA))
        assert rho.eigenvalues().sum() == pytest.approx(1.0, abs=1e-14)

    def test_zero_total_rate_rejected(self):
        from qstirling.qops import InvalidParameterError

        with pytest.raises(InvalidParameterError):
            rotating_invariant_state(RateSet.zero(Q1, DELTA), eigenframe_at(Q1, DELTA))


class TestAsymptoticState:
    def test_rotating_mode_reaches_invariant_state(self, ramp_rates, rng):
        rates, q = ramp_rates
        frame = eigenframe_at(q, DELTA)
        target = rotating_invariant_state(rates, frame)
        seed = next(random_states(rng, 1))
        out = asymptotic_state(np.array([DELTA, 0.0, q]), [rates], seed,
                               mode=GeneratorMode.ROTATING_ONLY)
        assert trace_distance(out, target) < 1e-9

    def test_markov_frozen_close_to_gibbs(self, hold_rates, cold_spec):
        seed = DensityMatrix(0.0, 0.0, 0.0)
        out = asymptotic_state(np.array([DELTA, 0.0, Q1]), [hold_rates], seed)
        gibbs = gibbs_state(hamiltonian_operator(Q1, DELTA), cold_spec.beta)
        assert trace_distance(out, gibbs) < 1e-2

    def test_initial_state_independence(self, hold_rates, rng):
        outs = [
            asymptotic_state(np.array([DELTA, 0.0, Q1]), [hold_rates], rho).bloch()
            for rho in random_states(rng, 2)
        ]
        assert 0.5 * np.linalg.norm(outs[0] - outs[1]) < 1e-8

    def test_seed_verification_path(self, hold_rates):
        asymptotic_state(
            np.array([DELTA, 0.0, Q1]), [hold_rates], DensityMatrix(0, 0, 0), verify_seeds=3
        )

    def test_no_decay_raises(self):
        with pytest.raises(ConvergenceError):
            asymptotic_state(np.array([DELTA, 0.0, Q1]), [RateSet.zero(Q1, DELTA)],
                             DensityMatrix(0.3, 0.0, 0.0))


class TestStepState:
    def test_zero_generator_keeps_state(self):
        rho = DensityMatrix(0.1, 0.2, -0.3)
        zero = np.zeros(3, dtype=complex)
        h = (np.zeros(3), np.zeros(3), np.zeros(3))
        out = step_state(rho, 0.1, h, [zero], [zero], (Q1, Q1, Q1), DELTA)
        assert trace_distance(out, rho) < 1e-15

    def test_relaxation_matches_rate_equation(self):
        # constant Markovian rotating rates: populations relax at Gamma
        gamma_down, gamma_up = 0.08, 0.01
        gamma = gamma_down + gamma_up
        rates = rateset_from_gammas(gamma_down, gamma_up, Q1, DELTA)
        frame = eigenframe_at(Q1, DELTA)
        h_hat = np.array([DELTA, 0.0, Q1]) / math.hypot(Q1, DELTA)
        rho = gibbs_state(hamiltonian_operator(Q1, DELTA), 1.0)
        p0 = 0.5 * (1.0 + h_hat @ rho.bloch())
        p_inf = gamma_up / gamma
        dt, n = 0.05, 400
        h = np.array([DELTA, 0.0, Q1])
        for _ in range(n):
            rho = step_state(rho, dt, (h, h, h), [rates.i_vec], [rates.i_vec],
                             (Q1, Q1, Q1), DELTA, mode=GeneratorMode.ROTATING_ONLY)
        p_t = 0.5 * (1.0 + h_hat @ rho.bloch())
        oracle = p_inf + (p0 - p_inf) * math.exp(-gamma * n * dt)
        assert p_t == pytest.approx(oracle, abs=1e-6)

    def test_negativity_abort(self):
        from qstirling.qops import StateValidityError

        rho = DensityMatrix(0.0, 0.0, 1.0)
        bad = RateSet(i_vec=np.array([0.0, -0.5, 0.0], dtype=complex), q=Q1, delta=DELTA)
        h = np.array([DELTA, 0.0, Q1])
        with pytest.raises(StateValidityError):
            for _ in range(200):
                rho = step_state(rho, 0.5, (h, h, h), [bad.i_vec], [bad.i_vec],
                                 (Q1, Q1, Q1), DELTA)

    def test_fourth_order_self_convergence(self):
        # smooth synthetic drive and kernel vectors, linear in t so the
        # substage interpolation is exact and pure RK4 truncation remains
        i0 = np.array([0.002 + 0.001j, 0.02 + 0.005j, -0.003 + 0.002j])
        horizon = 40.0

        def ivec(t):
            return i0 * (1.0 + 0.3 * t / horizon)

        def drive(t):
            q = Q1 * (1.0 + 0.1 * math.sin(2.0 * math.pi * t / horizon))
            return np.array([DELTA, 0.0, q]), q

        def run(dt):
            from qstirling.generator import step_bloch

            r = np.array([0.1, 0.05, -0.4])
            for k in range(int(round(horizon / dt))):
                t = k * dt
                h0, q0 = drive(t)
                h1, q1 = drive(t + dt / 2)
                h2, q2 = drive(t + dt)
                r = step_bloch(r, dt, (h0, h1, h2), [ivec(t)], [ivec(t + dt)],
                               GeneratorMode.FULL, (q0, q1, q2), DELTA)
            return r

        d1 = np.linalg.norm(run(0.16) - run(0.08))
        d2 = np.linalg.norm(run(0.08) - run(0.04))
        assert d2 < 1e-7
        assert math.log2(d1 / d2) == pytest.approx(4.0, abs=0.3)


class TestLindbladContraction:
    def test_relative_entropy_decreases_monotonically(self, hold_rates, rng):
        # frozen rotating generator: relaxation contracts toward the
        # invariant state in relative entropy
        from qstirling.qops import entropy_functionals

        frame = eigenframe_at(Q1, DELTA)
        target = rotating_invariant_state(hold_rates, frame)
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        rho = DensityMatrix.from_matrix((m @ m.conj().T) / np.trace(m @ m.conj().T).real)
        h = np.array([DELTA, 0.0, Q1])
        last = entropy_functionals(rho, target)[1]
        for _ in range(60):
            for _ in range(30):
                rho = step_state(rho, 0.1, (h, h, h), [hold_rates.i_vec],
                                 [hold_rates.i_vec], (Q1, Q1, Q1), DELTA,
                                 mode=GeneratorMode.ROTATING_ONLY)
            now = entropy_functionals(rho, target)[1]
            assert now <= last + 1e-12
            last = now
        assert last < 1e-6
