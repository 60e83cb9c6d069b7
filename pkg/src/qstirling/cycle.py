"""Four-stroke cycle orchestration: windows, trajectories, and sweeps.

A run integrates two full cycles from the hot-bath Gibbs state at the
high-frequency point, discards the first cycle as a transient, and
reports the second.  The natural integration unit is not the stroke but
the coupling window: the hot bath stays connected from the start of d->a
through the end of a->b, the cold bath from b->c through c->d, so the
memory integral accumulates across the stroke boundary inside a window
and resets only when the coupling actually switches (at b and d).  Two
cycles therefore decompose into five windows,

    [ab] [bc cd] [da ab'] [bc' cd'] [da'],

each with its own propagator grid and kernel history.  Window-boundary
times are recorded twice (once per side) because the generator, and with
it the effective Hamiltonian, genuinely jumps there.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import bath as bath_mod
from .bath import BathSpec
from .drive import StrokeSchedule, STROKE_IDS
from .generator import (
    GeneratorMode,
    RateSet,
    asymptotic_state,
    bloch_generator,
    kernel_integrals,
    step_bloch,
)
from .propagator import evolve_window
from .qops import (
    DensityMatrix,
    InvalidParameterError,
    entropy_functionals,
    gibbs_state,
    hamiltonian_operator,
    trace_distance,
)

THERMALIZATION_WARN = 1e-2

# kernel window: max(KERNEL_TAUC_FACTOR * tau_C, KERNEL_TAUB_FACTOR * tau_B)
KERNEL_TAUC_FACTOR = 10.0
KERNEL_TAUB_FACTOR = 5.0
PHI_SAMPLES_PER_TAUB = 512


@dataclass(frozen=True)
class CycleConfig:
    """Everything one dynamical run needs."""

    sched: StrokeSchedule
    cold: BathSpec
    hot: BathSpec
    dt: float | None = None
    mode: GeneratorMode = GeneratorMode.FULL
    kernel_full_history: bool = False
    kernel_tauc_factor: float = KERNEL_TAUC_FACTOR
    kernel_taub_factor: float = KERNEL_TAUB_FACTOR
    negativity_tol: float = 1e-8

    def bath(self, label: str) -> BathSpec:
        return self.hot if label == "hot" else self.cold


@dataclass
class StrokeSlice:
    cycle: int
    stroke: str
    bath: str
    lo: int          # first record index (inclusive)
    hi: int          # last record index (inclusive)
    starts_window: bool
    omega_rate: float = 0.0  # d(omega)/dt, constant within a stroke


@dataclass
class Trajectory:
    """Per-grid-point records over the full two-cycle run.

    Window-boundary instants appear twice, once with each side's
    generator.  ``stroke_slices`` addresses the records of each stroke;
    cycle 1 is the discarded transient.
    """

    t: np.ndarray
    r: np.ndarray           # (N,3) Bloch vectors
    rdot: np.ndarray        # (N,3) generator output at the point's own rates
    q: np.ndarray
    omega: np.ndarray
    ivec: np.ndarray        # (N,3) complex kernel vectors of the active bath
    bath: np.ndarray        # (N,) 'hot'/'cold'
    stroke_slices: list[StrokeSlice] = field(default_factory=list)
    delta: float = 0.0

    def slice_at(self, idx: int) -> StrokeSlice:
        """The stroke owning a record index (boundaries: earliest match)."""
        for s in self.stroke_slices:
            if s.lo <= idx <= s.hi:
                return s
        raise InvalidParameterError(f"record {idx} outside every stroke")

    def h_vectors(self) -> np.ndarray:
        h = np.zeros((len(self.t), 3))
        h[:, 0] = self.delta
        h[:, 2] = self.q
        return h

    def polarization(self) -> np.ndarray:
        return np.einsum("ni,ni->n", self.h_vectors(), self.r) / self.omega

    def lamb_coefficients(self):
        """(lamb_R, lamb_CR) arrays from the active-bath kernel vectors."""
        root = np.hypot(self.q, self.delta)
        iu = (self.delta * self.ivec[:, 0] + self.q * self.ivec[:, 2]) / root
        iv = (self.q * self.ivec[:, 0] - self.delta * self.ivec[:, 2]) / root
        return -iv.real / root, -iu.real / root

    def rate_diagnostics(self):
        """(gamma_down, gamma_up, delta_R, delta_CR) arrays (table values)."""
        root = np.hypot(self.q, self.delta)
        iu = (self.delta * self.ivec[:, 0] + self.q * self.ivec[:, 2]) / root
        iv = (self.q * self.ivec[:, 0] - self.delta * self.ivec[:, 2]) / root
        iy = self.ivec[:, 1]
        return (
            2.0 * (iy.real + iv.imag),
            2.0 * (iy.real - iv.imag),
            iy.imag,
            iu.real,
        )

    def slices(self, cycle: int) -> list[StrokeSlice]:
        return [s for s in self.stroke_slices if s.cycle == cycle]

    def state_at_index(self, idx: int) -> DensityMatrix:
        return DensityMatrix.from_bloch(self.r[idx])

    def rate_set_at(self, idx: int) -> RateSet:
        return RateSet(i_vec=self.ivec[idx], q=self.q[idx], delta=self.delta)


@dataclass
class RunResult:
    config: CycleConfig
    trajectory: Trajectory
    rho_a: DensityMatrix
    rho_b: DensityMatrix
    rho_c: DensityMatrix
    rho_d: DensityMatrix
    rho_a_end: DensityMatrix
    rho_b_star: DensityMatrix
    rho_d_star: DensityMatrix
    periodicity_residual: float
    thermalization_c: float
    thermalization_a: float
    tau_scales: dict


_PHI_CACHE: dict = {}


def correlation_tables(config: CycleConfig, horizon: float):
    tables = {}
    for label in ("cold", "hot"):
        spec = config.bath(label)
        key = (spec.beta, spec.g, spec.omega_res, spec.f, round(horizon, 9))
        if key not in _PHI_CACHE:
            dt_tab = (2.0 * math.pi / spec.omega_res) / PHI_SAMPLES_PER_TAUB
            _PHI_CACHE[key] = bath_mod.correlation_function(spec, dt=dt_tab, t_max=horizon)
        tables[label] = _PHI_CACHE[key]
    return tables


def kernel_window(config: CycleConfig, tables) -> float | None:
    if config.kernel_full_history:
        return None
    caps = []
    for label in ("cold", "hot"):
        spec = config.bath(label)
        tau_b = 2.0 * math.pi / spec.omega_res
        tau_c = tables[label].decay_time()
        caps.append(
            max(config.kernel_tauc_factor * tau_c, config.kernel_taub_factor * tau_b)
        )
    return max(caps)


def _windows(sched: StrokeSchedule):
    """(bath, [(cycle, stroke)], window start offset) over two cycles."""
    return [
        ("hot", [(0, "ab")]),
        ("cold", [(0, "bc"), (0, "cd")]),
        ("hot", [(0, "da"), (1, "ab")]),
        ("cold", [(1, "bc"), (1, "cd")]),
        ("hot", [(1, "da")]),
    ]


def run_cycle(config: CycleConfig, rho0: DensityMatrix | None = None) -> RunResult:
    """Integrate two cycles and report the second."""
    sched = config.sched
    delta = sched.delta
    T = sched.period
    bounds = sched.boundaries()

    # bath tables sized to cover the kernel window (or, for full-history
    # runs, the longest coupling window) with margin
    tau_b_max = max(
        2.0 * math.pi / config.cold.omega_res, 2.0 * math.pi / config.hot.omega_res
    )
    horizon_guess = max(15.0 * tau_b_max, 80.0)
    tables = correlation_tables(config, horizon_guess)
    window = kernel_window(config, tables)
    needed = window if window is not None else max(
        sched.tau_da + sched.tau_ab, sched.tau_bc + sched.tau_cd
    )
    if needed > horizon_guess - 2.0 * tau_b_max:
        tables = correlation_tables(config, needed + 5.0 * tau_b_max)

    if rho0 is None:
        # point a sits at omega2, thermal with the hot bath
        q_a = math.sqrt(sched.omega2**2 / 4.0 - delta**2)
        rho0 = gibbs_state(hamiltonian_operator(q_a, delta), config.hot.beta)

    # --- per-point records ---------------------------------------------
    rec_t, rec_r, rec_rdot, rec_q, rec_w = [], [], [], [], []
    rec_i, rec_bath = [], []
    stroke_slices: list[StrokeSlice] = []

    r = rho0.bloch().copy()
    n_rec = 0
    max_neg = 0.0

    for bath_label, strokes in _windows(sched):
        t_start = strokes[0][0] * T + bounds[STROKE_IDS.index(strokes[0][1])]
        protos = [sched.protocol(s) for _, s in strokes]
        grid = evolve_window(protos, dt=config.dt, t_start=t_start)
        ivecs = kernel_integrals(grid, tables[bath_label], window)
        n = len(grid)

        # stroke-local Hamiltonian data on the grid
        qs = np.empty(n)
        ws = np.empty(n)
        for si, (cyc, stroke) in enumerate(strokes):
            lo, hi = grid.seg_bounds[si], grid.seg_bounds[si + 1]
            proto = protos[si]
            t0 = grid.t[lo]
            tl = grid.t[lo : hi + 1] - t0
            w_loc = np.array([proto.omega_at(tt) for tt in tl])
            qs[lo : hi + 1] = np.sqrt(w_loc**2 / 4.0 - delta**2)
            ws[lo : hi + 1] = w_loc

        # step the state across the window, recording as we go
        rs = np.empty((n, 3))
        rdots = np.empty((n, 3))
        rs[0] = r
        for k in range(n):
            sets = [RateSet(i_vec=ivecs[k], q=qs[k], delta=delta)]
            a_mat, b_vec = bloch_generator(
                np.array([delta, 0.0, qs[k]]), sets, config.mode
            )
            rdots[k] = a_mat @ rs[k] + b_vec
            if k == n - 1:
                break
            dt_k = grid.t[k + 1] - grid.t[k]
            # midpoint Hamiltonian from the owning stroke
            si = int(np.searchsorted(grid.seg_bounds, k, side="right")) - 1
            si = min(si, len(protos) - 1)
            proto = protos[si]
            t0 = grid.t[grid.seg_bounds[si]]
            tm = grid.t[k] - t0 + 0.5 * dt_k
            w_m = proto.omega_at(min(tm, proto.duration))
            q_m = math.sqrt(w_m**2 / 4.0 - delta**2)
            h0 = np.array([delta, 0.0, qs[k]])
            h1 = np.array([delta, 0.0, q_m])
            h2 = np.array([delta, 0.0, qs[k + 1]])
            rs[k + 1] = step_bloch(
                rs[k],
                dt_k,
                (h0, h1, h2),
                [ivecs[k]],
                [ivecs[k + 1]],
                config.mode,
                (qs[k], q_m, qs[k + 1]),
                delta,
            )
            norm = np.linalg.norm(rs[k + 1])
            if norm > 1.0:
                neg = 0.5 * (norm - 1.0)
                max_neg = max(max_neg, neg)
                if neg > config.negativity_tol:
                    raise RuntimeError(
                        f"state negativity {neg:.3e} beyond tolerance at "
                        f"t={grid.t[k + 1]:.4f} ({bath_label} window); reduce dt"
                    )
        r = rs[-1]

        rec_t.append(grid.t)
        rec_r.append(rs)
        rec_rdot.append(rdots)
        rec_q.append(qs)
        rec_w.append(ws)
        rec_i.append(ivecs)
        rec_bath.append(np.full(n, bath_label))
        for si, (cyc, stroke) in enumerate(strokes):
            stroke_slices.append(
                StrokeSlice(
                    cycle=cyc,
                    stroke=stroke,
                    bath=bath_label,
                    lo=n_rec + int(grid.seg_bounds[si]),
                    hi=n_rec + int(grid.seg_bounds[si + 1]),
                    starts_window=(si == 0),
                    omega_rate=protos[si].omega_rate(),
                )
            )
        n_rec += n

    traj = Trajectory(
        t=np.concatenate(rec_t),
        r=np.concatenate(rec_r),
        rdot=np.concatenate(rec_rdot),
        q=np.concatenate(rec_q),
        omega=np.concatenate(rec_w),
        ivec=np.concatenate(rec_i),
        bath=np.concatenate(rec_bath),
        stroke_slices=stroke_slices,
        delta=delta,
    )

    # --- cycle-two anchors ----------------------------------------------
    sl = {s.stroke: s for s in traj.slices(1)}
    rho_a = traj.state_at_index(sl["ab"].lo)
    rho_b = traj.state_at_index(sl["ab"].hi)
    rho_c = traj.state_at_index(sl["bc"].hi)
    rho_d = traj.state_at_index(sl["cd"].hi)
    rho_a_end = traj.state_at_index(sl["da"].hi)
    periodicity = trace_distance(rho_a, rho_a_end)

    # frozen-generator asymptotic markers at b and d
    def frozen_marker(idx: int, seed: DensityMatrix) -> DensityMatrix:
        rates = RateSet(i_vec=traj.ivec[idx], q=traj.q[idx], delta=delta)
        h_vec = np.array([delta, 0.0, traj.q[idx]])
        return asymptotic_state(h_vec, [rates], seed, mode=config.mode)

    rho_b_star = frozen_marker(sl["ab"].hi, rho_b)
    rho_d_star = frozen_marker(sl["cd"].hi, rho_d)

    # thermalization adequacy at the isochore endpoints
    q1 = math.sqrt(sched.omega1**2 / 4.0 - delta**2)
    q2 = math.sqrt(sched.omega2**2 / 4.0 - delta**2)
    gibbs_c = gibbs_state(hamiltonian_operator(q1, delta), config.cold.beta)
    gibbs_a = gibbs_state(hamiltonian_operator(q2, delta), config.hot.beta)
    therm_c = trace_distance(rho_c, gibbs_c)
    therm_a = trace_distance(rho_a_end, gibbs_a)
    if max(therm_c, therm_a) > THERMALIZATION_WARN:
        warnings.warn(
            f"isochore endpoints not thermalized: distances c={therm_c:.2e}, "
            f"a={therm_a:.2e}; lengthen tau_bc/tau_da",
            RuntimeWarning,
            stacklevel=2,
        )

    tau_r_hot, tau_b_hot, tau_c_hot = bath_mod.time_scales(config.hot, tables["hot"])
    scales = {
        "tau_d": tau_r_hot,
        "tau_b": tau_b_hot,
        "tau_c_hot": tau_c_hot,
        "tau_c_cold": tables["cold"].decay_time(),
        "kernel_window": window if window is not None else math.inf,
        "max_negativity": max_neg,
    }

    return RunResult(
        config=config,
        trajectory=traj,
        rho_a=rho_a,
        rho_b=rho_b,
        rho_c=rho_c,
        rho_d=rho_d,
        rho_a_end=rho_a_end,
        rho_b_star=rho_b_star,
        rho_d_star=rho_d_star,
        periodicity_residual=periodicity,
        thermalization_c=therm_c,
        thermalization_a=therm_a,
        tau_scales=scales,
    )


def distance_diagnostics(result: RunResult) -> dict:
    """Relative entropies between stroke end points and their references."""
    return {
        "S_b_bstar": entropy_functionals(result.rho_b, result.rho_b_star)[1],
        "S_d_dstar": entropy_functionals(result.rho_d, result.rho_d_star)[1],
        "S_b_c": entropy_functionals(result.rho_b, result.rho_c)[1],
        "S_d_a": entropy_functionals(result.rho_d, result.rho_a)[1],
    }


def sweep(duration_pairs, base: CycleConfig, workers: int = 1):
    """One independent run per (tau_ab, tau_cd) pair, in input order.

    Failures are captured per row; rows come back as
    (index, result | None, error message | None).
    """
    pairs = list(duration_pairs)
    if not pairs:
        raise InvalidParameterError("empty duration list")
    jobs = [
        (i, replace(base, sched=replace(base.sched, tau_ab=ta, tau_cd=tc)))
        for i, (ta, tc) in enumerate(pairs)
    ]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_sweep_one, jobs))
    else:
        outs = [_sweep_one(j) for j in jobs]
    return outs


def _sweep_one(job):
    idx, config = job
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        try:
            return idx, run_cycle(config), None
        except Exception as exc:  # per-row failure containment
            return idx, None, f"{type(exc).__name__}: {exc}"
