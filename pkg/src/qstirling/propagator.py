"""Unitary propagator of the driven system and the two-time coupling operator.

The Schroedinger equation dU/dt = -i H(t) U is integrated with classic
fixed-step RK4 on a grid aligned with the kernel quadrature and the state
integrator.  After every step U is snapped back onto the unitary manifold
through the closed-form polar factor U (U^dag U)^(-1/2); the raw
pre-projection drift is monitored and a drift beyond 1e-8 aborts as a
step-size error.  RK4 truncation, not unitarity, then limits accuracy.

The grid also caches, per point, the SO(3) rotation matrix M(U) of the
Pauli-vector conjugation v -> U (v.sigma) U^dag and the Heisenberg-picture
coupling operator A(tau) = U^dag sigma_y U (a real Pauli vector, equal to
the y-row of M).  The two-time operator used by the memory kernel is then

    S~(t, tau) = U(t) A(tau) U(t)^dag,   s~(t,tau) = M(U(t)) A(tau),

so a kernel sample costs one 3x3 rotation instead of two matrix products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .drive import DriveProtocol, hamiltonian_at
from .qops import (
    InvalidParameterError,
    PauliOperator,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
)

UNITARITY_DRIFT_LIMIT = 1e-8

# dt <= min(RESOLUTION_FACTOR * 2 pi / omega_max, duration / MIN_STEPS)
RESOLUTION_FACTOR = 0.02
MIN_STEPS = 200


class StepSizeError(RuntimeError):
    """Raised when integration accuracy degrades beyond tolerance."""


def default_step(proto: DriveProtocol) -> float:
    return min(
        RESOLUTION_FACTOR * 2.0 * math.pi / proto.omega_hi,
        proto.duration / MIN_STEPS,
    )


def _polar_unitary(u: np.ndarray) -> tuple[np.ndarray, float]:
    """Project onto the unitary manifold; returns (U', pre-projection drift)."""
    g = u.conj().T @ u
    drift = max(abs(g[0, 0].real - 1.0), abs(g[1, 1].real - 1.0), abs(g[0, 1]))
    # closed-form inverse square root of the 2x2 Hermitian positive G
    a = 0.5 * (g[0, 0].real + g[1, 1].real)
    bx = g[0, 1].real
    by = -g[0, 1].imag
    bz = 0.5 * (g[0, 0].real - g[1, 1].real)
    bn = math.sqrt(bx * bx + by * by + bz * bz)
    lp, lm = a + bn, a - bn
    if lm <= 0.0:
        raise StepSizeError("propagator lost invertibility")
    sp, sm = 1.0 / math.sqrt(lp), 1.0 / math.sqrt(lm)
    alpha = 0.5 * (sp + sm)
    beta = 0.0 if bn == 0.0 else 0.5 * (sp - sm) / bn
    ginv = alpha * np.eye(2, dtype=complex) + beta * (
        bx * SIGMA_X + by * SIGMA_Y + bz * SIGMA_Z
    )
    return u @ ginv, float(drift)


def _h_matrix(q: float, delta: float) -> np.ndarray:
    return np.array([[q, delta], [delta, -q]], dtype=complex)


@dataclass
class PropagatorGrid:
    """U(t_k, t_start) and derived kernel inputs on one coupled interval.

    ``t`` holds absolute times; ``seg_index`` marks which protocol segment
    each point belongs to (segment boundaries are shared points).  ``dt``
    is the largest step used anywhere on the grid.
    """

    t: np.ndarray
    U: np.ndarray
    dt: float
    seg_bounds: np.ndarray  # indices of segment start points, plus len-1
    max_drift: float
    _M: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.t)

    def rotations(self) -> np.ndarray:
        """(N,3,3) SO(3) matrices M_ij = tr(sigma_i U sigma_j U^dag)/2."""
        if self._M is None:
            sig = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])
            conj = np.einsum("nab,jbc,ndc->njad", self.U, sig, self.U.conj())
            self._M = np.einsum("iba,njab->nij", sig, conj).real * 0.5
        return self._M

    def a_vectors(self) -> np.ndarray:
        """(N,3) real Pauli vectors of A(tau_k) = U^dag sigma_y U."""
        return self.rotations()[:, 1, :]

    def a_operator(self, k: int) -> PauliOperator:
        ax, ay, az = self.a_vectors()[k]
        return PauliOperator(0.0, ax, ay, az)

    def unitary(self, k: int) -> np.ndarray:
        return self.U[k]


def _integrate_segment(proto: DriveProtocol, dt: float, u0: np.ndarray, t0: float):
    n = max(1, int(round(proto.duration / dt)))
    h = proto.duration / n
    t_local = np.linspace(0.0, proto.duration, n + 1)
    us = np.empty((n + 1, 2, 2), dtype=complex)
    us[0] = u0
    max_drift = 0.0
    u = u0
    for k in range(n):
        tk = t_local[k]
        _, _, q1, _ = hamiltonian_at(tk, proto)
        _, _, q2, _ = hamiltonian_at(tk + 0.5 * h, proto)
        _, _, q3, _ = hamiltonian_at(min(tk + h, proto.duration), proto)
        h1 = _h_matrix(q1, proto.delta)
        h2 = _h_matrix(q2, proto.delta)
        h3 = _h_matrix(q3, proto.delta)
        k1 = -1j * (h1 @ u)
        k2 = -1j * (h2 @ (u + 0.5 * h * k1))
        k3 = -1j * (h2 @ (u + 0.5 * h * k2))
        k4 = -1j * (h3 @ (u + h * k3))
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        u, drift = _polar_unitary(u)
        max_drift = max(max_drift, drift)
        us[k + 1] = u
    return t0 + t_local, us, max_drift


def evolve_unitaries(proto: DriveProtocol, dt: float | None = None) -> PropagatorGrid:
    """Propagator grid for a single stroke, U(t_start) = I."""
    return evolve_window([proto], dt=dt)


def evolve_window(
    protos: list[DriveProtocol],
    dt: float | None = None,
    t_start: float = 0.0,
) -> PropagatorGrid:
    """Propagator grid over consecutive strokes sharing one coupled bath.

    The unitary is continuous across stroke boundaries.  An explicit dt
    is honored verbatim (the drift monitor aborts if it is too coarse);
    dt=None picks the per-stroke default, which resolves the fastest
    precession and gives ramps at least MIN_STEPS points.
    """
    if not protos:
        raise InvalidParameterError("empty protocol list")
    ts = [np.array([t_start])]
    us = [np.eye(2, dtype=complex)[None]]
    seg_bounds = [0]
    u = np.eye(2, dtype=complex)
    t0 = t_start
    worst = 0.0
    dt_used = 0.0
    for proto in protos:
        step = dt if dt is not None else default_step(proto)
        dt_used = max(dt_used, step)
        t_seg, u_seg, drift = _integrate_segment(proto, step, u, t0)
        worst = max(worst, drift)
        if worst > UNITARITY_DRIFT_LIMIT:
            raise StepSizeError(
                f"unitarity drift {worst:.2e} beyond {UNITARITY_DRIFT_LIMIT:.0e}; reduce dt"
            )
        ts.append(t_seg[1:])
        us.append(u_seg[1:])
        seg_bounds.append(seg_bounds[-1] + len(t_seg) - 1)
        u = u_seg[-1]
        t0 = t_seg[-1]
    t = np.concatenate(ts)
    return PropagatorGrid(
        t=t,
        U=np.concatenate(us),
        dt=dt_used,
        seg_bounds=np.array(seg_bounds),
        max_drift=worst,
    )


def two_time_op(grid: PropagatorGrid, t_idx: int, tau_idx: int) -> PauliOperator:
    """S~(t, tau) = U(t, tau) sigma_y U(t, tau)^dag from grid entries.

    Both indices must lie in the same coupled interval and tau <= t.
    """
    if tau_idx > t_idx:
        raise InvalidParameterError(f"tau index {tau_idx} exceeds t index {t_idx}")
    s_vec = grid.rotations()[t_idx] @ grid.a_vectors()[tau_idx]
    return PauliOperator(0.0, s_vec[0], s_vec[1], s_vec[2])
