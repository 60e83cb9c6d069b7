"""Operator algebra and state functionals for a two-level working substance.

Everything is expressed in Pauli coordinates: a 2x2 operator is the four
complex coefficients of {I, sigma_x, sigma_y, sigma_z}.  Energies are
measured in units of the reference scale omega0 = 1, times in 1/omega0,
and k_B = hbar = 1 throughout the package.

The system Hamiltonian used everywhere downstream is

    H(q, Delta) = q sigma_z + Delta sigma_x,

with instantaneous splitting omega = 2 sqrt(q^2 + Delta^2) and mixing
angle theta = (1/2) arccot(q / Delta).  Eigen-decompositions use the
closed 2x2 forms, never a general eigensolver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULIS = (SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z)

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
NEGATIVITY_TOL = 1e-8


class InvalidParameterError(ValueError):
    """Raised for parameter values outside an operation's domain."""


class StateValidityError(ValueError):
    """Raised when a density matrix drifts outside physical tolerances."""


@dataclass(frozen=True)
class PauliOperator:
    """A 2x2 complex operator stored as Pauli-basis coefficients."""

    c0: complex = 0.0
    cx: complex = 0.0
    cy: complex = 0.0
    cz: complex = 0.0

    @classmethod
    def from_matrix(cls, m) -> "PauliOperator":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise InvalidParameterError("expected a 2x2 matrix")
        return cls(
            c0=0.5 * (m[0, 0] + m[1, 1]),
            cx=0.5 * (m[0, 1] + m[1, 0]),
            cy=0.5j * (m[0, 1] - m[1, 0]),
            cz=0.5 * (m[0, 0] - m[1, 1]),
        )

    @classmethod
    def from_vector(cls, c0, vec) -> "PauliOperator":
        return cls(c0=complex(c0), cx=complex(vec[0]), cy=complex(vec[1]), cz=complex(vec[2]))

    def matrix(self) -> np.ndarray:
        return (
            self.c0 * SIGMA_0
            + self.cx * SIGMA_X
            + self.cy * SIGMA_Y
            + self.cz * SIGMA_Z
        )

    def vector(self) -> np.ndarray:
        """The (cx, cy, cz) part as a length-3 complex array."""
        return np.array([self.cx, self.cy, self.cz], dtype=complex)

    def coeffs(self) -> np.ndarray:
        return np.array([self.c0, self.cx, self.cy, self.cz], dtype=complex)

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return bool(np.abs(self.coeffs().imag).max() <= tol)

    def dagger(self) -> "PauliOperator":
        return PauliOperator(*np.conj(self.coeffs()))

    def trace(self) -> complex:
        return 2.0 * self.c0

    def __add__(self, other: "PauliOperator") -> "PauliOperator":
        return PauliOperator(*(self.coeffs() + other.coeffs()))

    def __sub__(self, other: "PauliOperator") -> "PauliOperator":
        return PauliOperator(*(self.coeffs() - other.coeffs()))

    def __mul__(self, scalar) -> "PauliOperator":
        return PauliOperator(*(self.coeffs() * scalar))

    __rmul__ = __mul__

    def eigenvalues(self) -> np.ndarray:
        """Closed-form eigenvalues c0 +/- |c_vec| for Hermitian operators."""
        r = math.sqrt(float(np.sum(self.vector().real ** 2)))
        return np.array([self.c0.real - r, self.c0.real + r])


def pauli_decompose(m) -> PauliOperator:
    """Matrix -> Pauli coefficients (exact inverse of ``pauli_compose``)."""
    return PauliOperator.from_matrix(m)


def pauli_compose(op: PauliOperator) -> np.ndarray:
    """Pauli coefficients -> matrix."""
    return op.matrix()


def trace_product(a: PauliOperator, b: PauliOperator) -> complex:
    """tr(A B) in coefficient form: 2 (a0 b0 + a.b)."""
    return 2.0 * (a.c0 * b.c0 + a.cx * b.cx + a.cy * b.cy + a.cz * b.cz)


@dataclass(frozen=True)
class DensityMatrix:
    """Unit-trace Hermitian positive-semidefinite 2x2 state.

    Stored as the Bloch vector r, rho = (I + r.sigma)/2.  Construction
    validates trace, Hermiticity, and negativity against the package
    tolerances; ``from_operator`` applies the standard hygiene
    (re-Hermitize, renormalize) first so integrator output can be fed
    in directly.
    """

    rx: float
    ry: float
    rz: float

    def __post_init__(self):
        r = self.bloch()
        norm = float(np.linalg.norm(r))
        if norm > 1.0 + 2.0 * NEGATIVITY_TOL:
            raise StateValidityError(
                f"Bloch vector length {norm:.3e} exceeds 1 beyond tolerance "
                f"(min eigenvalue {(1.0 - norm) / 2.0:.3e})"
            )

    @classmethod
    def from_bloch(cls, r) -> "DensityMatrix":
        return cls(float(r[0]), float(r[1]), float(r[2]))

    @classmethod
    def from_operator(cls, op: PauliOperator, hermitize: bool = True) -> "DensityMatrix":
        c = op.coeffs()
        if not hermitize:
            if np.abs(c.imag).max() > TRACE_TOL:
                raise StateValidityError("operator is not Hermitian within tolerance")
            if abs(c[0].real - 0.5) > TRACE_TOL:
                raise StateValidityError(f"trace {2 * c[0].real:.12f} != 1 within tolerance")
        c0 = c[0].real
        if abs(c0) < 1e-300:
            raise StateValidityError("trace is zero, cannot renormalize")
        # (rho + rho^dagger)/2 keeps the real part of each coefficient;
        # renormalization rescales so that c0 = 1/2 exactly, and the Bloch
        # vector of rho = (I + r.sigma)/2 is r = c_vec / c0.
        return cls.from_bloch(c[1:].real / c0)

    @classmethod
    def from_matrix(cls, m, hermitize: bool = True) -> "DensityMatrix":
        return cls.from_operator(PauliOperator.from_matrix(m), hermitize=hermitize)

    def bloch(self) -> np.ndarray:
        return np.array([self.rx, self.ry, self.rz])

    def operator(self) -> PauliOperator:
        return PauliOperator(0.5, 0.5 * self.rx, 0.5 * self.ry, 0.5 * self.rz)

    def matrix(self) -> np.ndarray:
        return self.operator().matrix()

    def eigenvalues(self) -> np.ndarray:
        r = float(np.linalg.norm(self.bloch()))
        return np.array([(1.0 - r) / 2.0, (1.0 + r) / 2.0])

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def check_physical(self, neg_tol: float = NEGATIVITY_TOL) -> None:
        lam = self.min_eigenvalue()
        if lam < -neg_tol:
            raise StateValidityError(f"negative eigenvalue {lam:.3e} beyond tolerance {neg_tol:.0e}")


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """(1/2) tr|a - b| = |r_a - r_b| / 2 for qubit states."""
    return 0.5 * float(np.linalg.norm(a.bloch() - b.bloch()))


@dataclass(frozen=True)
class EigenFrame:
    """Instantaneous eigenstructure of H = q sigma_z + Delta sigma_x.

    theta is the mixing angle, omega the level splitting (2 sqrt(q^2+Delta^2)),
    e_vec / g_vec the excited and ground eigenvectors, and L the lowering
    operator |g(t)><e(t)| between them.
    """

    theta: float
    omega: float
    q: float
    delta: float
    e_vec: np.ndarray
    g_vec: np.ndarray
    L: PauliOperator


def eigenframe_at(q: float, delta: float) -> EigenFrame:
    """Closed-form instantaneous energy basis at drive coordinate q, gap Delta."""
    if delta <= 0.0:
        raise InvalidParameterError(f"delta must be > 0, got {delta!r} (mixing angle undefined)")
    theta = 0.5 * math.atan2(delta, q)
    omega = 2.0 * math.hypot(q, delta)
    c, s = math.cos(theta), math.sin(theta)
    e_vec = np.array([c, s], dtype=complex)
    g_vec = np.array([s, -c], dtype=complex)
    L = PauliOperator.from_matrix(np.outer(g_vec, e_vec.conj()))
    return EigenFrame(theta=theta, omega=omega, q=q, delta=delta, e_vec=e_vec, g_vec=g_vec, L=L)


def hamiltonian_operator(q: float, delta: float) -> PauliOperator:
    return PauliOperator(0.0, delta, 0.0, q)


def gibbs_state(h: PauliOperator, beta: float) -> DensityMatrix:
    """Thermal state exp(-beta H)/Z for a Hermitian H.

    Uses the closed form rho = (I - tanh(beta |h|) h_hat . sigma)/2; the
    identity component of H drops out, so the state is invariant under
    uniform energy shifts.
    """
    if beta <= 0.0:
        raise InvalidParameterError(f"beta must be > 0, got {beta!r}")
    if not h.is_hermitian():
        raise InvalidParameterError("Hamiltonian must be Hermitian")
    hv = h.vector().real
    r = float(np.linalg.norm(hv))
    if r == 0.0:
        return DensityMatrix(0.0, 0.0, 0.0)
    return DensityMatrix.from_bloch(-math.tanh(beta * r) * hv / r)


def _plogp(p: np.ndarray) -> float:
    # sum p ln p with the 0 ln 0 = 0 convention
    mask = p > 0.0
    return float(np.sum(p[mask] * np.log(p[mask])))


def entropy_functionals(rho1: DensityMatrix, rho2: DensityMatrix, support_tol: float = 1e-12):
    """Von Neumann entropy S(rho1) and relative entropy S(rho1 || rho2).

    Natural logarithm throughout.  If rho2 is singular while rho1 has
    support outside its range, the relative entropy is the +inf sentinel.
    """
    p1, v1 = np.linalg.eigh(rho1.matrix())
    p2, v2 = np.linalg.eigh(rho2.matrix())
    p1 = np.clip(p1.real, 0.0, 1.0)
    p2 = np.clip(p2.real, 0.0, 1.0)
    s1 = -_plogp(p1)

    # tr[rho1 ln rho2] via the overlap weights |<v1_i|v2_j>|^2
    overlap = np.abs(v1.conj().T @ v2) ** 2
    cross = 0.0
    for i in range(2):
        for j in range(2):
            w = p1[i] * overlap[i, j]
            if w <= support_tol:
                continue
            if p2[j] <= 0.0:
                return s1, math.inf
            cross += w * math.log(p2[j])
    rel = _plogp(p1) - cross
    return s1, max(rel, 0.0)


def polarization(rho: DensityMatrix, h: PauliOperator, omega: float) -> float:
    """Signed excitation n = tr[H rho]/omega, in [-1/2, 1/2].

    Only the traceless part of H contributes.
    """
    if omega <= 0.0:
        raise InvalidParameterError(f"omega must be > 0, got {omega!r}")
    return float(h.vector().real @ rho.bloch()) / omega
