"""Bath coupling spectra, correlation functions, and derived time scales.

The coupling spectrum of each resonator bath is

    G(omega) = g^2 / (1 + f^2 (omega/omega_r - omega_r/omega)^2)
               * omega / (1 - exp(-beta omega)),

extended to omega < 0 by the same expression (even Lorentzian factor,
thermal factor positive on both sides), which satisfies the KMS identity
G(-omega) = exp(-beta omega) G(omega) exactly.

The correlation function is the inverse transform
Phi(t) = (1/2pi) Integral G(omega) exp(-i omega t) domega, tabulated once
per bath on a uniform grid and linearly interpolated by the kernel code.
Note the spectrum only decays algebraically (~1/omega) at high frequency,
so Phi(0) depends logarithmically on the frequency cutoff; the cutoff is
therefore a fixed multiple of omega_r rather than a relative-height
criterion, and every consumer tolerance has been checked to be
insensitive to doubling it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qops import InvalidParameterError

# Frequency cutoff (units of omega_r) and grid oversampling for the
# correlation-function quadrature.
DEFAULT_CUTOFF_FACTOR = 40.0
DEFAULT_OVERSAMPLE = 10.0


class QuadratureError(RuntimeError):
    """Raised when the correlation-function quadrature fails to converge."""


@dataclass(frozen=True)
class BathSpec:
    """One bath: inverse temperature, coupling, resonance, quality factor."""

    beta: float
    g: float
    omega_res: float
    f: float
    label: str = "bath"

    def __post_init__(self):
        for name in ("beta", "g", "omega_res", "f"):
            v = getattr(self, name)
            if not (v > 0.0):
                raise InvalidParameterError(f"BathSpec.{name} must be > 0, got {v!r}")


def coupling_spectrum(omega, spec: BathSpec):
    """Coupling spectrum G(omega); scalar in, scalar out; array in, array out.

    Continuous at omega = 0 with limit 0.
    """
    w = np.asarray(omega, dtype=float)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    out = np.zeros_like(w)
    nz = w != 0.0
    wn = w[nz]
    lorentz = 1.0 / (1.0 + spec.f**2 * (wn / spec.omega_res - spec.omega_res / wn) ** 2)
    bw = np.clip(spec.beta * wn, -700.0, 700.0)
    thermal = wn / (-np.expm1(-bw))
    out[nz] = spec.g**2 * lorentz * thermal
    return float(out[0]) if scalar else out


def kms_residual(spec: BathSpec, omegas) -> float:
    """max |G(-w) - e^(-beta w) G(w)| over the given frequencies."""
    w = np.asarray(omegas, dtype=float)
    lhs = coupling_spectrum(-w, spec)
    rhs = np.exp(np.clip(-spec.beta * w, -700.0, 700.0)) * coupling_spectrum(w, spec)
    return float(np.abs(lhs - rhs).max())


@dataclass(frozen=True)
class CorrelationTable:
    """Phi sampled on t = 0, dt, ..., t_max, plus the cutoff used."""

    dt: float
    values: np.ndarray
    omega_cutoff: float

    @property
    def t_max(self) -> float:
        return self.dt * (len(self.values) - 1)

    def times(self) -> np.ndarray:
        if not hasattr(self, "_times"):
            object.__setattr__(self, "_times", self.dt * np.arange(len(self.values)))
        return self._times

    def __call__(self, t):
        """Linear interpolation of Phi at t >= 0 (conjugate for t < 0).

        Beyond the tabulated horizon the kernel has decayed below the
        envelope floor and is treated as zero.
        """
        t = np.asarray(t, dtype=float)
        mag = np.abs(t)
        grid = self.times()
        out = np.interp(mag, grid, self.values.real) + 1j * np.interp(
            mag, grid, self.values.imag
        )
        out = np.where(mag > grid[-1], 0.0, out)
        return np.where(t >= 0.0, out, np.conj(out))

    def envelope_floor(self) -> float:
        """max |Phi| over the last bath-resonance period, relative to |Phi(0)|."""
        n_tail = max(2, int(len(self.values) * 0.05))
        return float(np.abs(self.values[-n_tail:]).max() / np.abs(self.values[0]))

    def decay_time(self) -> float:
        """First time at which the remaining kernel weight drops below 1/e.

        Operationalized on the integrated squared magnitude: the first t
        with Integral_t^tmax |Phi|^2 < e^-1 Integral_0^tmax |Phi|^2.  A
        point-wise e^-1 crossing of |Phi| is ill-conditioned here: |Phi|
        beats at twice the resonance frequency and its t=0 value carries
        the cutoff-dependent high-frequency spike, whereas the integrated
        form is stable to both (and invariant under rescaling Phi).
        """
        a2 = np.abs(self.values) ** 2
        t = self.times()
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (a2[1:] + a2[:-1]) * self.dt)])
        target = (1.0 - 1.0 / math.e) * cum[-1]
        idx = int(np.searchsorted(cum, target))
        if idx == 0 or idx >= len(t):
            raise QuadratureError("kernel weight did not decay within the table horizon")
        return float(np.interp(target, [cum[idx - 1], cum[idx]], [t[idx - 1], t[idx]]))


def correlation_function(
    spec: BathSpec,
    dt: float,
    t_max: float,
    cutoff_factor: float = DEFAULT_CUTOFF_FACTOR,
    oversample: float = DEFAULT_OVERSAMPLE,
    verify: bool = True,
) -> CorrelationTable:
    """Tabulate Phi(t) on [0, t_max] by trapezoidal quadrature of G.

    The omega grid spans [-cutoff, +cutoff] with spacing
    <= 2 pi / (oversample * t_max) to control aliasing.  With verify=True
    the t = 0 and t = t_max/2 values are recomputed at doubled resolution
    and must agree to 0.1%.
    """
    if dt <= 0.0 or t_max <= 0.0:
        raise InvalidParameterError("dt and t_max must be > 0")
    t = np.arange(0.0, t_max + 0.5 * dt, dt)
    cutoff = cutoff_factor * spec.omega_res

    def quad(tgrid: np.ndarray, refine: float = 1.0) -> np.ndarray:
        dw = 2.0 * math.pi / (oversample * t_max * refine)
        n = int(math.ceil(2.0 * cutoff / dw)) + 1
        w = np.linspace(-cutoff, cutoff, n)
        gw = coupling_spectrum(w, spec) * (w[1] - w[0])
        gw[0] *= 0.5
        gw[-1] *= 0.5
        out = np.empty(len(tgrid), dtype=complex)
        # chunked to bound the phase-matrix memory
        step = max(1, int(4e6 // n))
        for i0 in range(0, len(tgrid), step):
            block = tgrid[i0 : i0 + step]
            out[i0 : i0 + step] = np.exp(-1j * np.outer(block, w)) @ gw
        return out / (2.0 * math.pi)

    values = quad(t)
    if verify:
        probe = np.array([0.0, 0.5 * t_max])
        coarse = values[[0, int(round(0.5 * t_max / dt))]]
        fine = quad(probe, refine=2.0)
        rel = np.abs(fine - coarse) / max(abs(values[0]), 1e-300)
        if rel.max() > 1e-3:
            raise QuadratureError(
                f"correlation quadrature not converged: relative change {rel.max():.2e} "
                f"on grid refinement (cutoff {cutoff:.3g}, oversample {oversample})"
            )
    if abs(values[0].imag) > 1e-10 * abs(values[0].real) or values[0].real <= 0.0:
        raise QuadratureError(f"Phi(0) = {values[0]:.3e} is not real and positive")
    return CorrelationTable(dt=dt, values=values, omega_cutoff=cutoff)


def time_scales(spec: BathSpec, table: CorrelationTable | None = None):
    """(tau_R, tau_B, tau_C) for one bath.

    tau_R = 1/G(omega_res), tau_B = 2 pi / omega_res, tau_C the kernel
    decay time from the correlation table (built on a default horizon if
    not supplied).
    """
    tau_r = 1.0 / coupling_spectrum(spec.omega_res, spec)
    tau_b = 2.0 * math.pi / spec.omega_res
    if table is None:
        horizon = 15.0 * tau_b
        table = correlation_function(spec, dt=tau_b / 200.0, t_max=horizon, verify=False)
    return tau_r, tau_b, table.decay_time()
