"""Drive protocol and stroke schedule for the four-stroke Stirling cycle.

The level splitting omega(t) = 2 sqrt(q(t)^2 + Delta^2) is ramped linearly
between omega1 and omega2 during the isothermal strokes, which fixes
q(t) = sqrt(omega(t)^2/4 - Delta^2).  The cycle is

    a->b  compression  omega2 -> omega1   hot bath
    b->c  hold at omega1                  cold bath
    c->d  expansion    omega1 -> omega2   cold bath
    d->a  hold at omega2                  hot bath

Exactly one bath is coupled at any time; the coupling switch lambda(t)
is an ideal on/off at the b and d boundaries (the hot bath stays
connected across d->a into a->b, the cold bath across b->c into c->d).
Stroke boundaries belong to the succeeding stroke.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .qops import InvalidParameterError, PauliOperator

COMPRESS = "compress"
EXPAND = "expand"
HOLD = "hold"

STROKE_IDS = ("ab", "bc", "cd", "da")


@dataclass(frozen=True)
class DriveProtocol:
    """One stroke's drive: linear omega ramp (or hold) over a duration."""

    omega_lo: float
    omega_hi: float
    delta: float
    direction: str
    duration: float

    def __post_init__(self):
        if self.direction not in (COMPRESS, EXPAND, HOLD):
            raise InvalidParameterError(f"unknown direction {self.direction!r}")
        if not (0.0 < 2.0 * self.delta < self.omega_lo <= self.omega_hi):
            raise InvalidParameterError(
                f"need 0 < 2*delta < omega_lo <= omega_hi, got "
                f"delta={self.delta}, omega_lo={self.omega_lo}, omega_hi={self.omega_hi}"
            )
        if self.duration <= 0.0:
            raise InvalidParameterError(f"duration must be > 0, got {self.duration}")
        if self.direction == HOLD and self.omega_lo != self.omega_hi:
            raise InvalidParameterError("hold strokes need omega_lo == omega_hi")

    def omega_at(self, t: float) -> float:
        if self.direction == HOLD:
            return self.omega_lo
        if self.direction == COMPRESS:
            start, end = self.omega_hi, self.omega_lo
        else:
            start, end = self.omega_lo, self.omega_hi
        return start + (end - start) * (t / self.duration)

    def omega_rate(self) -> float:
        if self.direction == HOLD:
            return 0.0
        span = self.omega_hi - self.omega_lo
        return -span / self.duration if self.direction == COMPRESS else span / self.duration


def hamiltonian_at(t: float, proto: DriveProtocol):
    """(H, dH/dt, q, omega) at stroke-local time t in [0, duration].

    dH/dt is analytic: qdot = omega * omegadot / (4 q); holds return
    exactly zero.
    """
    if t < -1e-12 or t > proto.duration * (1.0 + 1e-12):
        raise InvalidParameterError(f"t={t} outside stroke [0, {proto.duration}]")
    w = proto.omega_at(t)
    q2 = w * w / 4.0 - proto.delta**2
    if q2 <= 0.0:
        raise InvalidParameterError(
            f"omega(t)/2 = {w / 2.0} <= delta = {proto.delta}: drive coordinate not real"
        )
    q = math.sqrt(q2)
    h = PauliOperator(0.0, proto.delta, 0.0, q)
    wdot = proto.omega_rate()
    qdot = w * wdot / (4.0 * q)
    dh = PauliOperator(0.0, 0.0, 0.0, qdot)
    return h, dh, q, w


@dataclass(frozen=True)
class StrokeSchedule:
    """Durations, per-stroke protocols, and bath assignment for one cycle."""

    tau_ab: float
    tau_bc: float
    tau_cd: float
    tau_da: float
    omega1: float
    omega2: float
    delta: float

    def __post_init__(self):
        for name in ("tau_ab", "tau_bc", "tau_cd", "tau_da"):
            if getattr(self, name) <= 0.0:
                raise InvalidParameterError(f"{name} must be > 0")
        # validate the ramp protocols once up front
        self.protocol("ab")
        self.protocol("bc")

    @property
    def period(self) -> float:
        return self.tau_ab + self.tau_bc + self.tau_cd + self.tau_da

    def durations(self):
        return (self.tau_ab, self.tau_bc, self.tau_cd, self.tau_da)

    def boundaries(self):
        """Cumulative stroke start times within one cycle (t_a = 0)."""
        b = [0.0]
        for d in self.durations():
            b.append(b[-1] + d)
        return tuple(b)

    def protocol(self, stroke: str) -> DriveProtocol:
        if stroke == "ab":
            return DriveProtocol(self.omega1, self.omega2, self.delta, COMPRESS, self.tau_ab)
        if stroke == "bc":
            return DriveProtocol(self.omega1, self.omega1, self.delta, HOLD, self.tau_bc)
        if stroke == "cd":
            return DriveProtocol(self.omega1, self.omega2, self.delta, EXPAND, self.tau_cd)
        if stroke == "da":
            return DriveProtocol(self.omega2, self.omega2, self.delta, HOLD, self.tau_da)
        raise InvalidParameterError(f"unknown stroke {stroke!r}")

    def active_bath(self, stroke: str) -> str:
        return "hot" if stroke in ("ab", "da") else "cold"

    def coupling_switch(self, t: float, bath: str) -> float:
        """lambda(t) for one bath: 1.0 while coupled, 0.0 otherwise."""
        _, active, _, _ = schedule_lookup(t, self)
        return 1.0 if active == bath else 0.0


def schedule_lookup(t: float, sched: StrokeSchedule):
    """(stroke id, active bath, protocol, stroke-local time) at absolute t.

    Domain is [0, 2T): the first (transient) cycle and the measured one.
    Boundaries belong to the succeeding stroke, so t = T maps to the
    second cycle's a->b.
    """
    T = sched.period
    if t < 0.0 or t >= 2.0 * T:
        raise InvalidParameterError(f"t={t} outside the two-cycle domain [0, {2 * T})")
    tc = t - T if t >= T else t
    b = sched.boundaries()
    for i, stroke in enumerate(STROKE_IDS):
        if b[i] <= tc < b[i + 1]:
            return stroke, sched.active_bath(stroke), sched.protocol(stroke), tc - b[i]
    # tc == T can only happen through rounding at the very top of the domain
    return "ab", "hot", sched.protocol("ab"), 0.0
