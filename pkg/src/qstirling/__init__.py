"""Finite-time quantum Stirling engine with a non-Markovian working substance."""

from .bath import BathSpec, CorrelationTable, correlation_function, coupling_spectrum, time_scales
from .cycle import CycleConfig, RunResult, Trajectory, distance_diagnostics, run_cycle, sweep
from .drive import DriveProtocol, StrokeSchedule, hamiltonian_at, schedule_lookup
from .generator import (
    GeneratorMode,
    RateSet,
    apply_generator,
    asymptotic_state,
    memory_rates,
    rotating_invariant_state,
)
from .propagator import PropagatorGrid, evolve_unitaries, evolve_window, two_time_op
from .qops import (
    DensityMatrix,
    EigenFrame,
    PauliOperator,
    eigenframe_at,
    entropy_functionals,
    gibbs_state,
    polarization,
    trace_distance,
)
from .thermo import (
    EnergyLedger,
    LimitingCycleReport,
    average_heat,
    average_work,
    effective_hamiltonian,
    ledger,
    limiting_cycles,
)

__all__ = [
    "BathSpec",
    "CorrelationTable",
    "CycleConfig",
    "DensityMatrix",
    "DriveProtocol",
    "EigenFrame",
    "EnergyLedger",
    "GeneratorMode",
    "LimitingCycleReport",
    "PauliOperator",
    "PropagatorGrid",
    "RateSet",
    "RunResult",
    "StrokeSchedule",
    "Trajectory",
    "apply_generator",
    "asymptotic_state",
    "average_heat",
    "average_work",
    "correlation_function",
    "coupling_spectrum",
    "distance_diagnostics",
    "effective_hamiltonian",
    "eigenframe_at",
    "entropy_functionals",
    "evolve_unitaries",
    "evolve_window",
    "gibbs_state",
    "hamiltonian_at",
    "ledger",
    "limiting_cycles",
    "memory_rates",
    "polarization",
    "rotating_invariant_state",
    "run_cycle",
    "schedule_lookup",
    "sweep",
    "time_scales",
    "trace_distance",
    "two_time_op",
]

__version__ = "0.1.0"
