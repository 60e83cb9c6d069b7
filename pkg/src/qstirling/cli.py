"""Configuration, sweep execution, and deterministic CSV emission.

Configuration is a flat ``key = value`` text file; every key has a
default reproducing the reference parameter set (beta_h=2, beta_c=5,
g1=(0.2, 0.17), omega_r=0.6, omega1=0.49, omega2=0.78, f=2, isochore
duration 6 tau_D).  Unknown keys are rejected, and every validation
error names the offending key and its constraint.  Stroke durations and
sweep bounds are expressed in units of tau_D = 1/G_hot(omega_r)
evaluated at the baseline (g1) hot coupling; selecting ``g_set = g2``
scales the dynamical couplings by sqrt(2) but leaves the tau_D unit and
the isochore durations fixed.

All CSV output starts with '#' comment lines embedding the fully
resolved configuration, carries 12 significant digits, and contains no
timestamps, so identical configurations produce byte-identical files.
The exit code is nonzero iff any run failed; failed sweep rows are
flagged in-place and do not abort the remaining rows.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .bath import BathSpec, coupling_spectrum
from .cycle import CycleConfig, RunResult, distance_diagnostics, run_cycle, sweep
from .drive import StrokeSchedule
from .generator import GeneratorMode
from .thermo import EnergyLedger, ledger, limiting_cycles

FLOAT_FMT = "%.12g"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Flat run configuration; field names are the config-file keys."""

    beta_h: float = 2.0
    beta_c: float = 5.0
    g_cold: float = 0.2
    g_hot: float = 0.17
    g_set: str = "g1"            # g1 | g2 (g2 = sqrt(2) * g1)
    omega_r: float = 0.6
    omega1: float = 0.49
    omega2: float = 0.78
    f: float = 2.0
    delta: float = 0.1
    tau_ab: float = 1.0          # units of tau_D
    tau_cd: float = 1.0          # units of tau_D
    tau_th: float = 6.0          # units of tau_D
    dt: float = 0.0              # integrator step; 0 = automatic
    mode: str = "full"           # full | rotating
    variant: str = "both"        # both | bare | effective
    kernel_tauc_factor: float = 10.0
    kernel_taub_factor: float = 5.0
    kernel_full_history: bool = False
    sweep_mode: str = "symmetric"   # symmetric | fix-ab | fix-cd
    sweep_min: float = 0.05      # units of tau_D
    sweep_max: float = 20.0
    sweep_points: int = 25
    workers: int = 1
    spectrum_omega_max: float = 2.0
    spectrum_points: int = 500
    out_dir: str = "."

    def validate(self) -> "RunConfig":
        checks = [
            ("beta_h", self.beta_h > 0, "must be > 0"),
            ("beta_c", self.beta_c > 0, "must be > 0"),
            ("beta_c", self.beta_c > self.beta_h, "must exceed beta_h (cold bath is colder)"),
            ("g_cold", self.g_cold > 0, "must be > 0"),
            ("g_hot", self.g_hot > 0, "must be > 0"),
            ("g_set", self.g_set in ("g1", "g2"), "must be g1 or g2"),
            ("omega_r", self.omega_r > 0, "must be > 0"),
            ("omega1", 0 < self.omega1 <= self.omega2, "needs 0 < omega1 <= omega2"),
            ("delta", 0 < 2 * self.delta < self.omega1, "needs 0 < 2*delta < omega1"),
            ("f", self.f > 0, "must be > 0"),
            ("tau_ab", self.tau_ab > 0, "must be > 0"),
            ("tau_cd", self.tau_cd > 0, "must be > 0"),
            ("tau_th", self.tau_th > 0, "must be > 0"),
            ("dt", self.dt >= 0, "must be >= 0 (0 selects the automatic step)"),
            ("mode", self.mode in ("full", "rotating"), "must be full or rotating"),
            ("variant", self.variant in ("both", "bare", "effective"), "must be both, bare, or effective"),
            ("kernel_tauc_factor", self.kernel_tauc_factor > 0, "must be > 0"),
            ("kernel_taub_factor", self.kernel_taub_factor > 0, "must be > 0"),
            ("sweep_mode", self.sweep_mode in ("symmetric", "fix-ab", "fix-cd"), "must be symmetric, fix-ab, or fix-cd"),
            ("sweep_min", self.sweep_min > 0, "must be > 0"),
            ("sweep_max", self.sweep_max > self.sweep_min, "must exceed sweep_min"),
            ("sweep_points", self.sweep_points >= 2, "must be >= 2"),
            ("workers", self.workers >= 1, "must be >= 1"),
            ("spectrum_omega_max", self.spectrum_omega_max > 0, "must be > 0"),
            ("spectrum_points", self.spectrum_points >= 2, "must be >= 2"),
        ]
        for key, ok, constraint in checks:
            if not ok:
                raise ConfigError(f"config key '{key}' {constraint} (got {getattr(self, key)!r})")
        return self

    # --- derived objects -------------------------------------------------

    def g_multiplier(self) -> float:
        return math.sqrt(2.0) if self.g_set == "g2" else 1.0

    def baths(self):
        m = self.g_multiplier()
        cold = BathSpec(beta=self.beta_c, g=m * self.g_cold, omega_res=self.omega_r, f=self.f, label="cold")
        hot = BathSpec(beta=self.beta_h, g=m * self.g_hot, omega_res=self.omega_r, f=self.f, label="hot")
        return cold, hot

    def tau_d(self) -> float:
        """Driving-duration unit: hot-bath relaxation time at the g1 coupling."""
        base = BathSpec(beta=self.beta_h, g=self.g_hot, omega_res=self.omega_r, f=self.f, label="hot")
        return 1.0 / coupling_spectrum(self.omega_r, base)

    def cycle_config(self, tau_ab: float | None = None, tau_cd: float | None = None) -> CycleConfig:
        td = self.tau_d()
        cold, hot = self.baths()
        sched = StrokeSchedule(
            tau_ab=(tau_ab if tau_ab is not None else self.tau_ab) * td,
            tau_bc=self.tau_th * td,
            tau_cd=(tau_cd if tau_cd is not None else self.tau_cd) * td,
            tau_da=self.tau_th * td,
            omega1=self.omega1,
            omega2=self.omega2,
            delta=self.delta,
        )
        return CycleConfig(
            sched=sched,
            cold=cold,
            hot=hot,
            dt=self.dt if self.dt > 0 else None,
            mode=GeneratorMode.FULL if self.mode == "full" else GeneratorMode.ROTATING_ONLY,
            kernel_full_history=self.kernel_full_history,
            kernel_tauc_factor=self.kernel_tauc_factor,
            kernel_taub_factor=self.kernel_taub_factor,
        )

    def header_lines(self) -> list[str]:
        # out_dir is an I/O detail, not part of the physical configuration;
        # leaving it out keeps equal configurations byte-identical
        items = [
            f"{f.name}={getattr(self, f.name)}" for f in fields(self) if f.name != "out_dir"
        ]
        return ["# qstirling run configuration", "# " + " ".join(items)]


_BOOL_KEYS = {"kernel_full_history"}
_INT_KEYS = {"sweep_points", "workers", "spectrum_points"}
_STR_KEYS = {"g_set", "mode", "variant", "sweep_mode", "out_dir"}


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines ('#' comments allowed) over the defaults."""
    cfg = base or RunConfig()
    known = {f.name for f in fields(RunConfig)}
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown config key '{key}'")
        updates[key] = _coerce(key, value)
    return replace(cfg, **updates).validate()


def _coerce(key: str, value: str):
    if key in _BOOL_KEYS:
        low = value.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"config key '{key}' must be a boolean, got {value!r}")
    if key in _INT_KEYS:
        try:
            return int(value)
        except ValueError as exc:
            raise ConfigError(f"config key '{key}' must be an integer, got {value!r}") from exc
    if key in _STR_KEYS:
        return value
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"config key '{key}' must be a number, got {value!r}") from exc


def load_config(path: str | None, overrides: list[str]) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        cfg = parse_config_text(Path(path).read_text(), cfg)
    if overrides:
        cfg = parse_config_text("\n".join(overrides), cfg)
    return cfg.validate()


# ---------------------------------------------------------------------------
# CSV helpers
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return FLOAT_FMT % value

def write_csv(path: Path, cfg: RunConfig, columns: list[str], rows: list[list]) -> None:
    lines = list(cfg.header_lines())
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


LEDGER_VARIANT_COLUMNS = [
    "Q_ab", "Q_bc", "Q_cd", "Q_da",
    "W_ab", "W_bc", "W_cd", "W_da",
    "W_extract", "Q_h", "P", "P_period", "eta",
    "first_law_residual", "not_an_engine",
]


def ledger_columns(variants) -> list[str]:
    cols = ["tau_ab", "tau_cd"]
    for v in variants:
        prefix = "bare" if v == "bare" else "eff"
        cols += [f"{prefix}_{c}" for c in LEDGER_VARIANT_COLUMNS]
    cols += ["status"]
    return cols


def ledger_row(led: EnergyLedger, tau_d: float, variants, status: str = "ok") -> list:
    row = [led.tau_ab / tau_d, led.tau_cd / tau_d]
    for v in variants:
        lv = led.variant(v)
        row += [lv.heat_in[s] for s in ("ab", "bc", "cd", "da")]
        row += [lv.work_on[s] for s in ("ab", "bc", "cd", "da")]
        row += [
            lv.w_extract,
            lv.q_h,
            lv.power,
            lv.power_per_period,
            math.nan if lv.eta is None else lv.eta,
            lv.first_law_residual,
            lv.not_an_engine,
        ]
    row.append(status)
    return row


def failed_ledger_row(tau_ab_td: float, tau_cd_td: float, variants, message: str) -> list:
    row = [tau_ab_td, tau_cd_td]
    for _ in variants:
        row += [math.nan] * (len(LEDGER_VARIANT_COLUMNS) - 1) + [True]
    row.append("failed: " + message.replace(",", ";"))
    return row


def _variants(cfg: RunConfig):
    return ("bare", "effective") if cfg.variant == "both" else (cfg.variant,)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig, out_dir: Path) -> int:
    cold, hot = cfg.baths()
    omegas = np.linspace(
        cfg.spectrum_omega_max / cfg.spectrum_points,
        cfg.spectrum_omega_max,
        cfg.spectrum_points,
    )
    rows = [
        [w, coupling_spectrum(w, cold), coupling_spectrum(w, hot)] for w in omegas
    ]
    write_csv(out_dir / "spectrum.csv", cfg, ["omega", "G_cold", "G_hot"], rows)
    print(f"spectrum.csv: {len(rows)} rows")
    return 0


def cmd_rates(cfg: RunConfig, out_dir: Path, tau: float) -> int:
    if tau <= 0:
        raise ConfigError("rates --tau must be > 0 (units of tau_D)")
    result = run_cycle(cfg.cycle_config(tau_ab=tau, tau_cd=tau))
    traj = result.trajectory
    gd, gu, d_r, d_cr = traj.rate_diagnostics()
    lamb_r, lamb_cr = traj.lamb_coefficients()
    lo = min(s.lo for s in traj.slices(1))
    hi = max(s.hi for s in traj.slices(1))
    rows = []
    for idx in range(lo, hi + 1):
        sl = traj.slice_at(idx)
        rows.append(
            [
                traj.t[idx],
                traj.omega[idx],
                gd[idx],
                gu[idx],
                d_r[idx],
                d_cr[idx],
                lamb_r[idx],
                lamb_cr[idx],
                sl.stroke,
                str(traj.bath[idx]),
            ]
        )
    write_csv(
        out_dir / "rates.csv",
        cfg,
        ["t", "omega", "gamma_down", "gamma_up", "delta_R", "delta_CR", "lamb_R", "lamb_CR", "stroke", "bath"],
        rows,
    )
    print(f"rates.csv: {len(rows)} rows (tau_ab = tau_cd = {tau} tau_D)")
    return 0


def _trajectory_rows(result: RunResult):
    traj = result.trajectory
    lo = min(s.lo for s in traj.slices(1))
    hi = max(s.hi for s in traj.slices(1))
    pol = traj.polarization()
    rows = []
    for idx in range(lo, hi + 1):
        h_hat = np.array([traj.delta, 0.0, traj.q[idx]]) / math.hypot(traj.q[idx], traj.delta)
        p_e = 0.5 * (1.0 + float(h_hat @ traj.r[idx]))
        sl = traj.slice_at(idx)
        rows.append(
            [traj.t[idx], traj.omega[idx], pol[idx], p_e, 1.0 - p_e, sl.stroke, str(traj.bath[idx])]
        )
    return rows


def cmd_cycle(cfg: RunConfig, out_dir: Path) -> int:
    result = run_cycle(cfg.cycle_config())
    write_csv(
        out_dir / "trajectory.csv",
        cfg,
        ["t", "omega", "n", "p_e", "p_g", "stroke", "bath"],
        _trajectory_rows(result),
    )
    led = ledger(result)
    variants = _variants(cfg)
    write_csv(
        out_dir / "ledger.csv",
        cfg,
        ledger_columns(variants),
        [ledger_row(led, cfg.tau_d(), variants)],
    )
    print(
        f"trajectory.csv + ledger.csv written; periodicity residual "
        f"{result.periodicity_residual:.3e}"
    )
    return 0


def sweep_durations(cfg: RunConfig) -> list[tuple[float, float]]:
    taus = np.geomspace(cfg.sweep_min, cfg.sweep_max, cfg.sweep_points)
    if cfg.sweep_mode == "symmetric":
        return [(t, t) for t in taus]
    if cfg.sweep_mode == "fix-ab":
        return [(cfg.tau_ab, t) for t in taus]
    return [(t, cfg.tau_cd) for t in taus]


def cmd_sweep(cfg: RunConfig, out_dir: Path) -> int:
    td = cfg.tau_d()
    pairs_td = sweep_durations(cfg)
    base = cfg.cycle_config()
    outs = sweep([(ta * td, tc * td) for ta, tc in pairs_td], base, workers=cfg.workers)
    variants = _variants(cfg)
    led_rows, dist_rows = [], []
    failures = 0
    for (ta, tc), (idx, result, err) in zip(pairs_td, outs):
        if result is None:
            failures += 1
            led_rows.append(failed_ledger_row(ta, tc, variants, err))
            dist_rows.append([ta, tc, math.nan, math.nan, math.nan, math.nan, "failed"])
            continue
        led_rows.append(ledger_row(ledger(result), td, variants))
        d = distance_diagnostics(result)
        dist_rows.append(
            [ta, tc, d["S_b_bstar"], d["S_d_dstar"], d["S_b_c"], d["S_d_a"], "ok"]
        )
    write_csv(out_dir / f"sweep_{cfg.sweep_mode}.csv", cfg, ledger_columns(variants), led_rows)
    write_csv(
        out_dir / f"distances_{cfg.sweep_mode}.csv",
        cfg,
        ["tau_ab", "tau_cd", "S_b_bstar", "S_d_dstar", "S_b_c", "S_d_a", "status"],
        dist_rows,
    )
    print(f"sweep_{cfg.sweep_mode}.csv: {len(led_rows)} rows, {failures} failed")
    return 1 if failures else 0


def cmd_oracles(cfg: RunConfig, out_dir: Path) -> int:
    reports = limiting_cycles(cfg.omega1, cfg.omega2, cfg.delta, cfg.beta_h, cfg.beta_c)
    rows = []
    for case in ("ss", "fs", "sf", "ff"):
        rep = reports[case]
        rows.append(
            [case]
            + [rep.heat_in[s] for s in ("ab", "bc", "cd", "da")]
            + [rep.work_on[s] for s in ("ab", "bc", "cd", "da")]
            + [rep.w_extract, rep.q_h, rep.eta]
        )
    write_csv(
        out_dir / "oracles.csv",
        cfg,
        ["case", "Q_ab", "Q_bc", "Q_cd", "Q_da", "W_ab", "W_bc", "W_cd", "W_da", "W_extract", "Q_h", "eta"],
        rows,
    )
    print("oracles.csv: 4 limiting cycles")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qstirling",
        description="Finite-time quantum Stirling engine: spectra, rates, cycles, sweeps, analytic oracles.",
    )
    parser.add_argument("--config", help="path to a key = value configuration file")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a single configuration key (repeatable)",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", help="bath coupling spectra CSV")
    p_rates = sub.add_parser("rates", help="generator rates along one cycle")
    p_rates.add_argument("--tau", type=float, required=True, help="tau_ab = tau_cd in units of tau_D")
    sub.add_parser("cycle", help="single cycle: trajectory CSV + energy ledger")
    sub.add_parser("sweep", help="duration sweep: ledger + distance CSVs")
    sub.add_parser("oracles", help="closed-form limiting-cycle energetics")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(cfg.out_dir)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", RuntimeWarning)
            if args.command == "spectrum":
                return cmd_spectrum(cfg, out_dir)
            if args.command == "rates":
                return cmd_rates(cfg, out_dir, args.tau)
            if args.command == "cycle":
                return cmd_cycle(cfg, out_dir)
            if args.command == "sweep":
                return cmd_sweep(cfg, out_dir)
            if args.command == "oracles":
                return cmd_oracles(cfg, out_dir)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
