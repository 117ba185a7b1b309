"""Experiment orchestration and reporting.

Single runs, parameter sweeps (coupling, drive, step count,
decoherence scale), truncation validation against the full
tensor-product pipeline, and CSV/JSON report emission.  Every report
row echoes the full parameter point so result files are
self-describing; identical configs produce identical rows apart from
the wall-clock column.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .config import ConfigError, ExperimentConfig, validate_config
from .idealwalk import CoinState, run_ideal
from .lindblad import EvolutionResult, build_collapse_set, evolve_schedule
from .metrics import extract_distribution, similarity_report
from .protocol import build_schedule
from .statespace import E, F, StateSpace

REPORT_COLUMNS = (
    "n_steps", "g_over_2pi_MHz", "omega_over_2pi_MHz", "mu_over_2pi_MHz",
    "theta_rad", "coin0", "scale", "S", "S_renorm", "residual_vacuum",
    "residual_cavity", "trace_error", "wall_ms",
)


@dataclass
class Report:
    """Self-describing record of one experiment run."""

    n_steps: int
    g_over_2pi_mhz: float
    omega_over_2pi_mhz: float
    mu_over_2pi_mhz: float
    theta_rad: float
    coin0: str
    scale: float
    s: float
    s_renorm: float
    residual_vacuum: float
    residual_cavity: float
    trace_error: float
    wall_ms: float
    p_me: np.ndarray = field(default_factory=lambda: np.zeros(0))
    p_id: np.ndarray = field(default_factory=lambda: np.zeros(0))
    max_hermiticity_drift: float = 0.0
    error: str | None = None
    evolution: EvolutionResult | None = None

    def column_values(self) -> list:
        return [self.n_steps, self.g_over_2pi_mhz, self.omega_over_2pi_mhz,
                self.mu_over_2pi_mhz, self.theta_rad, self.coin0, self.scale,
                self.s, self.s_renorm, self.residual_vacuum,
                self.residual_cavity, self.trace_error, self.wall_ms]


def initial_density_matrix(space: StateSpace, coin: CoinState) -> np.ndarray:
    """Walker on qutrit 1 with coin (c0 -> f, c1 -> e), rest in vacuum."""
    psi = np.zeros(space.dim, dtype=complex)
    if space.mode == "truncated":
        psi[space.qutrit_index(1, F)] = coin.c0
        psi[space.qutrit_index(1, E)] = coin.c1
    else:
        levels = [0] * space.n_qutrits
        photons = (0,) * space.n_cavities
        levels[0] = F
        psi[space.full_index(levels, photons)] = coin.c0
        levels[0] = E
        psi[space.full_index(levels, photons)] = coin.c1
    return np.outer(psi, psi.conj())


def run_experiment(cfg: ExperimentConfig, record: str = "none") -> Report:
    """Build the schedule, evolve, read out and score one experiment."""
    cfg = validate_config(cfg)
    start = time.perf_counter()
    space = cfg.space()
    params = cfg.device_params()
    schedule = build_schedule(space, params)
    collapse = build_collapse_set(space, cfg.rates())
    rho0 = initial_density_matrix(space, cfg.coin())
    evolution = evolve_schedule(rho0, schedule, collapse, cfg.integrator(),
                                record=record)
    dist = extract_distribution(evolution.rho, space)
    p_id = run_ideal(cfg.n_steps, cfg.theta_rad, cfg.coin())
    sim = similarity_report(dist.p, p_id)
    wall_ms = 1e3 * (time.perf_counter() - start)
    mu = cfg.mu_over_2pi_mhz
    return Report(
        n_steps=cfg.n_steps,
        g_over_2pi_mhz=cfg.g_over_2pi_mhz,
        omega_over_2pi_mhz=cfg.omega_over_2pi_mhz,
        mu_over_2pi_mhz=cfg.g_over_2pi_mhz if mu is None else mu,
        theta_rad=cfg.theta_rad,
        coin0=cfg.coin0,
        scale=cfg.scale,
        s=sim.s,
        s_renorm=sim.s_renorm,
        residual_vacuum=dist.residual_vacuum,
        residual_cavity=dist.residual_cavity,
        trace_error=evolution.max_trace_error,
        wall_ms=wall_ms,
        p_me=dist.p,
        p_id=p_id,
        max_hermiticity_drift=evolution.max_hermiticity_drift,
        evolution=evolution if record != "none" else None,
    )


# ---------------------------------------------------------------------------
# sweeps

_AXIS_TO_FIELD = {
    "g": "g_over_2pi_mhz",
    "omega_rabi": "omega_over_2pi_mhz",
    "n_steps": "n_steps",
    "scale": "scale",
}


@dataclass(frozen=True)
class SweepSpec:
    """One or two swept axes with ordered value lists.

    axis names: "g", "omega_rabi" (both MHz), "n_steps", "scale".
    """

    axis: str
    values: tuple
    cross_axis: str | None = None
    cross_values: tuple = ()

    def __post_init__(self):
        self._check_axis(self.axis, self.values)
        if self.cross_axis is not None:
            if self.cross_axis == self.axis:
                raise ConfigError("cross axis must differ from primary axis")
            self._check_axis(self.cross_axis, self.cross_values)
        elif self.cross_values:
            raise ConfigError("cross values given without a cross axis")

    @staticmethod
    def _check_axis(axis, values):
        if axis not in _AXIS_TO_FIELD:
            raise ConfigError(f"unknown sweep axis {axis!r}; choose from "
                              f"{sorted(_AXIS_TO_FIELD)}")
        if not values:
            raise ConfigError(f"axis {axis!r} has no values")
        for v in values:
            if not v > 0:
                raise ConfigError(f"axis {axis!r} values must be positive")


def sweep_grid(base: ExperimentConfig, spec: SweepSpec) -> list[ExperimentConfig]:
    """Config per grid point, primary axis outermost (row-major)."""
    def apply(cfg, axis, value):
        name = _AXIS_TO_FIELD[axis]
        value = int(value) if name == "n_steps" else float(value)
        return replace(cfg, **{name: value})

    grid = []
    for v in spec.values:
        point = apply(base, spec.axis, v)
        if spec.cross_axis is None:
            grid.append(validate_config(point))
        else:
            for w in spec.cross_values:
                grid.append(validate_config(apply(point, spec.cross_axis, w)))
    return grid


def _error_report(cfg: ExperimentConfig, message: str) -> Report:
    nan = float("nan")
    mu = cfg.mu_over_2pi_mhz
    return Report(
        n_steps=cfg.n_steps, g_over_2pi_mhz=cfg.g_over_2pi_mhz,
        omega_over_2pi_mhz=cfg.omega_over_2pi_mhz,
        mu_over_2pi_mhz=cfg.g_over_2pi_mhz if mu is None else mu,
        theta_rad=cfg.theta_rad, coin0=cfg.coin0, scale=cfg.scale,
        s=nan, s_renorm=nan, residual_vacuum=nan, residual_cavity=nan,
        trace_error=nan, wall_ms=nan, error=message)


def _sweep_point(cfg: ExperimentConfig) -> Report:
    """Worker for one grid point; failures become error rows."""
    try:
        return run_experiment(cfg)
    except Exception as exc:  # recorded per-row, sweep continues
        return _error_report(cfg, f"{type(exc).__name__}: {exc}")


def run_sweep(base: ExperimentConfig, spec: SweepSpec,
              workers: int = 1) -> list[Report]:
    """One Report per grid point, in grid order.

    Points are independent; workers > 1 runs them in separate
    processes with deterministic (grid-order) collection.  Per-point
    failures are recorded on their row and do not abort the sweep.
    """
    grid = sweep_grid(base, spec)
    if workers <= 1:
        return [_sweep_point(cfg) for cfg in grid]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_point, grid))


# ---------------------------------------------------------------------------
# truncation validation


@dataclass(frozen=True)
class TruncationReport:
    """Deviations between the sector and full tensor-product pipelines."""

    distribution_deviation: float
    similarity_deviation: float
    residual_vacuum_deviation: float
    truncated: Report
    full: Report


def validate_truncation(cfg: ExperimentConfig) -> TruncationReport:
    """Run the same experiment in both representations and compare.

    Guarded to n_steps <= 2: the full space has dimension
    3^(N+1) * cutoff^N and the comparison is only meant as a
    correctness oracle, not a production path.
    """
    if cfg.n_steps > 2:
        raise ConfigError("truncation validation is guarded to n_steps <= 2")
    trunc = run_experiment(replace(cfg, representation="truncated"))
    full = run_experiment(replace(cfg, representation="full"))
    return TruncationReport(
        distribution_deviation=float(np.max(np.abs(trunc.p_me - full.p_me))),
        similarity_deviation=abs(trunc.s - full.s),
        residual_vacuum_deviation=abs(trunc.residual_vacuum
                                      - full.residual_vacuum),
        truncated=trunc, full=full)


# ---------------------------------------------------------------------------
# report emission


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def emit_report(reports, destination, fmt: str = "csv") -> None:
    """Write reports as CSV (pinned column set) or JSON.

    destination is a path or a text file object.  JSON mirrors the CSV
    columns and adds the nested P_me / P_id arrays (and the error
    message for failed sweep points).
    """
    if not reports:
        raise ValueError("no reports to emit")
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    own = isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__")
    fh = open(destination, "w", encoding="utf-8", newline="") if own else destination
    try:
        if fmt == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(REPORT_COLUMNS)
            for rep in reports:
                writer.writerow([_cell(v) for v in rep.column_values()])
        else:
            json.dump([report_to_json_obj(rep) for rep in reports], fh,
                      indent=2)
            fh.write("\n")
    finally:
        if own:
            fh.close()


def report_to_json_obj(rep: Report) -> dict:
    obj = dict(zip(REPORT_COLUMNS, rep.column_values()))
    obj["P_me"] = [float(x) for x in np.asarray(rep.p_me)]
    obj["P_id"] = [float(x) for x in np.asarray(rep.p_id)]
    if rep.error is not None:
        obj["error"] = rep.error
    return obj


def emit_distribution(report: Report, destination) -> None:
    """Per-site paired columns: site, P_me, P_id (one row per site)."""
    if len(report.p_me) != len(report.p_id):
        raise ValueError("report has no paired distributions")
    own = isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__")
    fh = open(destination, "w", encoding="utf-8", newline="") if own else destination
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("site", "P_me", "P_id"))
        for site, (pm, pi) in enumerate(zip(report.p_me, report.p_id), start=1):
            writer.writerow((site, _cell(pm), _cell(pi)))
    finally:
        if own:
            fh.close()


_PLOT_KINDS = ("sweep", "dist")

# column index (1-based) of each sweep axis in the CSV layout
_AXIS_TO_COLUMN = {"n_steps": 1, "g": 2, "omega_rabi": 3, "scale": 7}
_S_COLUMN = 8


def emit_plot_script(data_path: str, destination,
                     kind: str = "sweep", axis: str = "n_steps") -> None:
    """Companion gnuplot-style script for a report or distribution file.

    Plain text, tool-agnostic commands: similarity against the swept
    axis for "sweep" files, paired measured/ideal bars for "dist"
    files.
    """
    if kind not in _PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}")
    lines = ["set datafile separator ','", "set key top right"]
    if kind == "sweep":
        if axis not in _AXIS_TO_COLUMN:
            raise ValueError(f"unknown sweep axis {axis!r}")
        col = _AXIS_TO_COLUMN[axis]
        lines += [
            f"set xlabel '{axis}'",
            "set ylabel 'similarity S'",
            "set yrange [0:1.05]",
            f"plot '{data_path}' skip 1 using {col}:{_S_COLUMN} "
            "with linespoints title 'S'",
        ]
    else:
        lines += [
            "set xlabel 'site'",
            "set ylabel 'probability'",
            "set style fill solid 0.4",
            "set boxwidth 0.35",
            f"plot '{data_path}' skip 1 using ($1-0.18):2 with boxes "
            "title 'simulated', \\",
            f"     '{data_path}' skip 1 using ($1+0.18):3 with boxes "
            "title 'ideal'",
        ]
    own = isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__")
    fh = open(destination, "w", encoding="utf-8") if own else destination
    try:
        fh.write("\n".join(lines) + "\n")
    finally:
        if own:
            fh.close()
