"""Run orchestration and reporting for the command-line surface.

Every command computes its full result first and only then writes
output, each file atomically (write to a temporary sibling, then
rename), so a failing run never leaves partial files behind. Results
tables are CSV with full-precision decimal floats; summaries are plain
text with headline S values rounded to four decimals.
"""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import chsh, config
from .errors import DomainError

VACUUM_SIGNAL_SPEED = 3.0e8
FIBER_SIGNAL_SPEED = 2.0e8
DEFAULT_DETECTION_TIME = 1.0e-6
DEFAULT_ATTENUATION_DB_PER_KM = 2.0
DEFAULT_STABILITY_THRESHOLD = 0.1


@dataclass(frozen=True)
class LinkBudget:
    """Distance, loss, and timing figures for one optical link."""

    distance: float
    attenuation_db_per_km: float = DEFAULT_ATTENUATION_DB_PER_KM
    detection_time: float = DEFAULT_DETECTION_TIME
    signal_speed: float = VACUUM_SIGNAL_SPEED

    def __post_init__(self):
        for name in ("distance", "attenuation_db_per_km", "detection_time",
                     "signal_speed"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise DomainError(f"{name} must be finite and non-negative")
        if self.detection_time == 0 or self.signal_speed == 0:
            raise DomainError("detection_time and signal_speed must be positive")


@dataclass(frozen=True)
class LocalityReport:
    """Separation bound and fiber budget for one link."""

    budget: LinkBudget
    min_separation: float
    fiber_window: float
    transmission: float
    separation_ok: bool


def locality_check(budget: LinkBudget,
                   fiber_speed: float = FIBER_SIGNAL_SPEED) -> LocalityReport:
    """Separation needed to outrun the measurement, and the fiber cost.

    The bound is detection_time times signal_speed; the fiber window is
    the distance light covers in fiber over the same time, reported as
    an alternative since either speed can be the relevant one.
    Transmission converts dB/km attenuation over the link distance.
    """
    if fiber_speed <= 0:
        raise DomainError("fiber_speed must be positive")
    min_sep = budget.detection_time * budget.signal_speed
    fiber_window = budget.detection_time * fiber_speed
    loss_db = budget.attenuation_db_per_km * budget.distance / 1000.0
    transmission = 10.0 ** (-loss_db / 10.0)
    return LocalityReport(budget=budget, min_separation=min_sep,
                          fiber_window=fiber_window, transmission=transmission,
                          separation_ok=budget.distance >= min_sep)


@dataclass(frozen=True)
class StabilityReport:
    """Interferometric phase excursion against a pass threshold."""

    k_norm: float
    delta_l: float
    phase: float
    threshold: float
    passed: bool


def phase_stability(k_norm: float, delta_l: float,
                    threshold: float = DEFAULT_STABILITY_THRESHOLD) -> StabilityReport:
    """Phase excursion k_norm * delta_l compared with the threshold."""
    if k_norm <= 0 or not math.isfinite(k_norm):
        raise DomainError("k_norm must be positive")
    if delta_l < 0 or not math.isfinite(delta_l):
        raise DomainError("delta_l must be non-negative")
    if threshold <= 0:
        raise DomainError("threshold must be positive")
    phase = k_norm * delta_l
    return StabilityReport(k_norm=k_norm, delta_l=delta_l, phase=phase,
                           threshold=threshold, passed=phase < threshold)


def atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


def render_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


@dataclass(frozen=True)
class RunOutput:
    """Files written by a command plus the on-screen summary."""

    summary: str
    files: tuple[Path, ...]


def _result_table(result: chsh.ChshResult) -> tuple[list[str], list[list]]:
    params = result.params
    header = ["scenario", *params.keys(), "e11", "e12", "e21", "e22", "s"]
    row = [result.scenario.label, *params.values(), *result.correlators,
           result.s_value]
    return header, [row]


def _write_pair(out_dir: Path, stem: str, csv_text: str,
                summary: str) -> tuple[Path, ...]:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    txt_path = out_dir / f"{stem}.txt"
    atomic_write_text(csv_path, csv_text)
    atomic_write_text(txt_path, summary)
    return (csv_path, txt_path)


def _correlator_lines(result: chsh.ChshResult) -> list[str]:
    e11, e12, e21, e22 = result.correlators
    return [f"E11 = {e11:+.6f}", f"E12 = {e12:+.6f}",
            f"E21 = {e21:+.6f}", f"E22 = {e22:+.6f}",
            f"S = {result.s_value:.4f}"]


def run_evaluate(source: str, out_dir: Path) -> RunOutput:
    scenario = config.load_scenario(source).pinned()
    result = chsh.evaluate(scenario)
    header, rows = _result_table(result)
    lines = [f"scenario: {scenario.label}", "mode: evaluate (parameters as given)",
             *_correlator_lines(result)]
    summary = "\n".join(lines) + "\n"
    files = _write_pair(Path(out_dir), f"{scenario.label}.evaluate",
                        render_csv(header, rows), summary)
    return RunOutput(summary=summary, files=files)


def run_optimize(source: str, out_dir: Path, seed: int,
                 n_starts: int) -> RunOutput:
    scenario = config.load_scenario(source)
    result = chsh.optimize(scenario, seed=seed, n_starts=n_starts)
    header, rows = _result_table(result)
    trace = result.trace
    lines = [f"scenario: {scenario.label}",
             f"mode: optimize over {', '.join(fp.name for fp in scenario.free_params)}",
             f"seed: {trace.seed}  starts: {trace.n_starts}  "
             f"converged: {sum(trace.converged_per_start)}",
             *_correlator_lines(result)]
    summary = "\n".join(lines) + "\n"
    files = _write_pair(Path(out_dir), f"{scenario.label}.optimize",
                        render_csv(header, rows), summary)
    return RunOutput(summary=summary, files=files)


def run_threshold(source: str, out_dir: Path, param: str, lo: float, hi: float,
                  tol: float, seed: int, n_starts: int) -> RunOutput:
    scenario = config.load_scenario(source)
    result = chsh.threshold(scenario, param, lo=lo, hi=hi, tol=tol,
                            seed=seed, n_starts=n_starts)
    header = ["stage", param, "s_star"]
    rows = [["scan", p, s] for p, s in result.scan]
    rows += [["probe", p, s] for p, s in result.probes]
    if result.found:
        rows.append(["result", result.value, ""])
        value_line = f"threshold: {param} = {result.value:.4f} (tolerance {tol})"
    else:
        value_line = f"threshold: not found ({result.message})"
    lines = [f"scenario: {scenario.label}",
             f"mode: threshold sweep of {param} on [{lo}, {hi}]",
             value_line]
    summary = "\n".join(lines) + "\n"
    files = _write_pair(Path(out_dir), f"{scenario.label}.threshold.{param}",
                        render_csv(header, rows), summary)
    return RunOutput(summary=summary, files=files)


def run_fig2(source: Optional[str], out_dir: Path, seed: int,
             n_starts: int) -> RunOutput:
    sweep = config.load_sweep(source if source is not None else "fig2")
    result = chsh.figure2_sweep(eta_d_values=sweep.eta_d_values,
                                eta_t_grid=sweep.eta_t_grid,
                                include_two_homodyne=sweep.two_homodyne,
                                seed=seed, n_starts=n_starts)
    header = ["eta_t"] + [f"s_{curve.label}" for curve in result.curves]
    rows = []
    for i, eta_t in enumerate(result.eta_t_grid):
        rows.append([eta_t] + [curve.s_values[i] for curve in result.curves])
    lines = [f"sweep: {sweep.label}",
             f"grid: eta_t from {result.eta_t_grid[0]} to {result.eta_t_grid[-1]} "
             f"({len(result.eta_t_grid)} points)"]
    for curve in result.curves:
        lines.append(f"{curve.label}: S = {curve.s_values[0]:.4f} .. "
                     f"{curve.s_values[-1]:.4f}")
    summary = "\n".join(lines) + "\n"
    files = _write_pair(Path(out_dir), f"{sweep.label}.fig2",
                        render_csv(header, rows), summary)
    return RunOutput(summary=summary, files=files)


def run_locality(out_dir: Path, distance: float, attenuation: float,
                 detection_time: float, signal_speed: float,
                 fiber_speed: float) -> RunOutput:
    budget = LinkBudget(distance=distance, attenuation_db_per_km=attenuation,
                        detection_time=detection_time, signal_speed=signal_speed)
    report = locality_check(budget, fiber_speed=fiber_speed)
    header = ["distance_m", "attenuation_db_per_km", "detection_time_s",
              "signal_speed_m_per_s", "fiber_speed_m_per_s",
              "min_separation_m", "fiber_window_m", "transmission",
              "separation_ok"]
    rows = [[distance, attenuation, detection_time, signal_speed, fiber_speed,
             report.min_separation, report.fiber_window, report.transmission,
             report.separation_ok]]
    lines = [
        f"minimum separation to outrun a {detection_time:g} s measurement "
        f"at {signal_speed:g} m/s: {report.min_separation:.1f} m",
        f"distance covered in fiber ({fiber_speed:g} m/s) over the same "
        f"window: {report.fiber_window:.1f} m",
        f"transmission over {distance:g} m at {attenuation:g} dB/km: "
        f"{report.transmission:.4f}",
        f"given distance {distance:g} m meets the separation bound: "
        f"{'yes' if report.separation_ok else 'no'}",
    ]
    summary = "\n".join(lines) + "\n"
    files = _write_pair(Path(out_dir), "locality",
                        render_csv(header, rows), summary)
    return RunOutput(summary=summary, files=files)


def run_stability(out_dir: Path, k_norm: float, delta_l: float,
                  threshold: float) -> RunOutput:
    report = phase_stability(k_norm, delta_l, threshold=threshold)
    header = ["k_norm_per_m", "delta_l_m", "phase_rad", "threshold_rad",
              "passed"]
    rows = [[k_norm, delta_l, report.phase, threshold, report.passed]]
    lines = [
        f"phase excursion k * dL = {report.phase:.4g} rad "
        f"(k = {k_norm:g} 1/m, dL = {delta_l:g} m)",
        f"threshold: {threshold:g} rad",
        f"stable: {'yes' if report.passed else 'no'}",
    ]
    summary = "\n".join(lines) + "\n"
    files = _write_pair(Path(out_dir), "stability",
                        render_csv(header, rows), summary)
    return RunOutput(summary=summary, files=files)
