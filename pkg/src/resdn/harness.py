"""Experiment driver: heuristic x volume grids, utility-parameter sweeps,
peak-parameter search, and CSV emission.

Everything is deterministic given the config and seed; result rows are
ordered by (heuristic, volume, matrix) rather than completion order.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path as FsPath

from . import __version__
from .heuristics import HEURISTIC_NAMES, run_heuristic
from .ingest import TrafficMatrix, bind_flows, parse_topology, parse_traffic_matrix, scale_to_volume
from .metrics import (
    CSV_COLUMNS,
    MetricsReport,
    avg_path_length,
    links_saved,
    resdn,
    traffic_proportionality,
)
from .model import PathBounds, Topology, UtilityInterval, as_fraction, build_topology
from .power import get_profile, network_power_report

# per-volume (u_min%, u_max%) pairs that maximized link savings in the
# published measurements
DEFAULT_SCHEDULE: dict[Fraction, UtilityInterval] = {
    Fraction(20, 100): UtilityInterval.from_percentages(31, 82),
    Fraction(30, 100): UtilityInterval.from_percentages(28, 85),
    Fraction(40, 100): UtilityInterval.from_percentages(30, 90),
    Fraction(50, 100): UtilityInterval.from_percentages(25, 90),
    Fraction(60, 100): UtilityInterval.from_percentages(20, 92),
    Fraction(70, 100): UtilityInterval.from_percentages(19, 95),
    Fraction(80, 100): UtilityInterval.from_percentages(15, 95),
    Fraction(90, 100): UtilityInterval.from_percentages(12, 95),
}

DEFAULT_VOLUMES = tuple(sorted(DEFAULT_SCHEDULE))

# proportionality weight of a switch relative to a link
M_SWITCH, N_LINK = 3, 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Inputs of one experiment grid."""

    topology_path: str
    traffic_paths: tuple[str, ...]
    volumes: tuple[Fraction, ...] = DEFAULT_VOLUMES
    schedule: dict[Fraction, UtilityInterval] = field(
        default_factory=lambda: dict(DEFAULT_SCHEDULE)
    )
    heuristics: tuple[str, ...] = HEURISTIC_NAMES
    profile: str = "nec"
    bounds: PathBounds = PathBounds()
    seed: int = 0
    out_dir: str = "results"
    shuffle_flows: bool = False

    def __post_init__(self):
        object.__setattr__(self, "volumes", tuple(as_fraction(v) for v in self.volumes))
        for v in self.volumes:
            if not 0 < v <= 1:
                raise ValueError(f"volume {v} outside (0, 1]")
        if not self.heuristics:
            raise ValueError("nothing to run: empty heuristics list")
        for h in self.heuristics:
            if h.lower() not in HEURISTIC_NAMES:
                raise ValueError(f"unknown heuristic {h!r}")

    def interval_for(self, volume: Fraction) -> UtilityInterval:
        try:
            return self.schedule[volume]
        except KeyError:
            raise ValueError(
                f"interval schedule does not cover volume {float(volume):g}"
            ) from None


def load_inputs(config: ExperimentConfig) -> tuple[Topology, list[tuple[str, TrafficMatrix]]]:
    topology = build_topology(
        parse_topology(FsPath(config.topology_path).read_text(encoding="utf-8"))
    )
    matrices = []
    for path in config.traffic_paths:
        text = FsPath(path).read_text(encoding="utf-8")
        matrices.append((FsPath(path).stem, parse_traffic_matrix(text)))
    if not matrices:
        raise ValueError("no traffic matrix given")
    return topology, matrices


def run_cell(
    topology: Topology,
    matrix: TrafficMatrix,
    heuristic: str,
    volume: Fraction,
    interval: UtilityInterval,
    profile_name: str,
    bounds: PathBounds,
    seed: int = 0,
    shuffle_flows: bool = False,
) -> MetricsReport:
    """Route one (heuristic, volume) cell and compute all metrics."""
    report = MetricsReport(
        heuristic=heuristic,
        traffic_volume=volume,
        u_min=interval.u_min,
        u_max=interval.u_max,
        profile=profile_name,
        max_paths=bounds.max_paths,
        hop_slack=bounds.hop_slack,
    )
    try:
        scaled = scale_to_volume(matrix, topology, volume)
        flows = bind_flows(scaled, topology)
        if shuffle_flows:
            random.Random(seed).shuffle(flows)
        outcome = run_heuristic(heuristic, topology, flows, interval, bounds)
        power = network_power_report(
            outcome.topology, outcome.state, get_profile(profile_name), scaled.window_s
        )
        report.resdn = resdn(outcome.state, outcome.topology, interval)
        report.links_saved_pct = links_saved(outcome.topology)
        report.avg_path_length = avg_path_length(outcome.state) if flows else None
        report.traffic_proportionality = traffic_proportionality(
            volume, outcome.topology, M_SWITCH, N_LINK
        )
        report.active_switches = len(outcome.topology.active_switches)
        report.total_switches = len(outcome.topology.switches)
        report.active_links = len(outcome.topology.active_links)
        report.total_links = len(outcome.topology.link_keys)
        report.flows = len(flows)
        report.fallback_flows = len(outcome.fallback_flows)
        report.total_power_w = power.total_w
        report.avg_power_active_w = power.avg_active_w
        report.avg_power_all_w = power.avg_all_w
        if outcome.provenance:
            report.message = outcome.provenance
    except Exception as exc:  # diagnostic row; the rest of the grid continues
        report.status = "error"
        report.message = str(exc)
    return report


def run_experiment(config: ExperimentConfig) -> list[MetricsReport]:
    """All (heuristic, volume, matrix) cells, ordered deterministically."""
    topology, matrices = load_inputs(config)
    rows = []
    for heuristic in sorted(set(h.lower() for h in config.heuristics)):
        for volume in sorted(config.volumes):
            for name, matrix in matrices:
                try:
                    interval = config.interval_for(volume)
                except ValueError as exc:
                    rows.append(
                        MetricsReport(
                            heuristic=heuristic,
                            traffic_volume=volume,
                            u_min=Fraction(0),
                            u_max=Fraction(1),
                            status="error",
                            message=str(exc),
                        )
                    )
                    continue
                rows.append(
                    run_cell(
                        topology,
                        matrix,
                        heuristic,
                        volume,
                        interval,
                        config.profile,
                        config.bounds,
                        seed=config.seed,
                        shuffle_flows=config.shuffle_flows,
                    )
                )
    return rows


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of a parameter sweep."""

    volume: Fraction
    param: Fraction
    links_saved_pct: Fraction | None
    valid: bool
    message: str = ""


def _sweep(
    config: ExperimentConfig,
    grid,
    interval_of,
    param_ok,
) -> list[SweepPoint]:
    topology, matrices = load_inputs(config)
    heuristic = config.heuristics[0].lower()
    _, matrix = matrices[0]
    points = []
    for volume in sorted(config.volumes):
        for raw in grid:
            param = as_fraction(raw)
            if not 0 <= param <= 1 or not param_ok(param):
                points.append(SweepPoint(volume, param, None, False, "invalid interval"))
                continue
            cell = run_cell(
                topology,
                matrix,
                heuristic,
                volume,
                interval_of(param),
                config.profile,
                config.bounds,
                seed=config.seed,
                shuffle_flows=config.shuffle_flows,
            )
            if cell.status != "ok":
                points.append(SweepPoint(volume, param, None, False, cell.message))
            else:
                points.append(SweepPoint(volume, param, cell.links_saved_pct, True))
    return points


def sweep_umin(config: ExperimentConfig, fixed_umax, grid) -> list[SweepPoint]:
    """Links saved per u_min grid point at a fixed u_max."""
    fixed_umax = as_fraction(fixed_umax)
    if not grid:
        raise ValueError("empty sweep grid")
    return _sweep(
        config,
        grid,
        interval_of=lambda u: UtilityInterval(u, fixed_umax),
        param_ok=lambda u: u <= fixed_umax,
    )


def sweep_umax(config: ExperimentConfig, fixed_umin, grid) -> list[SweepPoint]:
    """Links saved per u_max grid point at a fixed u_min."""
    fixed_umin = as_fraction(fixed_umin)
    if not grid:
        raise ValueError("empty sweep grid")
    return _sweep(
        config,
        grid,
        interval_of=lambda u: UtilityInterval(fixed_umin, u),
        param_ok=lambda u: u >= fixed_umin,
    )


def default_umin_grid() -> list[Fraction]:
    return [Fraction(k, 100) for k in range(2, 61, 2)]


def default_umax_grid() -> list[Fraction]:
    return [Fraction(k, 100) for k in range(40, 101, 2)]


@dataclass(frozen=True)
class PeakParams:
    """Per-volume interval found by the coordinate-ascent search."""

    volume: Fraction
    u_min: Fraction
    u_max: Fraction
    links_saved_pct: Fraction
    degenerate: bool = False  # nothing saved anywhere on the grid


def find_peak_params(
    config: ExperimentConfig,
    volumes=None,
    umin_grid=None,
    umax_grid=None,
    fixed_umax=Fraction(95, 100),
) -> list[PeakParams]:
    """One round of coordinate ascent on (u_min, u_max) per volume.

    Sweeps u_min at the fixed u_max and locks its argmax, then sweeps
    u_max at that u_min; ties go to the smaller parameter.
    """
    volumes = [as_fraction(v) for v in (volumes if volumes is not None else config.volumes)]
    umin_grid = umin_grid if umin_grid is not None else default_umin_grid()
    umax_grid = umax_grid if umax_grid is not None else default_umax_grid()
    fixed_umax = as_fraction(fixed_umax)

    out = []
    for volume in volumes:
        single = replace(config, volumes=(volume,))
        s1 = [p for p in sweep_umin(single, fixed_umax, umin_grid) if p.valid]
        if not s1:
            raise ValueError(f"u_min sweep produced no valid points at volume {volume}")
        best1 = max(s1, key=lambda p: (p.links_saved_pct, -p.param))
        s2 = [p for p in sweep_umax(single, best1.param, umax_grid) if p.valid]
        best2 = max(s2, key=lambda p: (p.links_saved_pct, -p.param))
        degenerate = all(p.links_saved_pct == 0 for p in s1) and all(
            p.links_saved_pct == 0 for p in s2
        )
        out.append(
            PeakParams(
                volume=volume,
                u_min=best1.param,
                u_max=best2.param,
                links_saved_pct=best2.links_saved_pct,
                degenerate=degenerate,
            )
        )
    return out


# -- output emission -------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, Fraction):
        return "%.10g" % float(value)
    return str(value)


def results_csv_text(rows: list[MetricsReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.to_csv_row())
    return buf.getvalue()


def series_csv_text(points: list[SweepPoint], param_name: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["traffic_volume", param_name, "links_saved_pct", "valid", "message"])
    for p in points:
        writer.writerow(
            [
                _fmt(p.volume),
                _fmt(p.param),
                "" if p.links_saved_pct is None else _fmt(p.links_saved_pct),
                "1" if p.valid else "0",
                p.message,
            ]
        )
    return buf.getvalue()


def peaks_csv_text(peaks: list[PeakParams]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["traffic_volume", "u_min", "u_max", "links_saved_pct", "degenerate"])
    for p in peaks:
        writer.writerow(
            [
                _fmt(p.volume),
                _fmt(p.u_min),
                _fmt(p.u_max),
                _fmt(p.links_saved_pct),
                "1" if p.degenerate else "0",
            ]
        )
    return buf.getvalue()


def manifest_text(config: ExperimentConfig) -> str:
    data = {
        "version": __version__,
        "topology": config.topology_path,
        "traffic": list(config.traffic_paths),
        "volumes": [_fmt(v) for v in config.volumes],
        "schedule": {
            _fmt(v): [_fmt(iv.u_min), _fmt(iv.u_max)] for v, iv in sorted(config.schedule.items())
        },
        "heuristics": list(config.heuristics),
        "profile": config.profile,
        "bounds": {
            "max_hops": config.bounds.max_hops,
            "hop_slack": config.bounds.hop_slack,
            "max_paths": config.bounds.max_paths,
        },
        "seed": config.seed,
        "shuffle_flows": config.shuffle_flows,
    }
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def emit_outputs(
    out_dir,
    config: ExperimentConfig,
    rows: list[MetricsReport] | None = None,
    series: dict[str, list[SweepPoint]] | None = None,
    peaks: list[PeakParams] | None = None,
) -> list[str]:
    """Write results.csv, per-sweep series files and the run manifest."""
    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def _write(name: str, text: str):
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(str(path))

    if rows is not None:
        _write("results.csv", results_csv_text(rows))
    for name, points in (series or {}).items():
        param_name = "u_min" if "umin" in name else "u_max"
        _write(f"series_{name}.csv", series_csv_text(points, param_name))
    if peaks is not None:
        _write("peaks.csv", peaks_csv_text(peaks))
    _write("manifest.json", manifest_text(config))
    return written
