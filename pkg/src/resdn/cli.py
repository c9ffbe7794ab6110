"""Command-line front end.

Subcommands: run (heuristic x volume grid), sweep-umin / sweep-umax,
peaks (per-volume interval search), oracle (exhaustive optimum on a
small instance), make-fixture (write the bundled synthetic network and
a seeded demand matrix). A JSON config file can prefill any option;
explicit flags override it.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path as FsPath

from .fixture import (
    generate_traffic,
    geant_like_topology,
    geant_like_topology_text,
    traffic_csv_text,
)
from .harness import (
    DEFAULT_SCHEDULE,
    ExperimentConfig,
    emit_outputs,
    find_peak_params,
    load_inputs,
    run_experiment,
    sweep_umax,
    sweep_umin,
)
from .heuristics import HEURISTIC_NAMES, run_heuristic
from .ingest import bind_flows, scale_to_volume
from .metrics import resdn as resdn_metric
from .model import PathBounds, UtilityInterval, as_fraction
from .oracle import exact_max_resdn
from .power import PROFILES


def _fractions(text: str) -> list[Fraction]:
    return [as_fraction(tok) for tok in text.split(",") if tok]


def _grid(text: str) -> list[Fraction]:
    """Comma list `0.1,0.2` or range `start:stop:step` (stop inclusive)."""
    if ":" in text:
        start, stop, step = (as_fraction(t) for t in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("grid step must be positive")
        out = []
        v = start
        while v <= stop:
            out.append(v)
            v += step
        return out
    return _fractions(text)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--topology", help="topology file path")
    parser.add_argument("--traffic", help="comma-separated traffic matrix paths")
    parser.add_argument("--volumes", help="comma-separated traffic volumes, e.g. 0.2,0.5")
    parser.add_argument(
        "--heuristics",
        help=f"comma-separated heuristic names ({','.join(HEURISTIC_NAMES)})",
    )
    parser.add_argument("--profile", help=f"power profile ({'|'.join(sorted(PROFILES))})")
    parser.add_argument(
        "--umin-umax",
        dest="umin_umax",
        help="'table' for the built-in per-volume schedule, or 'u,v' for a fixed interval",
    )
    parser.add_argument("--seed", type=int, help="seed for randomized choices")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--max-paths", type=int, help="candidate path cap per pair")
    parser.add_argument("--hop-slack", type=int, help="hop bound slack over the shortest path")
    parser.add_argument("--max-hops", type=int, help="absolute hop bound (overrides slack)")
    parser.add_argument(
        "--shuffle-flows", action="store_true", default=None, help="shuffle flow order by seed"
    )


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        values.update(json.loads(FsPath(args.config).read_text(encoding="utf-8")))

    def pick(flag, key, default=None):
        return flag if flag is not None else values.get(key, default)

    topology = pick(args.topology, "topology")
    if not topology:
        raise SystemExit("error: --topology (or config 'topology') is required")
    traffic = args.traffic.split(",") if args.traffic else values.get("traffic")
    if isinstance(traffic, str):
        traffic = [traffic]
    if not traffic:
        raise SystemExit("error: --traffic (or config 'traffic') is required")

    volumes = (
        _fractions(args.volumes)
        if args.volumes
        else [as_fraction(v) for v in values.get("volumes", [])]
    ) or list(DEFAULT_SCHEDULE)

    umin_umax = pick(args.umin_umax, "umin_umax", "table")
    if umin_umax == "table":
        schedule = dict(DEFAULT_SCHEDULE)
    else:
        if isinstance(umin_umax, str):
            lo, hi = _fractions(umin_umax)
        else:
            lo, hi = (as_fraction(v) for v in umin_umax)
        fixed = UtilityInterval(lo, hi)
        schedule = {as_fraction(v): fixed for v in volumes}

    heuristics = (
        args.heuristics.split(",") if args.heuristics else values.get("heuristics")
    ) or list(HEURISTIC_NAMES)

    bounds = PathBounds(
        max_hops=pick(args.max_hops, "max_hops"),
        hop_slack=pick(args.hop_slack, "hop_slack", 2),
        max_paths=pick(args.max_paths, "max_paths", 50),
    )
    return ExperimentConfig(
        topology_path=topology,
        traffic_paths=tuple(traffic),
        volumes=tuple(volumes),
        schedule=schedule,
        heuristics=tuple(heuristics),
        profile=pick(args.profile, "profile", "nec"),
        bounds=bounds,
        seed=pick(args.seed, "seed", 0),
        out_dir=pick(args.out, "out", "results"),
        shuffle_flows=bool(pick(args.shuffle_flows, "shuffle_flows", False)),
    )


def _cmd_run(args) -> int:
    config = _build_config(args)
    rows = run_experiment(config)
    written = emit_outputs(config.out_dir, config, rows=rows)
    errors = [r for r in rows if r.status != "ok"]
    for r in errors:
        print(
            f"cell {r.heuristic} @ {float(r.traffic_volume):g}: {r.message}",
            file=sys.stderr,
        )
    print(f"{len(rows)} rows ({len(errors)} errors) -> {', '.join(written)}")
    return 1 if len(errors) == len(rows) else 0


def _cmd_sweep(args, which: str) -> int:
    config = _build_config(args)
    grid = _grid(args.grid)
    if which == "umin":
        points = sweep_umin(config, args.fixed_umax, grid)
    else:
        points = sweep_umax(config, args.fixed_umin, grid)
    emit_outputs(config.out_dir, config, series={which: points})
    valid = sum(p.valid for p in points)
    print(f"sweep {which}: {valid}/{len(points)} valid points -> {config.out_dir}")
    return 0


def _cmd_peaks(args) -> int:
    config = _build_config(args)
    peaks = find_peak_params(config)
    emit_outputs(config.out_dir, config, peaks=peaks)
    for p in peaks:
        tag = " (degenerate)" if p.degenerate else ""
        print(
            f"volume {float(p.volume):.2f}: u_min*={float(p.u_min):.2f} "
            f"u_max*={float(p.u_max):.2f} links_saved={float(p.links_saved_pct):.2f}%{tag}"
        )
    return 0


def _cmd_oracle(args) -> int:
    config = _build_config(args)
    topology, matrices = load_inputs(config)
    _, matrix = matrices[0]
    volume = config.volumes[0]
    interval = config.interval_for(volume)
    scaled = scale_to_volume(matrix, topology, volume)
    flows = bind_flows(scaled, topology)
    result = exact_max_resdn(topology, flows, interval, config.bounds, budget=args.budget)
    optimum = resdn_metric(result.outcome.state, result.outcome.topology, interval)
    print(
        f"{result.combinations_visited} combinations "
        f"({result.feasible_count} feasible), optimum in-interval ratio "
        f"{float(optimum):.4f}"
    )
    print("note: optimum is relative to the bounded candidate-path universe")
    for name in config.heuristics:
        outcome = run_heuristic(name, topology, flows, interval, config.bounds)
        value = resdn_metric(outcome.state, outcome.topology, interval)
        print(f"  {name}: {float(value):.4f} (gap {float(optimum - value):+.4f})")
    return 0


def _cmd_make_fixture(args) -> int:
    out = FsPath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    topo_path = out / "geant_like.topo"
    topo_path.write_text(geant_like_topology_text(), encoding="utf-8")
    topology = geant_like_topology()
    matrix = generate_traffic(topology, seed=args.seed, n_flows=args.flows)
    traffic_path = out / f"traffic_seed{args.seed}.csv"
    traffic_path.write_text(traffic_csv_text(matrix), encoding="utf-8")
    print(f"wrote {topo_path} and {traffic_path} ({len(matrix.entries)} flows)")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="resdn",
        description="Energy-aware SDN routing simulator and utility-interval metric toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the heuristic x volume grid")
    _add_common(p_run)

    p_umin = sub.add_parser("sweep-umin", help="links saved across a u_min grid")
    _add_common(p_umin)
    p_umin.add_argument("--fixed-umax", type=as_fraction, default=Fraction(95, 100))
    p_umin.add_argument("--grid", required=True, help="comma list or start:stop:step")

    p_umax = sub.add_parser("sweep-umax", help="links saved across a u_max grid")
    _add_common(p_umax)
    p_umax.add_argument("--fixed-umin", type=as_fraction, default=Fraction(30, 100))
    p_umax.add_argument("--grid", required=True, help="comma list or start:stop:step")

    p_peaks = sub.add_parser("peaks", help="per-volume (u_min, u_max) maximizing links saved")
    _add_common(p_peaks)

    p_oracle = sub.add_parser("oracle", help="exhaustive optimum on a desk-scale instance")
    _add_common(p_oracle)
    p_oracle.add_argument("--budget", type=int, default=10**6)

    p_fix = sub.add_parser("make-fixture", help="write the synthetic network and demands")
    p_fix.add_argument("--out", default="fixtures")
    p_fix.add_argument("--seed", type=int, default=0)
    p_fix.add_argument("--flows", type=int, default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep-umin":
            return _cmd_sweep(args, "umin")
        if args.command == "sweep-umax":
            return _cmd_sweep(args, "umax")
        if args.command == "peaks":
            return _cmd_peaks(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "make-fixture":
            return _cmd_make_fixture(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
