"""Command-line entry point.

Subcommands:

- ``generate``: write a synthetic scenario bundle (power, roads, scenario).
- ``run``: solve a bundle end to end; writes schedule.json, summary.txt,
  and routes.geojson into the output directory.
- ``validate``: re-check a schedule report against its input bundle.
- ``reduce-dump``: write the reduced travel-time matrix for a bundle.

The output directory is ``--out`` when given, else the ``GRIDCREW_OUT_DIR``
environment variable, else the working directory. Exit codes: 0 success,
1 input or validation failure, 2 solver failure, 3 I/O failure. Failures
also print a one-line JSON diagnostic to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import List, Optional

from .errors import GridCrewError, ParseError, SolverError, ValidationError
from .generator import generate_bundle, write_bundle
from .netmodel import (
    DEFAULT_SPEED_MPS,
    load_damage_scenario,
    load_power_network,
    load_road_network,
    project_power_onto_roads,
)
from .reduction import build_reduced_graph, dump_reduced
from .report import (
    load_schedule_report,
    schedule_report,
    validate_report,
    write_routes_geojson,
    write_schedule_report,
    write_summary,
)
from .scheduler import SolveSettings, run_two_stage

OUT_DIR_ENV = "GRIDCREW_OUT_DIR"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_SOLVER = 2
EXIT_IO = 3


@dataclass
class RunConfig:
    """Everything one end-to-end run needs."""

    power_path: str
    roads_path: str
    scenario_path: str
    power_format: str = "tabular"
    default_speed_mps: float = DEFAULT_SPEED_MPS
    settings: SolveSettings = None  # type: ignore[assignment]
    out_dir: str = "."

    def __post_init__(self):
        if self.settings is None:
            self.settings = SolveSettings()


def _resolve_out_dir(flag_value: Optional[str]) -> str:
    if flag_value:
        return flag_value
    return os.environ.get(OUT_DIR_ENV) or "."


def _load_bundle(config: RunConfig):
    power = load_power_network(config.power_path, format=config.power_format)
    roads = load_road_network(config.roads_path, default_speed_mps=config.default_speed_mps)
    scenario = load_damage_scenario(config.scenario_path, roads=roads, power=power)
    projection = project_power_onto_roads(power, roads)
    return power, roads, scenario, projection


def cmd_generate(
    seed: int,
    road_nodes: int,
    damaged: int,
    depots: int,
    out_dir: str,
    power_nodes: Optional[int] = None,
    tree_crews: int = 0,
    line_crews: int = 1,
    capacity: Optional[float] = None,
) -> int:
    bundle = generate_bundle(
        seed=seed,
        road_nodes=road_nodes,
        damaged=damaged,
        depots=depots,
        power_nodes=power_nodes,
        tree_crews=tree_crews,
        line_crews=line_crews,
        capacity=capacity,
    )
    paths = write_bundle(bundle, out_dir)
    for role in ("power", "roads", "scenario"):
        print(f"wrote {paths[role]}")
    return EXIT_OK


def cmd_run(config: RunConfig) -> int:
    _, roads, scenario, projection = _load_bundle(config)
    schedule = run_two_stage(scenario, roads, projection, config.settings)
    os.makedirs(config.out_dir, exist_ok=True)
    report_path = os.path.join(config.out_dir, "schedule.json")
    summary_path = os.path.join(config.out_dir, "summary.txt")
    geo_path = os.path.join(config.out_dir, "routes.geojson")
    write_schedule_report(schedule_report(schedule, scenario, config.settings), report_path)
    write_summary(schedule, summary_path)
    write_routes_geojson(schedule, roads, projection, scenario, geo_path)
    for path in (report_path, summary_path, geo_path):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_validate(report_path: str, config: RunConfig) -> int:
    report = load_schedule_report(report_path)
    _, roads, scenario, projection = _load_bundle(config)
    violations = validate_report(report, roads, projection, scenario)
    for v in violations:
        print(v)
    return EXIT_INVALID if violations else EXIT_OK


def cmd_reduce_dump(config: RunConfig, out_file: str) -> int:
    _, roads, scenario, projection = _load_bundle(config)
    selected = [d.node_id for d in scenario.damaged]
    depots = [dp.road_node for dp in scenario.depots]
    reduced = build_reduced_graph(roads, projection, selected, depots, keep_paths=False)
    dump_reduced(reduced, out_file)
    print(f"wrote {out_file}")
    return EXIT_OK


def _add_bundle_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--power", required=True, help="power network file")
    sub.add_argument("--roads", required=True, help="road network file")
    sub.add_argument("--scenario", required=True, help="damage scenario file")
    sub.add_argument("--power-format", choices=("tabular", "graphml"), default="tabular")
    sub.add_argument("--default-speed", type=float, default=DEFAULT_SPEED_MPS,
                     help="fallback speed (m/s) for road edges without one")


def _add_weight_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--alpha1", type=float, default=1.0, help="allocation power weight")
    sub.add_argument("--beta1", type=float, default=1.0, help="allocation repair-time weight")
    sub.add_argument("--alpha2", type=float, default=1.0, help="routing repair-time order weight")
    sub.add_argument("--beta2", type=float, default=1.0, help="routing power order weight")
    sub.add_argument("--no-normalize-power", action="store_true",
                     help="use raw kW in routing order costs")
    sub.add_argument("--exact-cap", type=int, default=14,
                     help="largest node count solved exactly per route")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridcrew",
        description="Crew repair scheduling over coupled power and road networks.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("generate", help="write a synthetic scenario bundle")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--road-nodes", type=int, default=64)
    gen.add_argument("--damaged", type=int, default=5)
    gen.add_argument("--depots", type=int, default=1)
    gen.add_argument("--power-nodes", type=int, default=None)
    gen.add_argument("--tree-crews", type=int, default=0)
    gen.add_argument("--line-crews", type=int, default=1)
    gen.add_argument("--capacity", type=float, default=None)
    gen.add_argument("--out", default=None, help="output directory")

    run = subs.add_parser("run", help="solve a bundle end to end")
    _add_bundle_args(run)
    _add_weight_args(run)
    run.add_argument("--out", default=None, help="output directory")

    val = subs.add_parser("validate", help="re-check a schedule report")
    val.add_argument("--report", required=True, help="schedule report file")
    _add_bundle_args(val)

    red = subs.add_parser("reduce-dump", help="write the reduced travel-time matrix")
    _add_bundle_args(red)
    red.add_argument("--out-file", required=True, help="matrix dump path")

    return parser


def _config_from_args(args: argparse.Namespace, with_weights: bool) -> RunConfig:
    settings = SolveSettings()
    if with_weights:
        settings = SolveSettings(
            alpha1=args.alpha1,
            beta1=args.beta1,
            alpha2=args.alpha2,
            beta2=args.beta2,
            normalize_power=not args.no_normalize_power,
            exact_cap=args.exact_cap,
        ).validate()
    return RunConfig(
        power_path=args.power,
        roads_path=args.roads,
        scenario_path=args.scenario,
        power_format=args.power_format,
        default_speed_mps=args.default_speed,
        settings=settings,
        out_dir=_resolve_out_dir(getattr(args, "out", None)),
    )


def _diagnostic(exc: Exception, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            return cmd_generate(
                seed=args.seed,
                road_nodes=args.road_nodes,
                damaged=args.damaged,
                depots=args.depots,
                out_dir=_resolve_out_dir(args.out),
                power_nodes=args.power_nodes,
                tree_crews=args.tree_crews,
                line_crews=args.line_crews,
                capacity=args.capacity,
            )
        if args.command == "run":
            return cmd_run(_config_from_args(args, with_weights=True))
        if args.command == "validate":
            return cmd_validate(args.report, _config_from_args(args, with_weights=False))
        if args.command == "reduce-dump":
            config = _config_from_args(args, with_weights=False)
            return cmd_reduce_dump(config, args.out_file)
        raise ValidationError(f"unknown command {args.command!r}")
    except (ParseError, ValidationError) as exc:
        return _diagnostic(exc, EXIT_INVALID)
    except SolverError as exc:
        return _diagnostic(exc, EXIT_SOLVER)
    except OSError as exc:
        return _diagnostic(exc, EXIT_IO)
    except GridCrewError as exc:
        return _diagnostic(exc, EXIT_INVALID)


if __name__ == "__main__":
    sys.exit(main())
