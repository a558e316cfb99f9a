"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal-consistency
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .domain import DomainError, Mode, TrackerConfig
from .forest import ConsistencyError, dump_forest
from .metrics import brute_force_evaluate, evaluate
from .mwis import brute_force_mwis, build_conflict_graph, dump_graph, parse_graph, solve_mwis
from .simulator import ScenarioSpec, generate
from .streamio import (
    FormatError,
    apply_overrides,
    config_document,
    format_stream,
    format_tracks,
    format_truth,
    network_from_dict,
    observation_durations,
    parse_stream,
    parse_tracks,
    parse_truth,
    save_json,
    tracker_from_dict,
)
from .tracker import Tracker, run_tracker, split_scans

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2, which is our data-error code
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunManifest:
    command: str
    config: dict
    inputs: dict[str, str]
    outputs: dict[str, str]
    input_sha256: dict[str, str] = field(default_factory=dict)
    scenario_seed: Optional[int] = None
    timing: dict = field(default_factory=dict)
    track_count: int = 0
    version: str = __version__
    python: str = field(default_factory=platform.python_version)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def _load_spec(path: str, overrides: Sequence[str]) -> ScenarioSpec:
    doc = apply_overrides({"scenario": _read_json(path)}, [f"scenario.{o}" for o in overrides])
    try:
        spec = ScenarioSpec.from_dict(doc["scenario"])
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{path}: invalid scenario: {exc}") from None
    problems = spec.violations()
    if problems:
        raise DomainError(f"{path}: invalid scenario: " + "; ".join(problems))
    return spec


def _default_config(spec: ScenarioSpec) -> dict:
    cfg = TrackerConfig() if spec.mode is Mode.GROUND_PLANE else TrackerConfig.nlpr_mct()
    return config_document(cfg, spec.network())


def _load_config(path: Optional[str], overrides: Sequence[str], spec: Optional[ScenarioSpec] = None):
    if path is None:
        if spec is None:
            raise UsageError("a config file is required")
        doc = _default_config(spec)
    else:
        doc = _read_json(path)
    doc = apply_overrides(doc, overrides)
    try:
        cfg = tracker_from_dict(doc.get("tracker", {}))
        net = network_from_dict(doc["network"])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise FormatError(f"bad config document: {exc}") from None
    return cfg, net, config_document(cfg, net)


def _read_stream(path: str):
    try:
        return parse_stream(Path(path).read_text())
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


# -- subcommands -----------------------------------------------------------------

def cmd_simulate(args) -> int:
    spec = _load_spec(args.spec, args.set)
    events, truth = generate(spec)
    Path(args.stream).write_text(format_stream(events))
    Path(args.truth).write_text(format_truth(truth))
    if args.config_out:
        save_json(args.config_out, _default_config(spec))
    print(f"observations={sum(len(v) for v in truth.identities.values())} events={len(events)} "
          f"identities={len(truth.identities)}")
    return EXIT_OK


def cmd_track(args) -> int:
    cfg, net, snapshot = _load_config(args.config, args.set)
    events = _read_stream(args.stream)
    result = run_tracker(events, net, cfg)
    Path(args.out).write_text(format_tracks(result.tracks))
    parse_tracks(Path(args.out).read_text())  # validates disjointness of what was written
    if args.manifest:
        manifest = RunManifest(
            command="track",
            config=snapshot,
            inputs={"stream": args.stream, "config": args.config},
            outputs={"tracks": args.out},
            input_sha256={"stream": _sha256(Path(args.stream)), "config": _sha256(Path(args.config))},
            scenario_seed=args.seed,
            timing=result.latency_summary(),
            track_count=len(result.tracks),
        )
        save_json(args.manifest, asdict(manifest))
    print(f"tracks={len(result.tracks)} scans={len(result.timings)}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    tracks = parse_tracks(Path(args.tracks).read_text())
    truth = parse_truth(Path(args.truth).read_text())
    if args.stream:
        weights = observation_durations(_read_stream(args.stream))
    else:
        weights = {o: 1.0 for ids in truth.identities.values() for o in ids}
    missing = sorted(o for ids in truth.identities.values() for o in ids if o not in weights)
    if missing:
        raise DomainError(f"stream lacks truth observations {missing[:5]}")
    report = evaluate(tracks, truth, weights)
    if args.check_oracle and len(truth.identities) > 8:
        print("mhtrack: oracle check skipped (more than 8 identities)", file=sys.stderr)
    elif args.check_oracle:
        oracle = brute_force_evaluate(tracks, truth, weights)
        if abs(oracle.idtp - report.idtp) > 1e-9 * max(1.0, oracle.idtp):
            raise ConsistencyError(f"assignment {report.idtp} differs from brute force {oracle.idtp}")
    sys.stdout.write(report.as_text())
    if args.json:
        save_json(args.json, report.as_dict())
    return EXIT_OK


def cmd_bench(args) -> int:
    spec = _load_spec(args.spec, [])
    cfg, net, snapshot = _load_config(args.config, args.set, spec)
    events, _ = generate(spec)
    result = run_tracker(events, net, cfg)
    summary = result.latency_summary()
    summary["track_count"] = len(result.tracks)
    summary["scan_seconds"] = cfg.scan_seconds
    summary["realtime"] = summary["all_scans"]["mean"] < cfg.scan_seconds
    for key in ("all_scans", "growth_scans"):
        s = summary[key]
        print(f"{key}.count={s['count']} {key}.mean={s['mean']:.6f} {key}.max={s['max']:.6f}")
    print(f"peak_leaves={summary['peak_leaves']} total_seconds={summary['total_seconds']:.3f} "
          f"tracks={len(result.tracks)} realtime={int(summary['realtime'])}")
    if args.json:
        save_json(args.json, {"scenario": spec.to_dict(), "config": snapshot, "timing": summary})
    return EXIT_OK


def cmd_dump_forest(args) -> int:
    cfg, net, _ = _load_config(args.config, args.set)
    tracker = Tracker(net, cfg)
    for k, scan in enumerate(split_scans(_read_stream(args.stream), cfg.scan_seconds)):
        if args.scans is not None and k >= args.scans:
            break
        tracker.step(scan)
    text = dump_graph(build_conflict_graph(tracker.forest)) if args.graph else dump_forest(tracker.forest)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle_mwis(args) -> int:
    g = parse_graph(Path(args.graph).read_text())
    oracle = brute_force_mwis(g)
    print(f"oracle.selected={' '.join(map(str, oracle.selected))}")
    print(f"oracle.weight={oracle.weight!r}")
    if args.compare:
        exact = solve_mwis(g)
        print(f"solver.selected={' '.join(map(str, exact.selected))}")
        print(f"solver.weight={exact.weight!r}")
        if exact.selected != oracle.selected:
            raise ConsistencyError("solver and brute force disagree")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mhtrack", description="Multi-camera multiple-hypothesis tracker")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_set(sp):
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (tracker.* or network.*; bare keys search both)")
        return sp

    s = with_set(sub.add_parser("simulate", help="generate a synthetic stream and its truth"))
    s.add_argument("spec")
    s.add_argument("stream")
    s.add_argument("truth")
    s.add_argument("--config-out", help="also write a matching config document")
    s.set_defaults(func=cmd_simulate)

    s = with_set(sub.add_parser("track", help="replay a stream through the tracker"))
    s.add_argument("stream")
    s.add_argument("config")
    s.add_argument("out")
    s.add_argument("--manifest", help="write a run manifest JSON here")
    s.add_argument("--seed", type=int, help="scenario seed to record in the manifest")
    s.set_defaults(func=cmd_track)

    s = sub.add_parser("evaluate", help="IDP/IDR/IDF1 of a track file against truth")
    s.add_argument("tracks")
    s.add_argument("truth")
    s.add_argument("--stream", help="stream used to weight observations by duration (default: unit weights)")
    s.add_argument("--json", help="also write the report as JSON")
    s.add_argument("--check-oracle", action="store_true", help="cross-check against brute-force matching")
    s.set_defaults(func=cmd_evaluate)

    s = with_set(sub.add_parser("bench", help="per-scan latency on a simulated scenario"))
    s.add_argument("spec")
    s.add_argument("config", nargs="?", help="config document (default: derived from the spec)")
    s.add_argument("--json", help="write the timing report as JSON")
    s.set_defaults(func=cmd_bench)

    s = with_set(sub.add_parser("dump-forest", help="print the hypothesis forest after some scans"))
    s.add_argument("stream")
    s.add_argument("config")
    s.add_argument("--scans", type=int, help="stop after this many scans")
    s.add_argument("--graph", action="store_true", help="print the conflict graph instead")
    s.add_argument("--out")
    s.set_defaults(func=cmd_dump_forest)

    s = sub.add_parser("oracle-mwis", help="brute-force MWIS on a graph dump")
    s.add_argument("graph")
    s.add_argument("--compare", action="store_true", help="also run the exact solver and compare")
    s.set_defaults(func=cmd_oracle_mwis)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mhtrack: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConsistencyError as exc:
        print(f"mhtrack: internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (DomainError, ValueError, OSError, KeyError) as exc:
        print(f"mhtrack: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
