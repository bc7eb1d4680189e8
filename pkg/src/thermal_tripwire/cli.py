"""``tripwire`` command line: count, eval, gen, inspect.

Exit status 0 on success, 2 for unreadable or inconsistent inputs, 1 otherwise.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import synthgen
from .classification import aggregate_doors, iter_masks, run_pipeline
from .config import Config, ConfigError, load_config
from .detection import Tracker
from .frames_io import (
    EntryDirection,
    FormatError,
    Recording,
    atomic_write_text,
    cumulative_counts,
    parse_annotations,
    parse_counts,
    parse_recording,
    write_annotations,
    write_counts,
    write_recording,
)
from .metrics import MetricsParams, evaluate

log = logging.getLogger("tripwire")


class InputError(Exception):
    """Bad user input; maps to exit status 2."""


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
    group = p.add_argument_group("config keys (override the file)")
    for f in fields(Config):
        group.add_argument("--" + f.name.replace("_", "-"), dest="cfg_" + f.name, metavar=f.name.upper())


def _config(args) -> Config:
    overrides = list(args.set)
    for f in fields(Config):
        value = getattr(args, "cfg_" + f.name, None)
        if value is not None:
            overrides.append(f"{f.name}={value}")
    try:
        return load_config(args.config, overrides)
    except (ConfigError, OSError) as exc:
        raise InputError(str(exc)) from None


def _load_recordings(args, config: Config) -> list[Recording]:
    directions = args.door_direction or []
    if directions and len(directions) != len(args.recordings):
        raise InputError(f"got {len(directions)} --door-direction values for {len(args.recordings)} recordings")
    recs = []
    for k, path in enumerate(args.recordings):
        direction = EntryDirection(directions[k]) if directions else config.entry_direction
        recs.append(parse_recording(path, fps=args.fps, door_id=Path(path).stem, entry_direction=direction))
    return recs


def _estimate(recs: list[Recording], config: Config):
    events, maps = [], []
    for rec in recs:
        ev, deltas, _ = run_pipeline(rec, config)
        events.extend(ev)
        maps.append(deltas)
    series = aggregate_doors(maps, config.initial_count, [len(r) for r in recs])
    events.sort(key=lambda e: (e.end_frame, e.door_id))
    return events, series


def cmd_count(args) -> int:
    config = _config(args)
    recs = _load_recordings(args, config)
    events, series = _estimate(recs, config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_counts(series, out / "counts.csv")
    atomic_write_text(out / "events.csv", ["end_frame,verdict,door_id"] + [f"{e.end_frame},{e.verdict.value},{e.door_id}" for e in events])
    config.dump(out / "effective_config.txt")
    final = int(series.counts[-1]) if len(series) else config.initial_count
    log.info("%d events, final count %d", len(events), final)
    return 0


def cmd_eval(args) -> int:
    config = _config(args)
    if args.counts:
        est = parse_counts(args.counts)
    elif args.recordings:
        _, est = _estimate(_load_recordings(args, config), config)
    else:
        raise InputError("eval needs --counts or at least one recording")
    initial = config.initial_count if args.initial is None else args.initial
    ann = parse_annotations(args.truth, initial_count=initial)
    try:
        truth = cumulative_counts(ann, len(est))
        report = evaluate(truth, est, MetricsParams(config.window_w))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    json.dump(report.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_gen(args) -> int:
    try:
        scenario = synthgen.scenario_by_name(args.scenario, args.seed)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    rec, ann = synthgen.generate(scenario)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_recording(rec, out / "recording.csv")
    write_annotations(ann, out / "annotations.csv")
    # the scenario's room orientation and starting occupancy, as a config file
    atomic_write_text(
        out / "config.txt",
        [f"entry_direction = {scenario.entry_direction.value}", f"initial_count = {scenario.initial_count}"],
    )
    return 0


def cmd_inspect(args) -> int:
    config = _config(args)
    rec = _load_recordings(args, config)[0]
    tracker = Tracker(config.detection_params())
    frame_rows = ["frame,fg_pixels,centroid_v,centroid_h"]
    blob_rows = ["frame,track_id,size,centroid_v,centroid_h"]
    for i, mask in enumerate(iter_masks(rec, config)):
        n = int(mask.sum())
        if n:
            rows, cols = mask.nonzero()
            frame_rows.append(f"{i},{n},{float(rows.mean())!r},{float(cols.mean())!r}")
        else:
            frame_rows.append(f"{i},0,,")
        blobs = tracker.push(mask)
        owner = {id(t.blobs[-1]): t.track_id for t in tracker.open}
        for b in blobs:
            blob_rows.append(f"{i},{owner[id(b)]},{b.size},{b.centroid[0]!r},{b.centroid[1]!r}")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "frames.csv", frame_rows)
    atomic_write_text(out / "blobs.csv", blob_rows)
    config.dump(out / "effective_config.txt")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tripwire", description="Door-mounted thermal people counting.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def recording_flags(p, nargs):
        p.add_argument("recordings", nargs=nargs, metavar="RECORDING", help="recording.csv, one per door")
        p.add_argument("--fps", type=float, default=16.0)
        p.add_argument(
            "--door-direction",
            action="append",
            choices=[d.value for d in EntryDirection],
            help="room side per recording, in order (default: entry_direction from config)",
        )

    p = sub.add_parser("count", parents=[common], help="estimate the room count from door recordings")
    recording_flags(p, "+")
    p.add_argument("--out-dir", default=".")
    _add_config_flags(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("eval", parents=[common], help="score an estimate against annotations; JSON on stdout")
    recording_flags(p, "*")
    p.add_argument("--truth", required=True, help="annotations.csv")
    p.add_argument("--initial", type=int, help="true initial count (default: initial_count)")
    p.add_argument("--counts", help="estimated counts.csv (otherwise run the pipeline on RECORDING)")
    p.add_argument("--out-dir", default=".")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen", parents=[common], help="write a synthetic recording and its annotations")
    p.add_argument("--scenario", required=True, help=", ".join(synthgen.SCENARIO_NAMES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("inspect", parents=[common], help="dump per-frame occupancy and blob tables as CSV")
    recording_flags(p, 1)
    p.add_argument("--out-dir", default=".")
    _add_config_flags(p)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, FormatError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        if isinstance(exc, (FileNotFoundError, IsADirectoryError, PermissionError)) and exc.filename:
            print(f"error: cannot access {exc.filename}: {exc.strerror}", file=sys.stderr)
            return 2
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.exception("internal failure")
        print(f"error: internal failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
