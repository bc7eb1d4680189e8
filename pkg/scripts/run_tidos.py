"""Score both algorithms on TIDOS recordings converted to the canonical CSV layout.

Expected layout (one directory per recording)::

    TIDOS_DIR/
      Lecture/
        doors.csv         file,entry_direction   (one row per door recording)
        door_a.csv        canonical recording CSV, one per door, shared frame clock
        door_b.csv
        annotations.csv   frame,delta            (room-level ground truth)
        config.txt        optional key = value overrides, e.g. initial_count = 3

Usage: python scripts/run_tidos.py TIDOS_DIR [--json] [--set KEY=VALUE ...]
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from thermal_tripwire import Config, aggregate_doors, cumulative_counts, evaluate, load_config, run_pipeline
from thermal_tripwire.frames_io import EntryDirection, parse_annotations, parse_recording
from thermal_tripwire.metrics import MetricsParams


def load_doors(folder: Path):
    with open(folder / "doors.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        parse_recording(folder / r["file"], door_id=Path(r["file"]).stem, entry_direction=EntryDirection(r["entry_direction"].strip()))
        for r in rows
    ]


def score(folder: Path, base: Config) -> dict:
    cfg_path = folder / "config.txt"
    config = load_config(cfg_path) if cfg_path.exists() else base
    recs = load_doors(folder)
    n = len(recs[0])
    ann = parse_annotations(folder / "annotations.csv", initial_count=config.initial_count)
    truth = cumulative_counts(ann, n)
    out = {}
    for algo in ("baseline", "multi"):
        cfg = config.replace(algorithm=algo)
        maps = [run_pipeline(r, cfg)[1] for r in recs]
        est = aggregate_doors(maps, cfg.initial_count, [len(r) for r in recs])
        out[algo] = evaluate(truth, est, MetricsParams(cfg.window_w)).to_dict()
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("root", type=Path)
    ap.add_argument("--json", action="store_true", help="print one JSON object instead of a table")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    args = ap.parse_args(argv)
    base = load_config(None, args.set)
    results = {d.name: score(d, base) for d in sorted(args.root.iterdir()) if (d / "doors.csv").exists()}
    if args.json:
        json.dump(results, sys.stdout, indent=2)
        print()
        return 0
    print(f"{'recording':<24} {'base CCR':>9} {'multi CCR':>9} {'base MAE':>9} {'multi MAE':>9}")
    for name, r in results.items():
        b, m = r["baseline"], r["multi"]
        print(f"{name:<24} {b['ccr_wcc']:9.3f} {m['ccr_wcc']:9.3f} {b['mae']:9.3f} {m['mae']:9.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
