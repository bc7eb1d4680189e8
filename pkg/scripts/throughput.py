"""Time the multi-person pipeline on a long synthetic recording.

Usage: python scripts/throughput.py [--frames 37536] [--seed 0]
"""

from __future__ import annotations

import argparse
import time

from thermal_tripwire import Config, cumulative_counts, run_pipeline
from thermal_tripwire.metrics import ccr_wcc
from thermal_tripwire.synthgen import busy_scenario, generate


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frames", type=int, default=37536)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    rec, ann = generate(busy_scenario(args.frames, args.seed))
    t1 = time.perf_counter()
    _, deltas, est = run_pipeline(rec, Config())
    t2 = time.perf_counter()
    rate = ccr_wcc(cumulative_counts(ann, len(rec)), est)[0]
    print(f"generated {len(rec)} frames in {t1 - t0:.2f} s")
    print(f"pipeline: {t2 - t1:.2f} s ({len(rec) / (t2 - t1):,.0f} frames/s), {len(deltas)} count changes, CCR_WCC {rate:.3f}")


if __name__ == "__main__":
    main()
