"""Entry/exit/lingering decisions from centroid traces, and the end-to-end pipeline."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .background import init_background, subtract
from .config import Config
from .detection import BaselineSegmenter, BlobTrack, Tracker, pixel_centroid
from .frames_io import ROWS, CountSeries, EntryDirection, FormatError, Recording, cumulative_counts, merge_deltas

# rows 0-11 are the upper half, rows 12-23 the lower half
MIDLINE = (ROWS - 1) / 2.0


class Verdict(str, enum.Enum):
    ENTRY = "entry"
    EXIT = "exit"
    LINGERING = "lingering"


class Crossing(str, enum.Enum):
    UP = "up"  # lower half -> upper half
    DOWN = "down"


@dataclass
class CentroidTrace:
    frames: list[int]
    v: list[float]
    h: list[float] | None = None
    source: str = "multi"

    def __post_init__(self):
        if not self.frames or len(self.frames) != len(self.v):
            raise ValueError("a centroid trace needs one v sample per frame, and at least one")

    @classmethod
    def from_track(cls, track: BlobTrack) -> "CentroidTrace":
        return cls(
            [b.frame_index for b in track.blobs],
            [b.centroid[0] for b in track.blobs],
            [b.centroid[1] for b in track.blobs],
            source="multi",
        )

    @classmethod
    def from_pixel_sets(cls, start_frame: int, pixel_sets: Sequence[np.ndarray]) -> "CentroidTrace":
        cs = [pixel_centroid(p) for p in pixel_sets]
        return cls(
            list(range(start_frame, start_frame + len(cs))),
            [c[0] for c in cs],
            [c[1] for c in cs],
            source="baseline",
        )


@dataclass
class DoorEvent:
    end_frame: int
    verdict: Verdict
    trace: CentroidTrace
    door_id: str = "door0"


def centroid(pixels: Iterable[tuple[int, int]]) -> tuple[float, float]:
    """Mean (row, column) of a non-empty collection of (row, column) pairs."""
    arr = np.asarray(list(pixels), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("centroid of an empty pixel set")
    return float(arr[:, 0].mean()), float(arr[:, 1].mean())


def crossings(trace: CentroidTrace | Sequence[float]) -> list[tuple[int, Crossing]]:
    """Mid-line crossings as ``(frame, direction)``, frame being the sample after the change.

    A sample sitting exactly on the mid-line keeps the half of the sample before it;
    leading on-line samples belong to no half yet, so they never start a crossing.
    """
    if isinstance(trace, CentroidTrace):
        frames, vs = trace.frames, trace.v
    else:
        vs = list(trace)
        frames = list(range(len(vs)))
    out = []
    upper = None
    for frame, v in zip(frames, vs):
        if v < MIDLINE:
            now = True
        elif v > MIDLINE:
            now = False
        else:
            now = upper
        if upper is not None and now is not None and now != upper:
            out.append((frame, Crossing.UP if now else Crossing.DOWN))
        upper = now
    return out


def classify(trace: CentroidTrace | Sequence[float], entry_direction: EntryDirection | str) -> Verdict:
    found = crossings(trace)
    if not found:
        return Verdict.LINGERING
    first, last = found[0][1], found[-1][1]
    if first != last:
        return Verdict.LINGERING
    toward_room = Crossing.UP if EntryDirection(entry_direction) is EntryDirection.INSIDE_IS_TOP else Crossing.DOWN
    return Verdict.ENTRY if first is toward_room else Verdict.EXIT


_STEP = {Verdict.ENTRY: 1, Verdict.EXIT: -1, Verdict.LINGERING: 0}


def events_to_deltas(events: Iterable[DoorEvent]) -> dict[int, int]:
    return merge_deltas({e.end_frame: _STEP[e.verdict]} for e in events if e.verdict is not Verdict.LINGERING)


def aggregate_doors(delta_maps: Sequence[Mapping[int, int]], initial: int, n_frames: int | Sequence[int]) -> CountSeries:
    """Room count from several doors' deltas on a shared frame clock."""
    if not isinstance(n_frames, int):
        lengths = set(n_frames)
        if len(lengths) != 1:
            raise FormatError(f"door recordings have different lengths {sorted(lengths)}; they must share one clock")
        n_frames = lengths.pop()
    return cumulative_counts(merge_deltas(delta_maps), n_frames, initial_count=initial)


def iter_masks(rec: Recording, config: Config) -> Iterator[np.ndarray]:
    """Final foreground mask for every frame of ``rec``."""
    if len(rec) == 0:
        return
    model = init_background(rec.temps[: config.warmup_frames], config.background_params())
    for temps in rec.temps:
        mask, model = subtract(model, temps, config.use_mrf)
        yield mask


def detect_events(masks: Iterable[np.ndarray], config: Config, entry_direction: EntryDirection, door_id: str = "door0") -> list[DoorEvent]:
    events = []
    if config.algorithm == "baseline":
        seg = BaselineSegmenter(config.k_min_pixels)
        for mask in masks:
            seg.push(mask)
        for ev in seg.finish():
            trace = CentroidTrace.from_pixel_sets(ev.start_frame, ev.pixels)
            events.append(DoorEvent(ev.end_frame, classify(trace, entry_direction), trace, door_id))
    else:
        tracker = Tracker(config.detection_params())
        for mask in masks:
            tracker.push(mask)
        for track in tracker.finish():
            trace = CentroidTrace.from_track(track)
            events.append(DoorEvent(track.end_frame, classify(trace, entry_direction), trace, door_id))
    return events


def run_pipeline(rec: Recording, config: Config | None = None) -> tuple[list[DoorEvent], dict[int, int], CountSeries]:
    """Background subtraction -> event detection -> classification -> counts."""
    config = config or Config()
    direction = rec.entry_direction or config.entry_direction
    events = detect_events(iter_masks(rec, config), config, direction, rec.door_id)
    deltas = events_to_deltas(events)
    return events, deltas, cumulative_counts(deltas, len(rec), initial_count=config.initial_count)


def mirror_trace(trace: CentroidTrace) -> CentroidTrace:
    """Flip a trace top-to-bottom (v -> 23 - v)."""
    return CentroidTrace(list(trace.frames), [(ROWS - 1) - v for v in trace.v], trace.h, trace.source)

