"""Door-event detection from a stream of foreground masks.

Two detectors share this module: the baseline one treats every run of non-empty
masks as a single-person event; the multi-person one links connected blobs across
frames into tracks by greedy nearest-centroid association.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

from .frames_io import COLS, ROWS

_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class DetectionParams:
    k_min_pixels: int = 100
    l_min_pixels: int = 100
    max_assoc_dist: float = math.inf

    def __post_init__(self):
        if self.k_min_pixels < 1 or self.l_min_pixels < 1:
            raise ValueError("k_min_pixels and l_min_pixels must be >= 1")
        if not self.max_assoc_dist > 0:
            raise ValueError(f"max_assoc_dist must be positive, got {self.max_assoc_dist}")


def pixel_centroid(pixels: np.ndarray) -> tuple[float, float]:
    """Mean (row, column) of a non-empty array of row-major pixel indices."""
    pixels = np.asarray(pixels)
    if pixels.size == 0:
        raise ValueError("centroid of an empty pixel set")
    rows, cols = np.divmod(pixels, COLS)
    return float(rows.mean()), float(cols.mean())


@dataclass(frozen=True)
class Blob:
    frame_index: int
    pixels: frozenset[int]
    centroid: tuple[float, float]  # (v, h) = (row, column)

    @property
    def size(self) -> int:
        return len(self.pixels)


@dataclass
class BlobTrack:
    track_id: int
    blobs: list[Blob] = field(default_factory=list)
    state: str = "open"

    @property
    def start_frame(self) -> int:
        return self.blobs[0].frame_index

    @property
    def end_frame(self) -> int:
        return self.blobs[-1].frame_index

    def __len__(self) -> int:
        return len(self.blobs)


@dataclass
class BaselineEvent:
    start_frame: int
    end_frame: int  # inclusive
    pixels: list[np.ndarray]  # row-major foreground indices, one array per frame

    @property
    def centroids(self) -> list[tuple[float, float]]:
        return [pixel_centroid(p) for p in self.pixels]


def extract_blobs(mask: np.ndarray, l_min: int = 100, frame_index: int = 0) -> list[Blob]:
    """8-connected foreground components of at least ``l_min`` pixels.

    Sorted by centroid column, then row.
    """
    mask = np.asarray(mask, dtype=bool).reshape(ROWS, COLS)
    if np.count_nonzero(mask) < l_min:
        return []
    labels, n = ndimage.label(mask, structure=_EIGHT_CONNECTED)
    sizes = np.bincount(labels.ravel(), minlength=n + 1)
    flat = labels.ravel()
    blobs = []
    for lab in np.flatnonzero(sizes >= l_min):
        if lab == 0:
            continue
        pix = np.flatnonzero(flat == lab)
        blobs.append(Blob(frame_index, frozenset(pix.tolist()), pixel_centroid(pix)))
    blobs.sort(key=lambda b: (b.centroid[1], b.centroid[0]))
    return blobs


def step_tracks(
    open_tracks: Sequence[BlobTrack],
    current_blobs: Sequence[Blob],
    next_id: int | None = None,
    max_assoc_dist: float = math.inf,
) -> tuple[list[BlobTrack], list[BlobTrack], list[BlobTrack]]:
    """Advance tracks by one frame; returns ``(grown, born, terminated)``.

    The globally closest (track tail, blob) pair is linked first, then the next
    closest among the remaining ones, and so on. Equal distances go to the lower
    track id, then to the lower blob position. Tracks are mutated in place.
    """
    if next_id is None:
        next_id = max((t.track_id for t in open_tracks), default=-1) + 1
    limit = max_assoc_dist * max_assoc_dist
    pairs = []
    for track in open_tracks:
        tv, th = track.blobs[-1].centroid
        for j, blob in enumerate(current_blobs):
            bv, bh = blob.centroid
            d2 = (tv - bv) ** 2 + (th - bh) ** 2
            if d2 <= limit:
                pairs.append((d2, track.track_id, j, track))
    pairs.sort(key=lambda p: p[:3])

    grown: list[BlobTrack] = []
    used_tracks: set[int] = set()
    used_blobs: set[int] = set()
    for _, tid, j, track in pairs:
        if tid in used_tracks or j in used_blobs:
            continue
        used_tracks.add(tid)
        used_blobs.add(j)
        track.blobs.append(current_blobs[j])
        grown.append(track)

    terminated = []
    for track in open_tracks:
        if track.track_id not in used_tracks:
            track.state = "terminated"
            terminated.append(track)
    born = []
    for j, blob in enumerate(current_blobs):
        if j not in used_blobs:
            born.append(BlobTrack(next_id, [blob]))
            next_id += 1
    grown.sort(key=lambda t: t.track_id)
    return grown, born, terminated


class Tracker:
    """Per-stream multi-person tracker; feed masks in frame order."""

    def __init__(self, params: DetectionParams | None = None):
        self.params = params or DetectionParams()
        self.open: list[BlobTrack] = []
        self.finished: list[BlobTrack] = []
        self._next_id = 0
        self._frame = 0

    def push(self, mask: np.ndarray) -> list[Blob]:
        blobs = extract_blobs(mask, self.params.l_min_pixels, self._frame)
        self._frame += 1
        if not blobs and not self.open:
            return blobs
        grown, born, terminated = step_tracks(self.open, blobs, self._next_id, self.params.max_assoc_dist)
        self._next_id += len(born)
        self.finished.extend(terminated)
        self.open = sorted(grown + born, key=lambda t: t.track_id)
        return blobs

    def finish(self) -> list[BlobTrack]:
        for track in self.open:
            track.state = "terminated"
        self.finished.extend(self.open)
        self.open = []
        return sorted(self.finished, key=lambda t: (t.end_frame, t.track_id))


def track_events(masks: Iterable[np.ndarray], params: DetectionParams | None = None) -> list[BlobTrack]:
    """All blob tracks of a mask stream, tracks still open at the end included."""
    tracker = Tracker(params)
    for mask in masks:
        tracker.push(mask)
    return tracker.finish()


class BaselineSegmenter:
    """Streams masks into maximal runs of non-empty frames."""

    def __init__(self, k_min_pixels: int = 100):
        self.k_min = k_min_pixels
        self.events: list[BaselineEvent] = []
        self._run: list[np.ndarray] = []
        self._run_start = 0
        self._run_peak = 0
        self._frame = 0

    def push(self, mask: np.ndarray) -> BaselineEvent | None:
        """Returns the event closed by this frame, if any."""
        pix = np.flatnonzero(np.asarray(mask, dtype=bool).ravel())
        closed = None
        if pix.size:
            if not self._run:
                self._run_start = self._frame
                self._run_peak = 0
            self._run.append(pix)
            self._run_peak = max(self._run_peak, pix.size)
        elif self._run:
            closed = self._close()
        self._frame += 1
        return closed

    def _close(self) -> BaselineEvent | None:
        event = None
        if self._run_peak >= self.k_min:
            event = BaselineEvent(self._run_start, self._run_start + len(self._run) - 1, self._run)
            self.events.append(event)
        self._run = []
        return event

    def finish(self) -> list[BaselineEvent]:
        if self._run:
            self._close()
        return self.events


def baseline_segment(masks: Iterable[np.ndarray], k_min_pixels: int = 100) -> list[BaselineEvent]:
    """Maximal runs of non-empty masks holding at least one frame with >= K pixels.

    A run still open when the stream ends is closed there.
    """
    seg = BaselineSegmenter(k_min_pixels)
    for mask in masks:
        seg.push(mask)
    return seg.finish()
