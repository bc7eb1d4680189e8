"""Canonical CSV formats for recordings, annotations and count series.

``recording.csv``   header ``frame,t0,...,t767``; one 24x32 frame per row, row-major,
                    row 0 is the top of the image.
``annotations.csv`` header ``frame,delta``; one row per non-zero count change.
``counts.csv``      header ``frame,count``.
"""

from __future__ import annotations

import enum
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

ROWS = 24
COLS = 32
N_PIXELS = ROWS * COLS
TEMP_MIN = -20.0
TEMP_MAX = 120.0

RECORDING_HEADER = "frame," + ",".join(f"t{i}" for i in range(N_PIXELS))
ANNOTATION_HEADER = "frame,delta"
COUNTS_HEADER = "frame,count"


class FormatError(ValueError):
    """Malformed input file or invalid in-memory value."""


class EntryDirection(str, enum.Enum):
    INSIDE_IS_TOP = "inside-is-top"
    INSIDE_IS_BOTTOM = "inside-is-bottom"

    def flipped(self) -> "EntryDirection":
        if self is EntryDirection.INSIDE_IS_TOP:
            return EntryDirection.INSIDE_IS_BOTTOM
        return EntryDirection.INSIDE_IS_TOP


@dataclass(frozen=True)
class ThermalFrame:
    index: int
    temps: np.ndarray  # (24, 32) float64, Celsius

    def __post_init__(self):
        temps = np.asarray(self.temps, dtype=np.float64)
        if temps.size != N_PIXELS:
            raise FormatError(f"frame {self.index}: expected {N_PIXELS} values, got {temps.size}")
        temps = temps.reshape(ROWS, COLS)
        _check_temps(temps, f"frame {self.index}")
        object.__setattr__(self, "temps", temps)

    def __eq__(self, other):
        if not isinstance(other, ThermalFrame):
            return NotImplemented
        return self.index == other.index and np.array_equal(self.temps, other.temps)


def _check_temps(temps: np.ndarray, where: str) -> None:
    if not np.all(np.isfinite(temps)):
        raise FormatError(f"{where}: non-finite temperature")
    lo, hi = temps.min(initial=TEMP_MIN), temps.max(initial=TEMP_MAX)
    if lo < TEMP_MIN or hi > TEMP_MAX:
        raise FormatError(f"{where}: temperature outside [{TEMP_MIN}, {TEMP_MAX}] C")


@dataclass(eq=False)
class Recording:
    """A door sensor stream, stored as one ``(n_frames, 24, 32)`` array.

    Frame ``i`` has index ``i``, so contiguity from 0 holds by construction.
    """

    temps: np.ndarray
    fps: float = 16.0
    door_id: str = "door0"
    entry_direction: EntryDirection | None = None  # None: take it from the pipeline config

    def __post_init__(self):
        temps = np.asarray(self.temps, dtype=np.float64)
        if temps.size == 0:
            temps = temps.reshape(0, ROWS, COLS)
        if temps.ndim != 3 or temps.shape[1:] != (ROWS, COLS):
            raise FormatError(f"recording temps must have shape (n, {ROWS}, {COLS}), got {temps.shape}")
        if not self.fps > 0:
            raise FormatError(f"fps must be positive, got {self.fps}")
        bad = ~np.isfinite(temps) | (temps < TEMP_MIN) | (temps > TEMP_MAX)
        if bad.any():
            i = int(np.argmax(bad.reshape(len(temps), -1).any(axis=1)))
            _check_temps(temps[i], f"frame {i}")
        self.temps = temps
        if self.entry_direction is not None:
            self.entry_direction = EntryDirection(self.entry_direction)

    @classmethod
    def from_frames(cls, frames: Iterable[ThermalFrame], **meta) -> "Recording":
        frames = list(frames)
        for expected, fr in enumerate(frames):
            if fr.index != expected:
                raise FormatError(f"frame indices must run 0,1,2,...; got {fr.index} at position {expected}")
        temps = np.stack([fr.temps for fr in frames]) if frames else np.empty((0, ROWS, COLS))
        return cls(temps, **meta)

    @property
    def frames(self) -> list[ThermalFrame]:
        return [ThermalFrame(i, t) for i, t in enumerate(self.temps)]

    def __len__(self) -> int:
        return len(self.temps)

    def __eq__(self, other):
        if not isinstance(other, Recording):
            return NotImplemented
        return (
            self.fps == other.fps
            and self.door_id == other.door_id
            and self.entry_direction == other.entry_direction
            and np.array_equal(self.temps, other.temps)
        )


@dataclass
class AnnotationTrack:
    deltas: dict[int, int] = field(default_factory=dict)
    initial_count: int = 0

    def __post_init__(self):
        if self.initial_count < 0:
            raise FormatError(f"initial count must be non-negative, got {self.initial_count}")
        for frame, delta in self.deltas.items():
            if frame < 0:
                raise FormatError(f"negative frame index {frame}")
            if delta == 0:
                raise FormatError(f"frame {frame}: zero delta")


@dataclass(eq=False)
class CountSeries:
    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64).reshape(-1)

    def __len__(self) -> int:
        return len(self.counts)

    def __eq__(self, other):
        if not isinstance(other, CountSeries):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)


# ---------------------------------------------------------------- writing


def atomic_write_text(path: str | os.PathLike, lines: Iterable[str]) -> None:
    """Write ``lines`` (LF-terminated, UTF-8) to a temp file, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_recording(rec: Recording, path: str | os.PathLike) -> None:
    # repr() of a Python float is the shortest string that round-trips exactly
    def rows():
        yield RECORDING_HEADER
        for i, frame in enumerate(rec.temps):
            yield f"{i}," + ",".join(map(repr, frame.ravel().tolist()))

    atomic_write_text(path, rows())


def write_annotations(ann: AnnotationTrack, path: str | os.PathLike) -> None:
    atomic_write_text(path, [ANNOTATION_HEADER] + [f"{f},{d}" for f, d in sorted(ann.deltas.items())])


def write_counts(series: CountSeries, path: str | os.PathLike) -> None:
    atomic_write_text(path, [COUNTS_HEADER] + [f"{i},{c}" for i, c in enumerate(series.counts.tolist())])


# ---------------------------------------------------------------- parsing


def _data_lines(path: str | os.PathLike, header: str):
    """Yield ``(line_number, text)`` for non-blank data rows after checking the header."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != header:
            shown = first if len(first) < 60 else first[:57] + "..."
            raise FormatError(f"{path}: line 1: bad header {shown!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if line:
                yield lineno, line


def parse_recording(
    path: str | os.PathLike,
    fps: float = 16.0,
    door_id: str | None = None,
    entry_direction: EntryDirection | str | None = None,
) -> Recording:
    path = Path(path)
    frames: list[np.ndarray] = []
    for lineno, line in _data_lines(path, RECORDING_HEADER):
        where = f"{path}: line {lineno}"
        head, _, rest = line.partition(",")
        try:
            index = int(head)
        except ValueError:
            raise FormatError(f"{where}: bad frame index {head!r}") from None
        if index != len(frames):
            raise FormatError(f"{where}: frame {index}: expected frame index {len(frames)} (indices must be contiguous from 0)")
        values = rest.split(",") if rest else []
        if len(values) != N_PIXELS:
            raise FormatError(f"{where}: frame {index}: expected {N_PIXELS} values, got {len(values)}")
        try:
            temps = np.array(values, dtype=np.float64)
        except ValueError:
            raise FormatError(f"{where}: frame {index}: non-numeric temperature") from None
        try:
            _check_temps(temps, f"frame {index}")
        except FormatError as exc:
            raise FormatError(f"{where}: {exc}") from None
        frames.append(temps.reshape(ROWS, COLS))
    temps = np.stack(frames) if frames else np.empty((0, ROWS, COLS))
    return Recording(temps, fps=fps, door_id=door_id or path.stem, entry_direction=entry_direction)


def _two_int_rows(path, header, what):
    rows = []
    for lineno, line in _data_lines(path, header):
        parts = line.split(",")
        if len(parts) != 2:
            raise FormatError(f"{path}: line {lineno}: expected 2 fields, got {len(parts)}")
        try:
            frame, value = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"{path}: line {lineno}: frame and {what} must be integers") from None
        rows.append((lineno, frame, value))
    return rows


def parse_annotations(path: str | os.PathLike, initial_count: int = 0) -> AnnotationTrack:
    deltas: dict[int, int] = {}
    for lineno, frame, delta in _two_int_rows(path, ANNOTATION_HEADER, "delta"):
        if frame < 0:
            raise FormatError(f"{path}: line {lineno}: negative frame index {frame}")
        if frame in deltas:
            raise FormatError(f"{path}: line {lineno}: duplicate frame {frame}")
        if delta == 0:
            raise FormatError(f"{path}: line {lineno}: frame {frame}: zero delta")
        deltas[frame] = delta
    return AnnotationTrack(deltas, initial_count)


def parse_counts(path: str | os.PathLike) -> CountSeries:
    counts = []
    for lineno, frame, count in _two_int_rows(path, COUNTS_HEADER, "count"):
        if frame != len(counts):
            raise FormatError(f"{path}: line {lineno}: expected frame {len(counts)}, got {frame}")
        counts.append(count)
    return CountSeries(np.array(counts, dtype=np.int64))


# ---------------------------------------------------------------- counts


def cumulative_counts(ann: AnnotationTrack | Mapping[int, int], n_frames: int, initial_count: int | None = None) -> CountSeries:
    """Per-frame count: initial count plus every delta at or before each frame."""
    if isinstance(ann, AnnotationTrack):
        deltas, initial = ann.deltas, ann.initial_count
    else:
        deltas, initial = ann, 0
    if initial_count is not None:
        initial = initial_count
    steps = np.zeros(n_frames, dtype=np.int64)
    for frame, delta in deltas.items():
        if not 0 <= frame < n_frames:
            raise FormatError(f"delta at frame {frame} is outside a {n_frames}-frame recording")
        steps[frame] += delta
    return CountSeries(initial + np.cumsum(steps))


def merge_deltas(maps: Iterable[Mapping[int, int]]) -> dict[int, int]:
    """Sum deltas that land on the same frame; drop frames that sum to zero."""
    merged: dict[int, int] = {}
    for m in maps:
        for frame, delta in m.items():
            merged[frame] = merged.get(frame, 0) + delta
    return {f: d for f, d in sorted(merged.items()) if d != 0}
