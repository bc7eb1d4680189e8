"""Deterministic synthetic door recordings with exact ground-truth annotations.

Noise comes from a counter-based SplitMix64 stream so that a (scenario, seed)
pair always yields the same temperatures, on any platform:

    state_i = seed + (i + 1) * 0x9E3779B97F4A7C15            (mod 2**64)
    z = (state_i ^ (state_i >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out_i = z ^ (z >> 31)
    u_i = (out_i >> 11) * 2**-53                              in [0, 1)

Pixel ``p`` of frame ``f`` (``j = f * 768 + p``) gets the Box-Muller normal
``sqrt(-2 ln(1 - u_2j)) * cos(2 pi u_(2j+1))``, clipped to +-6 and scaled by
``noise_std``.

A walker is an elliptical warm region, flat in the middle and falling off with a
half cosine between 60 % and 100 % of its radius. Its ground-truth delta sits on
the last frame in which any of its pixels is more than ``3 * noise_std`` above the
background, mirroring an annotator who marks the frame where the person has
completely left the view.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frames_io import COLS, ROWS, AnnotationTrack, EntryDirection, Recording

GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
FLAT_CORE = 0.6
NOISE_CLIP = 6.0

_R = np.arange(ROWS, dtype=np.float64)[:, None]
_C = np.arange(COLS, dtype=np.float64)[None, :]


def splitmix64(seed: int, start: int, count: int) -> np.ndarray:
    """Outputs ``start .. start + count - 1`` of the SplitMix64 stream for ``seed``."""
    i = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed % 2**64) + i * np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, start: int, count: int) -> np.ndarray:
    return (splitmix64(seed, start, count) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def standard_normals(seed: int, start: int, count: int) -> np.ndarray:
    """Normals ``start .. start + count - 1``; each consumes two uniforms."""
    u = uniforms(seed, 2 * start, 2 * count)
    z = np.sqrt(-2.0 * np.log1p(-u[0::2])) * np.cos(2.0 * math.pi * u[1::2])
    return np.clip(z, -NOISE_CLIP, NOISE_CLIP)


def falloff(rho: np.ndarray) -> np.ndarray:
    """1 inside the flat core, half-cosine down to 0 at rho = 1, 0 outside."""
    t = np.clip((rho - FLAT_CORE) / (1.0 - FLAT_CORE), 0.0, 1.0)
    return 0.5 * (1.0 + np.cos(math.pi * t))


def warm_region(v: float, h: float, radius_v: float, radius_h: float) -> np.ndarray:
    """Unit-peak warmth profile on the 24x32 grid for a region centred at (v, h)."""
    rho = np.sqrt(((_R - v) / radius_v) ** 2 + ((_C - h) / radius_h) ** 2)
    return falloff(rho)


@dataclass(frozen=True)
class Walker:
    start_frame: int
    direction: str = "up"  # up: enters at the bottom edge, leaves at the top
    speed: float = 1.5  # rows per frame
    body_temp: float = 30.0
    radius_v: float = 8.0
    radius_h: float = 8.0
    column: float = 15.5
    linger: tuple[int, int] | None = None  # (frames walked before turning back, frames held)

    def position(self, frame: int) -> float | None:
        """Row coordinate of the centre, or None outside the walker's lifetime."""
        tau = frame - self.start_frame
        if tau < 0 or tau > self.duration:
            return None
        sign = -1.0 if self.direction == "up" else 1.0
        v0 = (ROWS - 1) + self.radius_v if self.direction == "up" else -self.radius_v
        if self.linger is None:
            return v0 + sign * self.speed * tau
        walk, hold = self.linger
        if tau <= walk:
            return v0 + sign * self.speed * tau
        if tau <= walk + hold:
            return v0 + sign * self.speed * walk
        return v0 + sign * self.speed * (walk - (tau - walk - hold))

    @property
    def duration(self) -> int:
        """Frames after ``start_frame`` until the region has fully left the view."""
        span = (ROWS - 1) + 2 * self.radius_v
        if self.linger is None:
            return math.ceil(span / self.speed)
        walk, hold = self.linger
        return 2 * walk + hold

    @property
    def lingers(self) -> bool:
        return self.linger is not None


@dataclass(frozen=True)
class WarmSpot:
    """Static warm clutter (a mug, a radiator patch) appearing at ``start_frame``."""

    start_frame: int
    row: float
    column: float
    radius: float = 4.0
    temp: float = 26.0


@dataclass(frozen=True)
class Scenario:
    name: str = "custom"
    seed: int = 0
    n_frames: int = 96
    fps: float = 16.0
    background_temp: float = 22.0
    noise_std: float = 0.15
    walkers: tuple[Walker, ...] = ()
    clutter: tuple[WarmSpot, ...] = ()
    entry_direction: EntryDirection = EntryDirection.INSIDE_IS_TOP
    initial_count: int = 0

    def validate(self) -> None:
        if self.n_frames < 0 or not self.fps > 0:
            raise ValueError("n_frames must be >= 0 and fps > 0")
        if self.noise_std < 0:
            raise ValueError(f"noise_std must be >= 0, got {self.noise_std}")
        if self.initial_count < 0:
            raise ValueError("initial_count must be >= 0")
        for k, w in enumerate(self.walkers):
            where = f"walker {k}"
            if w.direction not in ("up", "down"):
                raise ValueError(f"{where}: direction must be 'up' or 'down'")
            if not w.speed > 0 or not (w.radius_v > 0 and w.radius_h > 0):
                raise ValueError(f"{where}: speed and radii must be positive")
            if not w.body_temp > self.background_temp + 3 * self.noise_std:
                raise ValueError(f"{where}: body must be warmer than background + 3 noise std")
            if w.column - w.radius_h < -0.5 or w.column + w.radius_h > COLS - 0.5:
                raise ValueError(f"{where}: body does not fit across the door")
            if w.start_frame < 0 or w.start_frame + w.duration >= self.n_frames:
                raise ValueError(f"{where}: must leave the view before frame {self.n_frames}")
            if w.linger is not None and (w.linger[0] < 1 or w.linger[1] < 0):
                raise ValueError(f"{where}: bad linger {w.linger}")
        for k, spot in enumerate(self.clutter):
            if not spot.temp > self.background_temp + 3 * self.noise_std:
                raise ValueError(f"clutter {k}: must be warmer than background + 3 noise std")


def _sign(w: Walker, room: EntryDirection) -> int:
    toward_top = w.direction == "up"
    return 1 if toward_top == (room is EntryDirection.INSIDE_IS_TOP) else -1


def walker_warmth(w: Walker, frame: int, background_temp: float) -> np.ndarray | None:
    v = w.position(frame)
    if v is None:
        return None
    return (w.body_temp - background_temp) * warm_region(v, w.column, w.radius_v, w.radius_h)


def generate(scenario: Scenario) -> tuple[Recording, AnnotationTrack]:
    scenario.validate()
    n = scenario.n_frames
    bg = scenario.background_temp
    warmth = np.zeros((n, ROWS, COLS))
    visible = 3.0 * scenario.noise_std
    deltas: dict[int, int] = {}

    for w in scenario.walkers:
        last_seen = None
        for f in range(w.start_frame, w.start_frame + w.duration + 1):
            heat = walker_warmth(w, f, bg)
            np.maximum(warmth[f], heat, out=warmth[f])
            if heat.max() > visible:
                last_seen = f
        if not w.lingers and last_seen is not None:
            deltas[last_seen] = deltas.get(last_seen, 0) + _sign(w, scenario.entry_direction)

    for spot in scenario.clutter:
        heat = (spot.temp - bg) * warm_region(spot.row, spot.column, spot.radius, spot.radius)
        np.maximum(warmth[spot.start_frame:], heat, out=warmth[spot.start_frame:])

    temps = np.empty((n, ROWS, COLS))
    chunk = 1024
    for f0 in range(0, n, chunk):
        f1 = min(n, f0 + chunk)
        noise = standard_normals(scenario.seed, f0 * ROWS * COLS, (f1 - f0) * ROWS * COLS)
        temps[f0:f1] = bg + scenario.noise_std * noise.reshape(f1 - f0, ROWS, COLS) + warmth[f0:f1]

    rec = Recording(temps, fps=scenario.fps, door_id=scenario.name, entry_direction=scenario.entry_direction)
    ann = AnnotationTrack({f: d for f, d in sorted(deltas.items()) if d != 0}, scenario.initial_count)
    return rec, ann


def standard_suite(seed: int = 0) -> list[Scenario]:
    """The fixed scenario catalogue, one per door-activity challenge."""
    return [
        Scenario("single-entry", seed, 96, walkers=(Walker(8, "up"),)),
        Scenario("single-exit", seed, 96, walkers=(Walker(8, "down"),), initial_count=1),
        Scenario("lingering", seed, 96, walkers=(Walker(8, "up", linger=(18, 10)),)),
        Scenario(
            "two-simultaneous",
            seed,
            96,
            walkers=(Walker(8, "up", radius_h=7.0, column=7.5), Walker(8, "up", radius_h=7.0, column=23.5)),
        ),
        # 24 frames = 1.5 s between the two
        Scenario("back-to-back", seed, 128, walkers=(Walker(8, "up"), Walker(32, "up"))),
        Scenario("slow-walker", seed, 112, walkers=(Walker(8, "up", speed=0.8),)),
        Scenario("warm-clutter", seed, 96, clutter=(WarmSpot(16, 5.0, 25.0),)),
    ]


SCENARIO_NAMES = tuple(s.name for s in standard_suite())


def scenario_by_name(name: str, seed: int = 0) -> Scenario:
    for s in standard_suite(seed):
        if s.name == name:
            return s
    raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIO_NAMES)}")


def busy_scenario(n_frames: int, seed: int = 0, spacing: int = 160) -> Scenario:
    """A long recording with one walker every ``spacing`` frames, alternating in and out."""
    walkers = []
    start = 16
    k = 0
    while start + Walker(start).duration + 16 < n_frames:
        walkers.append(Walker(start, "up" if k % 2 == 0 else "down", column=11.5 + 8 * (k % 2)))
        start += spacing
        k += 1
    return Scenario("busy", seed, n_frames, walkers=tuple(walkers))
