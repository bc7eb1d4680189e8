"""Count-series evaluation: MAE, per-person MAE and the windowed count-change rate."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .frames_io import CountSeries


class UndefinedMetric(ValueError):
    """The metric has a zero denominator for these series."""


@dataclass(frozen=True)
class MetricsParams:
    window_w: int = 16

    def __post_init__(self):
        if self.window_w < 0:
            raise ValueError(f"window_w must be >= 0, got {self.window_w}")


@dataclass
class CCRDiagnostics:
    errors: np.ndarray  # e_n per change slot
    offsets: np.ndarray  # chosen delta_n per change slot
    matched: int  # true changes reproduced within the window
    missed: int  # true changes not reproduced
    spurious: int  # unexplained estimated changes, including the M term
    unabsorbed: int  # the M term alone


@dataclass
class MetricsReport:
    mae: float
    mae_pp: float | None  # None when the truth sums to zero
    ccr_wcc: float
    w: int
    n_frames: int
    matched: int
    missed: int
    spurious: int

    def to_dict(self) -> dict:
        return asdict(self)


def _as_array(series) -> np.ndarray:
    if isinstance(series, CountSeries):
        return series.counts
    return np.asarray(series, dtype=np.int64).reshape(-1)


def _pair(truth, est, min_len: int = 1) -> tuple[np.ndarray, np.ndarray]:
    y, yh = _as_array(truth), _as_array(est)
    if len(y) != len(yh):
        raise ValueError(f"length mismatch: truth has {len(y)} frames, estimate {len(yh)}")
    if len(y) < min_len:
        raise ValueError(f"need at least {min_len} frames, got {len(y)}")
    return y, yh


def mae(truth, est) -> float:
    y, yh = _pair(truth, est)
    return float(np.abs(yh - y).sum() / len(y))


def mae_pp(truth, est) -> float:
    y, yh = _pair(truth, est)
    total = int(y.sum())
    if total == 0:
        raise UndefinedMetric("per-person MAE is undefined: ground-truth counts sum to zero")
    return float(np.abs(yh - y).sum() / total)


def window_offsets(w: int) -> np.ndarray:
    """0, -1, +1, -2, +2, ... : the order in which equal-cost offsets win."""
    out = [0]
    for k in range(1, w + 1):
        out += [-k, k]
    return np.array(out, dtype=np.int64)


def ccr_wcc(truth, est, w: int = 16) -> tuple[float, CCRDiagnostics]:
    """Windowed count-change correct classification rate.

    Slot ``i`` (0-based) holds the change from frame ``i`` to ``i + 1``; the math
    is usually written 1-based with ``n = i + 1``. Offsets that leave the valid
    slot range are skipped.
    """
    if w < 0:
        raise ValueError(f"window must be >= 0, got {w}")
    y, yh = _pair(truth, est, min_len=2)
    dy = np.diff(y)
    dyh = np.diff(yh)
    k = len(dy)
    offsets = window_offsets(w)

    slots = np.arange(k)[:, None] + offsets[None, :]
    valid = (slots >= 0) & (slots < k)
    cost = np.where(valid, np.abs(dy[:, None] - dyh[np.clip(slots, 0, k - 1)]), np.iinfo(np.int64).max)
    best = np.argmin(cost, axis=1)  # first minimum wins, so offsets order is the tie-break
    e = cost[np.arange(k), best]
    delta = offsets[best]

    absorbed = np.zeros(k, dtype=bool)
    absorbed[np.arange(k) + delta] = True
    unabsorbed = int(np.count_nonzero((dyh != 0) & ~absorbed))

    changed = dy != 0
    matched = int(np.count_nonzero(changed & (e == 0)))
    missed = int(np.count_nonzero(changed & (e != 0)))
    false_slot = int(np.count_nonzero(~changed & (e != 0)))
    denom = matched + missed + false_slot + unabsorbed
    rate = 1.0 if denom == 0 else matched / denom
    diag = CCRDiagnostics(e, delta, matched, missed, false_slot + unabsorbed, unabsorbed)
    return rate, diag


def evaluate(truth, est, params: MetricsParams | None = None) -> MetricsReport:
    params = params or MetricsParams()
    y, yh = _pair(truth, est, min_len=2)
    try:
        pp = mae_pp(y, yh)
    except UndefinedMetric:
        pp = None
    rate, diag = ccr_wcc(y, yh, params.window_w)
    return MetricsReport(
        mae=mae(y, yh),
        mae_pp=pp,
        ccr_wcc=rate,
        w=params.window_w,
        n_frames=len(y),
        matched=diag.matched,
        missed=diag.missed,
        spurious=diag.spurious,
    )
