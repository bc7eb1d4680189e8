"""Running Gaussian Average background model with optional MRF label refinement."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frames_io import COLS, ROWS, ThermalFrame


@dataclass(frozen=True)
class BackgroundParams:
    alpha: float = 0.05
    sigma: float = 0.4
    eta: float = 0.015
    theta_pf: float = 0.015
    gamma: float = 0.2
    mrf_iterations: int = 1

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        for name in ("sigma", "eta", "theta_pf", "gamma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
        if self.mrf_iterations < 1:
            raise ValueError(f"mrf_iterations must be >= 1, got {self.mrf_iterations}")

    @property
    def log_norm(self) -> float:
        """log of the Gaussian peak height 1 / (sigma * sqrt(2 pi))."""
        return -math.log(self.sigma * math.sqrt(2.0 * math.pi))

    @property
    def flip_deviation(self) -> float:
        """|T - mu| beyond which a pixel is foreground under the plain RGA test."""
        arg = -2.0 * math.log(self.eta * self.sigma * math.sqrt(2.0 * math.pi))
        return self.sigma * math.sqrt(arg) if arg > 0 else 0.0


@dataclass
class BackgroundModel:
    mu: np.ndarray  # (24, 32) running means, Celsius
    params: BackgroundParams
    initialized: bool = True


def _temps(frame) -> np.ndarray:
    if isinstance(frame, ThermalFrame):
        return frame.temps
    return np.asarray(frame, dtype=np.float64).reshape(ROWS, COLS)


def init_background(frames, params: BackgroundParams | None = None) -> BackgroundModel:
    """Seed the means from one person-free frame, or the average of a stack of them."""
    params = params or BackgroundParams()
    if isinstance(frames, ThermalFrame):
        mu = frames.temps.copy()
    else:
        arr = np.asarray(frames, dtype=np.float64)
        mu = arr.reshape(-1, ROWS, COLS).mean(axis=0) if arr.ndim == 3 else arr.reshape(ROWS, COLS).copy()
    return BackgroundModel(mu=mu, params=params, initialized=True)


def log_background_density(model: BackgroundModel, temps: np.ndarray) -> np.ndarray:
    d = temps - model.mu
    s = model.params.sigma
    return model.params.log_norm - (d * d) / (2.0 * s * s)


def background_density(model: BackgroundModel, x, t):
    """Gaussian density of temperature ``t`` under the background at pixel ``x``.

    ``x`` is a row-major index (or anything that indexes the flattened means).
    """
    mu = model.mu.reshape(-1)[x]
    s = model.params.sigma
    d = np.asarray(t, dtype=np.float64) - mu
    out = np.exp(-(d * d) / (2.0 * s * s)) / (s * math.sqrt(2.0 * math.pi))
    return float(out) if np.ndim(out) == 0 else out


def rga_classify(model: BackgroundModel, frame) -> np.ndarray:
    """Foreground mask (True = F). Background iff density >= eta.

    Compared in the log domain so the MRF test with balanced neighbours is the
    very same floating-point comparison.
    """
    logp = log_background_density(model, _temps(frame))
    return ~(logp >= math.log(model.params.eta))


# number of in-bounds 8-neighbours per pixel (3 at corners, 5 on edges)
_N_NEIGHBORS = np.full((ROWS, COLS), 8, dtype=np.int64)
_N_NEIGHBORS[[0, -1], :] = 5
_N_NEIGHBORS[:, [0, -1]] = 5
_N_NEIGHBORS[[0, 0, -1, -1], [0, -1, 0, -1]] = 3


def foreground_neighbors(mask: np.ndarray) -> np.ndarray:
    """Count of foreground pixels in each pixel's 8-neighbourhood (in-bounds only)."""
    p = np.zeros((ROWS + 2, COLS + 2), dtype=np.int64)
    p[1:-1, 1:-1] = mask
    return (
        p[:-2, :-2] + p[:-2, 1:-1] + p[:-2, 2:]
        + p[1:-1, :-2] + p[1:-1, 2:]
        + p[2:, :-2] + p[2:, 1:-1] + p[2:, 2:]
    )


def mrf_refine(model: BackgroundModel, frame, initial_mask: np.ndarray, logp: np.ndarray | None = None) -> np.ndarray:
    """Spatially adaptive relabelling of ``initial_mask``.

    Background iff log p_B >= log(theta_pf) + (Q_F - Q_B) / gamma. Every pass reads
    only the previous pass's labels (synchronous update).
    """
    p = model.params
    if logp is None:
        logp = log_background_density(model, _temps(frame))
    log_theta = math.log(p.theta_pf)
    mask = np.asarray(initial_mask, dtype=bool).reshape(ROWS, COLS)
    for _ in range(p.mrf_iterations):
        q_f = foreground_neighbors(mask)
        q_b = _N_NEIGHBORS - q_f
        new = ~(logp >= log_theta + (q_f - q_b) / p.gamma)
        if np.array_equal(new, mask):
            break
        mask = new
    return mask


def rga_update(model: BackgroundModel, frame, mask: np.ndarray) -> BackgroundModel:
    """Blend background pixels into the running mean; foreground means stay frozen."""
    t = _temps(frame)
    a = model.params.alpha
    mu = np.where(mask, model.mu, a * t + (1.0 - a) * model.mu)
    return BackgroundModel(mu=mu, params=model.params, initialized=True)


def subtract(model: BackgroundModel, frame, use_mrf: bool = True) -> tuple[np.ndarray, BackgroundModel]:
    """Classify with the previous means, optionally refine, then update."""
    t = _temps(frame)
    logp = log_background_density(model, t)
    mask = ~(logp >= math.log(model.params.eta))
    if use_mrf:
        mask = mrf_refine(model, t, mask, logp=logp)
    return mask, rga_update(model, t, mask)
