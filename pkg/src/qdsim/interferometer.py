"""Mach-Zehnder delay line: delay schedules, path-length drift, the HeNe
phase reference and drift correction of two-pulse maps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C_NM_PER_FS, LAMBDA_HENE_NM
from .errors import CoverageError, DomainError, GridError

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class DelaySchedule:
    coarse_start: float = 66.7  # ps
    coarse_step: float = 3.33  # ps
    n_coarse: int = 21
    fine_span: float = 12.0  # fs
    n_fine: int = 48

    def __post_init__(self):
        if self.coarse_step <= 0 or self.fine_span <= 0:
            raise DomainError("delay steps and spans must be > 0")
        if self.n_coarse < 1 or self.n_fine < 2:
            raise DomainError("need n_coarse >= 1 and n_fine >= 2")

    @property
    def coarse(self) -> np.ndarray:
        return self.coarse_start + self.coarse_step * np.arange(self.n_coarse)

    @property
    def fine(self) -> np.ndarray:
        return np.linspace(0.0, self.fine_span, self.n_fine)


@dataclass(frozen=True)
class DriftTrace:
    timestamps: np.ndarray  # s
    path_drift: np.ndarray  # nm
    seed: int = 0

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=float)
        if ts.ndim != 1 or ts.size < 2 or np.any(np.diff(ts) <= 0):
            raise DomainError("drift timestamps must be strictly increasing")
        if np.shape(self.path_drift) != ts.shape:
            raise DomainError("timestamps and path_drift lengths differ")


@dataclass(frozen=True)
class HeNeTrace:
    timestamps: np.ndarray
    wrapped_phase: np.ndarray


def generate_drift(duration, n_samples, sigma_rw=0.0, linear=0.0, seed=0) -> DriftTrace:
    """Linear ramp plus Wiener path, sampled uniformly on [0, duration] s.

    ``sigma_rw`` is in nm/sqrt(s) and ``linear`` in nm/s.
    """
    if not duration > 0:
        raise DomainError("duration must be > 0")
    if n_samples < 2:
        raise DomainError("need at least 2 samples")
    if sigma_rw < 0:
        raise DomainError("sigma_rw must be >= 0")
    ts = np.linspace(0.0, duration, n_samples)
    dt = np.diff(ts)
    steps = np.random.default_rng(seed).standard_normal(n_samples - 1) * sigma_rw * np.sqrt(dt)
    walk = np.concatenate([[0.0], np.cumsum(steps)])
    return DriftTrace(ts, linear * ts + walk, seed)


def wrap_phase(x):
    """Map phases into (-pi, pi]."""
    x = np.asarray(x, dtype=float)
    return math.pi - np.mod(math.pi - x, TWO_PI)


def hene_wrapped_phase(drift: DriftTrace, lambda_hene=LAMBDA_HENE_NM, sign=1) -> HeNeTrace:
    """Reference phase seen by the HeNe; ``sign=-1`` flips the
    counter-propagating convention."""
    if not lambda_hene > 0:
        raise DomainError("lambda_hene must be > 0")
    phase = sign * TWO_PI * np.asarray(drift.path_drift) / lambda_hene
    return HeNeTrace(np.asarray(drift.timestamps, dtype=float), wrap_phase(phase))


def unwrap_phase(wrapped):
    """Remove 2 pi jumps between consecutive samples.

    Requires the true phase to change by less than pi per sample; violations
    cannot be detected.  The 2 pi offsets are accumulated as integers so the
    output carries a single rounding per sample.
    """
    w = np.asarray(wrapped, dtype=float)
    if w.size == 0:
        raise DomainError("empty phase sequence")
    d = np.diff(w)
    jumps = np.where(d > math.pi, -1, np.where(d < -math.pi, 1, 0))
    turns = np.concatenate([[0], np.cumsum(jumps)])
    return w + TWO_PI * turns


def drift_to_delay(unwrapped_phase, lambda_hene=LAMBDA_HENE_NM):
    """Delay change (fs) matching a HeNe phase change."""
    if not lambda_hene > 0:
        raise DomainError("lambda_hene must be > 0")
    return np.asarray(unwrapped_phase, dtype=float) * lambda_hene / (TWO_PI * C_NM_PER_FS)


def qd_phase_from_hene(unwrapped_phase, lambda_qd, lambda_hene=LAMBDA_HENE_NM):
    """The same path change expressed as optical phase at the QD wavelength."""
    return np.asarray(unwrapped_phase) * (lambda_hene / lambda_qd)


def hene_delay_at(hene: HeNeTrace, timestamps, lambda_hene=LAMBDA_HENE_NM, sign=1):
    ts = np.asarray(timestamps, dtype=float)
    t_h = np.asarray(hene.timestamps, dtype=float)
    if ts.min() < t_h[0] or ts.max() > t_h[-1]:
        raise CoverageError(
            f"HeNe trace covers [{t_h[0]}, {t_h[-1]}] s, acquisition needs "
            f"[{ts.min()}, {ts.max()}] s"
        )
    delay = sign * drift_to_delay(unwrap_phase(hene.wrapped_phase), lambda_hene)
    return np.interp(ts, t_h, delay - delay[0])


def correct_su2_map(raw, timestamps, fine_axis, hene: HeNeTrace, target_axis=None,
                    lambda_hene=LAMBDA_HENE_NM, sign=1):
    """Re-grid each power row of a (n_power, n_fine) map onto a common delay axis.

    The realized delay of every point is its nominal fine delay plus the
    HeNe-derived drift at its timestamp.  Rows are interpolated linearly;
    target delays outside a row's realized range come back as NaN.  Count
    values are never rescaled.

    Returns ``(corrected, realized)``.
    """
    raw = np.asarray(raw, dtype=float)
    fine_axis = np.asarray(fine_axis, dtype=float)
    target = fine_axis if target_axis is None else np.asarray(target_axis, dtype=float)
    if np.any(np.diff(fine_axis) <= 0) or np.any(np.diff(target) <= 0):
        raise GridError("fine axes must be strictly increasing")
    if raw.shape != np.shape(timestamps) or raw.shape[-1] != fine_axis.size:
        raise GridError("map, timestamps and fine axis shapes disagree")
    realized = fine_axis + hene_delay_at(hene, timestamps, lambda_hene, sign)
    out = np.full((raw.shape[0], target.size), np.nan)
    for i, (x, y) in enumerate(zip(realized, raw)):
        order = np.argsort(x, kind="stable")
        x, y = x[order], y[order]
        inside = (target >= x[0]) & (target <= x[-1])
        out[i, inside] = np.interp(target[inside], x, y)
    return out, realized
