"""Photon-count detection model with per-point random substreams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..parallel import chunked

# stream tags keep the noise of different experiments independent for one seed
STREAMS = {
    "rabi": 1,
    "background": 2,
    "ramsey": 3,
    "su2": 4,
    "zeeman": 5,
    "polarimetry": 6,
}


@dataclass(frozen=True)
class CountModel:
    rep_rate: float = 80.0  # MHz
    integration_time: float = 14400 / 8192  # s per point
    efficiency: float = 0.002
    background_rate: float = 200.0  # counts / s
    rng_seed: int = 0
    power_background: float = 0.0  # counts / s per uW, incoherent term, off by default

    def __post_init__(self):
        if not self.rep_rate > 0:
            raise DomainError("rep_rate must be > 0")
        for name in ("integration_time", "efficiency", "background_rate", "power_background"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")
        if self.rng_seed < 0:
            raise DomainError("rng_seed must be >= 0")

    @property
    def signal_scale(self) -> float:
        """Counts per point for unit trion population on a fully detected leg."""
        return self.rep_rate * 1e6 * self.integration_time * self.efficiency

    def expected(self, trion_population, branching_eta, power=0.0):
        bg = (self.background_rate + self.power_background * np.asarray(power)) * self.integration_time
        return self.signal_scale * branching_eta * np.asarray(trion_population) + bg


def point_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    """Counter-based generator owned by a single grid point."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, index])))


def sample_counts(expected, seed: int, stream: str | int, threads: int | None = None):
    """Poisson-sample ``expected`` (any shape); point ``i`` of the flattened
    array always draws from substream ``(seed, stream, i)``."""
    lam = np.asarray(expected, dtype=float)
    tag = STREAMS[stream] if isinstance(stream, str) else int(stream)
    flat = lam.ravel()

    def work(a, b):
        return np.array([point_rng(seed, tag, i).poisson(flat[i]) for i in range(a, b)], dtype=float)

    return chunked(work, flat.size, threads).reshape(lam.shape)
