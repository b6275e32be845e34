"""Rotating quarter-wave-plate polarimetry.

Convention: quarter-wave retarder with fast axis at ``alpha`` followed by a
horizontal linear polarizer, giving

    I(alpha) = 1/2 [S0 + S1 cos^2 2a + S2 sin 2a cos 2a - S3 sin 2a].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, GridError


@dataclass(frozen=True)
class StokesVector:
    S0: float
    S1: float
    S2: float
    S3: float

    def __post_init__(self):
        if not self.S0 > 0:
            raise DomainError("S0 must be > 0")

    @property
    def docp(self) -> float:
        return abs(self.S3) / self.S0

    @property
    def dop(self) -> float:
        return math.sqrt(self.S1**2 + self.S2**2 + self.S3**2) / self.S0

    def is_physical(self, allowance=0.0) -> bool:
        return self.dop <= 1 + allowance

    def as_array(self):
        return np.array([self.S0, self.S1, self.S2, self.S3])


def polarimetry_simulate(S: StokesVector, alphas):
    a = np.asarray(alphas, dtype=float)
    c, s = np.cos(2 * a), np.sin(2 * a)
    return 0.5 * (S.S0 + S.S1 * c * c + S.S2 * s * c - S.S3 * s)


def _check_grid(a):
    if a.size < 16:
        raise GridError("need at least 16 analyser angles")
    step = np.diff(a)
    if np.ptp(step) > 1e-9 * abs(step.mean()) or step.mean() <= 0:
        raise GridError("analyser angles must be uniformly spaced and increasing")
    turns = a.size * step.mean() / math.pi
    if abs(turns - round(turns)) > 1e-9 or round(turns) < 2:
        raise GridError("angles must tile a whole number of turns (>= 2 pi)")


def polarimetry_extract(alphas, intensity):
    """Stokes vector and DOCP from a uniformly sampled QWP rotation."""
    a = np.asarray(alphas, dtype=float)
    I = np.asarray(intensity, dtype=float)
    if a.shape != I.shape:
        raise GridError("angle and intensity arrays differ in shape")
    _check_grid(a)
    n = a.size
    dc = I.mean()
    b2 = 2 / n * I @ np.sin(2 * a)
    a4 = 2 / n * I @ np.cos(4 * a)
    b4 = 2 / n * I @ np.sin(4 * a)
    s1, s2, s3 = 4 * a4, 4 * b4, -2 * b2
    S = StokesVector(2 * dc - s1 / 2, s1, s2, s3)
    return S, S.docp
