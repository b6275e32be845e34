"""Gaussian control pulses and their ideal (delta-pulse) rotations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..constants import FWHM_TO_SIGMA
from ..errors import DomainError, OverlapError

# envelopes are truncated here and renormalized so the window holds the full area
SUPPORT_SIGMAS = 6.0


@dataclass(frozen=True)
class PulseSpec:
    area: float
    fwhm: float = 3.0  # ps
    center: float = 0.0  # ps
    carrier_phase: float = 0.0
    detuning: float = 0.0  # rad / ps

    def __post_init__(self):
        if not self.area >= 0:
            raise DomainError(f"pulse area must be >= 0, got {self.area}")
        if not self.fwhm > 0:
            raise DomainError(f"fwhm must be > 0, got {self.fwhm}")

    @property
    def sigma(self) -> float:
        return self.fwhm * FWHM_TO_SIGMA

    @property
    def window(self) -> tuple[float, float]:
        half = SUPPORT_SIGMAS * self.sigma
        return (self.center - half, self.center + half)


@dataclass(frozen=True)
class PulseSequence:
    pulses: tuple[PulseSpec, ...]
    coarse_delay: float = 0.0  # ps
    fine_delay: float = 0.0  # fs
    min_gap_fwhm: float | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        centers = [p.center for p in self.pulses]
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise DomainError("pulse centers must be strictly increasing")
        if self.min_gap_fwhm is not None:
            for a, b in zip(self.pulses, self.pulses[1:]):
                if b.center - a.center < self.min_gap_fwhm * max(a.fwhm, b.fwhm):
                    raise OverlapError(
                        f"pulses at {a.center} and {b.center} ps are closer than "
                        f"{self.min_gap_fwhm} x fwhm"
                    )

    @property
    def delay(self) -> float:
        """Total inter-pulse delay in ps."""
        return self.coarse_delay + 1e-3 * self.fine_delay


def area_from_sqrt_power(sqrt_power, kappa: float):
    """Pulse area (rad) for a given square root of pulse power (uW^1/2)."""
    sqrt_power = np.asarray(sqrt_power, dtype=float)
    if not kappa > 0:
        raise DomainError("kappa must be > 0")
    if np.any(sqrt_power < 0):
        raise DomainError("square-root power must be >= 0")
    theta = kappa * sqrt_power
    return float(theta) if theta.ndim == 0 else theta


def unit_envelope(t, sigma: float, center: float = 0.0):
    """Truncated Gaussian with unit time integral (1/ps)."""
    half = SUPPORT_SIGMAS * sigma
    norm = sigma * math.sqrt(2 * math.pi) * math.erf(SUPPORT_SIGMAS / math.sqrt(2))
    x = np.asarray(t, dtype=float) - center
    return np.where(np.abs(x) <= half, np.exp(-0.5 * (x / sigma) ** 2) / norm, 0.0)


def peak_rabi_frequency(spec: PulseSpec) -> float:
    return float(spec.area * unit_envelope(spec.center, spec.sigma, spec.center))


def gaussian_envelope(spec: PulseSpec):
    """Rabi-frequency envelope Omega(t) in rad/ps; integrates to ``spec.area``."""
    area, sigma, center = spec.area, spec.sigma, spec.center

    def omega(t):
        return area * unit_envelope(t, sigma, center)

    return omega


_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)


def delta_pulse_propagator(theta: float, phi: float) -> np.ndarray:
    """Rotation by ``theta`` about an equatorial axis at azimuth ``phi``.

    Basis order is (ground, excited).
    """
    axis = math.cos(phi) * _SX + math.sin(phi) * _SY
    return math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * axis
