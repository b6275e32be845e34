"""Faraday-geometry level structure of the positively charged trion.

The four optical lines are labelled by the electron and hole branch signs
``(s_e, s_h)``.  Each trion spin state couples to both (mixed) hole ground
states, so lines sharing ``s_e`` form one Lambda system.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field, replace

from .constants import MU_B
from .errors import DegenerateLinesError, DomainError

ROLE_EPS_UEV = 1e-9


class Role(str, enum.Enum):
    DRIVEN = "Driven"
    DETECTED = "Detected"
    OTHER = "Other"


@dataclass(frozen=True)
class MagnetoParams:
    E0: float = 1_408_911.0  # ueV, ~880 nm
    gamma: float = 16.0  # ueV / T^2
    g_e: float = 0.54
    g_h: float = 0.94
    mu_B: float = field(default=MU_B, init=False)

    def __post_init__(self):
        if not self.gamma >= 0:
            raise DomainError(f"diamagnetic coefficient must be >= 0, got {self.gamma}")
        for name in ("E0", "g_e", "g_h"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")


@dataclass(frozen=True)
class TransitionLine:
    s_e: int
    s_h: int
    energy: float
    stokes: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)
    role: Role = Role.OTHER

    @property
    def branch(self) -> tuple[int, int]:
        return (self.s_e, self.s_h)


@dataclass(frozen=True)
class HoleMixing:
    chi: float
    c1: float
    c2: float


def transition_energies(p: MagnetoParams, B: float) -> list[TransitionLine]:
    """Four line energies at field ``B`` (T), ascending."""
    if B < 0:
        raise DomainError(f"field must be >= 0, got {B}")
    center = p.E0 + p.gamma * B * B
    lines = [
        TransitionLine(s_e, s_h, center + (s_e * p.g_e + s_h * p.g_h) * p.mu_B * B / 2)
        for s_e, s_h in itertools.product((-1, 1), repeat=2)
    ]
    return sorted(lines, key=lambda ln: ln.energy)


def hole_mixing(chi: float) -> HoleMixing:
    if not 0.0 <= chi <= math.pi:
        raise DomainError(f"mixing angle must lie in [0, pi], got {chi}")
    c1, c2 = math.cos(chi / 2), math.sin(chi / 2)
    norm = math.hypot(c1, c2)
    return HoleMixing(chi, c1 / norm, c2 / norm)


def detected_branching(mixing: HoleMixing) -> float:
    """Fraction of trion decay into the cross (Detected) leg."""
    return mixing.c2**2


def line_polarizations(mixing: HoleMixing, docp: float) -> dict[tuple[int, int], tuple]:
    """Stokes vectors keyed by branch ``(s_e, s_h)``.

    The two legs of each Lambda carry opposite circular polarization; the
    measured circular degree is a single scalar ``docp``.  ``mixing`` is
    validated but only enters through the branching ratio.
    """
    if not 0.0 <= docp <= 1.0:
        raise DomainError(f"docp must lie in [0, 1], got {docp}")
    if not math.isclose(mixing.c1**2 + mixing.c2**2, 1.0, abs_tol=1e-12):
        raise DomainError("mixing coefficients not normalized")
    return {
        (s_e, s_h): (1.0, 0.0, 0.0, s_e * s_h * docp)
        for s_e, s_h in itertools.product((-1, 1), repeat=2)
    }


def with_polarizations(lines, mixing: HoleMixing, docp: float) -> list[TransitionLine]:
    pol = line_polarizations(mixing, docp)
    return [replace(ln, stokes=pol[ln.branch]) for ln in lines]


def _check_distinct(lines, eps):
    for a, b in itertools.combinations(lines, 2):
        if abs(a.energy - b.energy) < eps:
            raise DegenerateLinesError(
                f"lines {a.branch} and {b.branch} are closer than {eps} ueV"
            )


def assign_roles(lines, eps: float = ROLE_EPS_UEV) -> list[TransitionLine]:
    """Lowest line is driven; the upper member of the inner pair is detected."""
    if len(lines) != 4:
        raise DomainError(f"expected 4 lines, got {len(lines)}")
    ordered = sorted(lines, key=lambda ln: ln.energy)
    _check_distinct(ordered, eps)
    roles = (Role.DRIVEN, Role.OTHER, Role.DETECTED, Role.OTHER)
    return [replace(ln, role=r) for ln, r in zip(ordered, roles)]


@dataclass(frozen=True)
class Resolvability:
    passed: bool
    min_separation: float


def resolvability_check(lines, resolution: float) -> Resolvability:
    """Can the spectrometer isolate the driven and detected lines?"""
    if not resolution > 0:
        raise DomainError("resolution must be > 0")
    try:
        roled = assign_roles(lines)
    except DegenerateLinesError:
        return Resolvability(False, 0.0)
    sep = math.inf
    for ln in roled:
        if ln.role is Role.OTHER:
            continue
        for other in roled:
            if other is not ln:
                sep = min(sep, abs(other.energy - ln.energy))
    # relative slack absorbs rounding when the separation sits exactly on the limit
    return Resolvability(sep >= resolution * (1 - 1e-12), sep)


def role_line(lines, role: Role) -> TransitionLine:
    (ln,) = [x for x in lines if x.role is role]
    return ln
