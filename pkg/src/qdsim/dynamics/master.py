"""Lindblad evolution of the four-level double-Lambda system.

Basis order is ``(g-, g+, t-, t+)``: the two mixed-hole ground states and
the two trion states.  The laser drives ``g- <-> t-`` only; the detected
photons come from the cross leg ``t- -> g+``.  Everything is written in the
frame rotating at the laser carrier, so free evolution carries no optical
phase and the inter-pulse phase enters as the second pulse's carrier phase.

Dissipators:

* radiative decay ``t- -> g+`` and ``t+ -> g-`` at ``eta / T1`` (the
  detected, cross-polarized legs) and ``t- -> g-``, ``t+ -> g+`` at
  ``(1 - eta) / T1``;
* pure dephasing of every ground-trion coherence at
  ``gamma_phi + A * Omega(t)**2`` (excitation-induced dephasing).  This is the
  Lindblad form with jump operator ``sqrt(2 rate) * P_trion``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, StepSizeError
from .pulses import PulseSequence, unit_envelope

G_MINUS, G_PLUS, T_MINUS, T_PLUS = range(4)

_TRION = np.array([0.0, 0.0, 1.0, 1.0])
_CROSS = (np.add.outer(_TRION, _TRION) == 1).astype(float)

DEFAULT_DT = 0.005  # ps
DRIFT_TOL = 1e-6


@dataclass(frozen=True)
class DecoherenceParams:
    t1: float = 1000.0  # ps
    branching_eta: float = 0.5
    gamma_phi: float = 1 / 51 - 1 / 2000  # 1/ps
    eid_coeff: float = 0.02  # ps

    def __post_init__(self):
        if not self.t1 > 0:
            raise DomainError("t1 must be > 0")
        if not 0 <= self.branching_eta <= 1:
            raise DomainError("branching_eta must lie in [0, 1]")
        if not self.gamma_phi >= 0:
            raise DomainError("gamma_phi must be >= 0")
        if not self.eid_coeff >= 0:
            raise DomainError("eid_coeff must be >= 0")

    @classmethod
    def from_t2star(cls, t2star, t1=1000.0, branching_eta=0.5, eid_coeff=0.02):
        gamma_phi = 1 / t2star - 0.5 / t1
        if gamma_phi < 0:
            raise DomainError("T2* longer than 2 T1 is unphysical")
        return cls(t1, branching_eta, gamma_phi, eid_coeff)

    @classmethod
    def off(cls, branching_eta=0.5):
        return cls(math.inf, branching_eta, 0.0, 0.0)

    @property
    def gamma1(self) -> float:
        return 0.0 if math.isinf(self.t1) else 1.0 / self.t1

    @property
    def t2star(self) -> float:
        rate = self.gamma_phi + 0.5 * self.gamma1
        return math.inf if rate == 0 else 1.0 / rate


def randomized_ground_state() -> np.ndarray:
    """Ground populations equalized by weak above-band pumping."""
    return np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex)


def ground_state(which: int = G_MINUS) -> np.ndarray:
    rho = np.zeros((4, 4), complex)
    rho[which, which] = 1.0
    return rho


def state_diagnostics(rho) -> dict:
    rho = np.asarray(rho)
    trace = np.einsum("...ii->...", rho)
    herm = np.abs(rho - np.swapaxes(rho.conj(), -1, -2)).max(axis=(-1, -2))
    eig = np.linalg.eigvalsh(0.5 * (rho + np.swapaxes(rho.conj(), -1, -2)))
    return {
        "trace_dev": float(np.max(np.abs(trace - 1))),
        "herm_dev": float(np.max(herm)),
        "min_eig": float(np.min(eig)),
    }


def check_state(rho, herm_tol=1e-10, trace_tol=1e-9, eig_tol=1e-9):
    rho = np.asarray(rho)
    if rho.shape[-2:] != (4, 4):
        raise DomainError(f"expected (..., 4, 4) density matrix, got {rho.shape}")
    d = state_diagnostics(rho)
    if d["herm_dev"] > herm_tol or d["trace_dev"] > trace_tol or d["min_eig"] < -eig_tol:
        raise DomainError(f"not a valid density matrix: {d}")
    return d


def _rhs(rho, coupling, deph, g1, eta, detuning):
    """d(rho)/dt.  ``coupling`` = Omega e^{-i phi} broadcast over the batch."""
    h02 = (0.5 * coupling)[..., None]
    h20 = np.conj(h02)
    h22 = -detuning
    out = np.empty_like(rho)
    # -i [H, rho] with H = h02 |g-><t-| + h.c. + h22 |t-><t-|
    comm = np.zeros_like(rho)
    comm[..., 0, :] += h02 * rho[..., 2, :]
    comm[..., 2, :] += h20 * rho[..., 0, :] + h22 * rho[..., 2, :]
    comm[..., :, 0] -= rho[..., :, 2] * h20
    comm[..., :, 2] -= rho[..., :, 0] * h02 + rho[..., :, 2] * h22
    out = -1j * comm
    if g1:
        out -= 0.5 * g1 * np.add.outer(_TRION, _TRION) * rho
        p_tm, p_tp = rho[..., 2, 2], rho[..., 3, 3]
        out[..., 0, 0] += g1 * ((1 - eta) * p_tm + eta * p_tp)
        out[..., 1, 1] += g1 * (eta * p_tm + (1 - eta) * p_tp)
    out -= deph[..., None, None] * _CROSS * rho
    return out


def _rk4_window(rho, coupling, h, dec, detuning=0.0, record=None, t0=0.0):
    """Classic RK4 across one pulse window.

    ``coupling`` holds samples on the half-step grid ``t0 + k h / 2`` so that
    each step reuses its endpoint values.
    """
    n = (coupling.shape[-1] - 1) // 2
    deph = dec.gamma_phi + dec.eid_coeff * np.abs(coupling) ** 2
    g1, eta = dec.gamma1, dec.branching_eta
    f = _rhs
    for k in range(n):
        c0, cm, c1 = coupling[..., 2 * k], coupling[..., 2 * k + 1], coupling[..., 2 * k + 2]
        d0, dm, d1 = deph[..., 2 * k], deph[..., 2 * k + 1], deph[..., 2 * k + 2]
        k1 = f(rho, c0, d0, g1, eta, detuning)
        k2 = f(rho + (0.5 * h) * k1, cm, dm, g1, eta, detuning)
        k3 = f(rho + (0.5 * h) * k2, cm, dm, g1, eta, detuning)
        k4 = f(rho + h * k3, c1, d1, g1, eta, detuning)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if record is not None:
            record.append((t0 + (k + 1) * h, rho.copy()))
    return rho


def free_evolve(rho, tau, dec: DecoherenceParams, detuning: float = 0.0):
    """Exact evolution with the drive off for a duration ``tau`` (ps)."""
    rho = np.asarray(rho, dtype=complex)
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise DomainError("free evolution time must be >= 0")
    t = tau[..., None, None]
    g1, eta = dec.gamma1, dec.branching_eta
    rates = 0.5 * g1 * np.add.outer(_TRION, _TRION) + dec.gamma_phi * _CROSS
    h = np.array([0.0, 0.0, -detuning, 0.0])
    gen = rates + 1j * np.subtract.outer(h, h)
    out = rho * np.exp(-gen * t)
    # trion populations decay into the ground states
    lost = 1.0 - np.exp(-g1 * tau)
    p_tm, p_tp = rho[..., 2, 2], rho[..., 3, 3]
    out[..., 0, 0] = rho[..., 0, 0] + lost * ((1 - eta) * p_tm + eta * p_tp)
    out[..., 1, 1] = rho[..., 1, 1] + lost * (eta * p_tm + (1 - eta) * p_tp)
    return out


def _merge_windows(pulses):
    merged = []
    for p in pulses:
        lo, hi = p.window
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
            merged[-1][2].append(p)
        else:
            merged.append([lo, hi, [p]])
    return merged


def _step_count(span, dt):
    return max(1, math.ceil(span / dt - 1e-9))


def _check_drift(rho):
    d = state_diagnostics(rho)
    if d["trace_dev"] > DRIFT_TOL or d["herm_dev"] > DRIFT_TOL or d["min_eig"] < -DRIFT_TOL:
        raise StepSizeError(f"density-matrix invariants drifted ({d}); reduce dt")


def _sequence_detuning(pulses):
    detunings = {p.detuning for p in pulses}
    if len(detunings) > 1:
        raise DomainError("all pulses of a sequence must share one laser detuning")
    return detunings.pop() if detunings else 0.0


def evolve(rho0, seq: PulseSequence, dec: DecoherenceParams, dt: float = DEFAULT_DT,
           trajectory: bool = False):
    """Propagate ``rho0`` through the pulse sequence.

    Pulse windows are integrated with RK4 at a step no larger than ``dt``;
    gaps between windows use :func:`free_evolve`.  The returned state is taken
    at the end of the last pulse window.  With ``trajectory=True`` a tuple
    ``(rho, times, states)`` is returned.
    """
    rho = np.array(rho0, dtype=complex)
    check_state(rho)
    if not dt > 0:
        raise DomainError("dt must be > 0")
    pulses = seq.pulses
    record = [] if trajectory else None
    if pulses:
        fwhm_min = min(p.fwhm for p in pulses)
        if dt > fwhm_min / 50 * (1 + 1e-12):
            raise DomainError(f"dt={dt} ps exceeds fwhm/50 = {fwhm_min / 50} ps")
        detuning = _sequence_detuning(pulses)
        windows = _merge_windows(pulses)
        t = windows[0][0]
        if record is not None:
            record.append((t, rho.copy()))
        for lo, hi, group in windows:
            if lo > t:
                rho = free_evolve(rho, lo - t, dec, detuning)
                if record is not None:
                    record.append((lo, rho.copy()))
            n = _step_count(hi - lo, dt)
            h = (hi - lo) / n
            grid = lo + 0.5 * h * np.arange(2 * n + 1)
            coupling = sum(
                p.area * unit_envelope(grid, p.sigma, p.center) * np.exp(-1j * p.carrier_phase)
                for p in group
            )
            rho = _rk4_window(rho, coupling, h, dec, detuning, record, lo)
            _check_drift(rho)
            t = hi
    if trajectory:
        times = np.array([r[0] for r in record])
        states = np.array([r[1] for r in record]) if record else np.empty((0, 4, 4), complex)
        return rho, times, states
    return rho


# -- superoperator form, used by the grid simulators --------------------------

_BASIS = np.eye(16, dtype=complex).reshape(16, 4, 4)


def liouvillian_parts(dec: DecoherenceParams, detuning: float = 0.0):
    """Constant pieces of the 16x16 generator.

    ``L(t) = L0 + Re(c) Lx + Im(c) Ly + rate(t) Ld`` with ``c = Omega e^{-i phi}``
    and ``rate = gamma_phi + A |c|^2``.
    """
    def gen(c, d):
        out = _rhs(_BASIS, np.full(16, c, complex), np.full(16, d), dec.gamma1,
                   dec.branching_eta, detuning)
        return out.reshape(16, 16).T

    L0 = gen(0, 0)
    return L0, gen(1, 0) - L0, gen(1j, 0) - L0, gen(0, 1) - L0


def pulse_channel(areas, fwhm: float, dec: DecoherenceParams, dt: float = DEFAULT_DT,
                  detuning: float = 0.0):
    """Superoperators (N, 16, 16) of single zero-phase pulses centred at t=0.

    Acts on row-major vectorized density matrices.  RK4 is run on the
    propagator itself over the same window and step as :func:`evolve`.
    """
    from .pulses import PulseSpec

    areas = np.atleast_1d(np.asarray(areas, dtype=float))
    if dt > fwhm / 50 * (1 + 1e-12):
        raise DomainError(f"dt={dt} ps exceeds fwhm/50")
    spec = PulseSpec(1.0, fwhm)
    lo, hi = spec.window
    n = _step_count(hi - lo, dt)
    h = (hi - lo) / n
    shape = unit_envelope(lo + 0.5 * h * np.arange(2 * n + 1), spec.sigma)
    L0, Lx, _, Ld = liouvillian_parts(dec, detuning)
    omega = areas[:, None] * shape[None, :]  # real: zero carrier phase
    rate = dec.gamma_phi + dec.eid_coeff * omega**2
    S = np.broadcast_to(np.eye(16, dtype=complex), (areas.size, 16, 16)).copy()
    parts = np.stack([L0, Lx, Ld]).reshape(3, 256)
    ones = np.ones_like(omega)
    coeff = np.stack([ones, omega, rate], axis=-1).astype(complex)  # (N, 2n+1, 3)

    def L(k):
        return (coeff[:, k] @ parts).reshape(-1, 16, 16)

    for k in range(n):
        La, Lm, Lb = L(2 * k), L(2 * k + 1), L(2 * k + 2)
        k1 = La @ S
        k2 = Lm @ (S + (0.5 * h) * k1)
        k3 = Lm @ (S + (0.5 * h) * k2)
        k4 = Lb @ (S + h * k3)
        S = S + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return S


def phase_weights(phi):
    """Elementwise weights w_ij = z_i conj(z_j) of the carrier-phase rotation."""
    phi = np.asarray(phi, dtype=float)
    z = np.ones(phi.shape + (4,), complex)
    z[..., 2] = np.exp(1j * phi)
    return (z[..., :, None] * np.conj(z[..., None, :])).reshape(phi.shape + (16,))


def apply_channel(S, rho, phi=None):
    """Apply a pulse superoperator; ``phi`` rotates the carrier phase."""
    v = np.asarray(rho).reshape(np.shape(rho)[:-2] + (16,))
    if phi is not None:
        w = phase_weights(phi)
        v = np.conj(w) * v
    out = np.einsum("...ij,...j->...i", S, v)
    if phi is not None:
        out = w * out
    return out.reshape(out.shape[:-1] + (4, 4))
