"""Grid simulators for the Rabi, Ramsey and two-pulse SU(2) experiments.

All simulators start from the randomized ground state unless told
otherwise, read out the ``t-`` population at the end of the last pulse
window and convert it to counts with a :class:`CountModel`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..constants import C_NM_PER_FS, LAMBDA_QD_NM
from ..errors import CoverageError, DomainError, OverlapError
from ..parallel import chunked
from .counts import CountModel, sample_counts
from .master import (
    DEFAULT_DT,
    DecoherenceParams,
    _rk4_window,
    _step_count,
    apply_channel,
    check_state,
    evolve,
    free_evolve,
    pulse_channel,
    randomized_ground_state,
    state_diagnostics,
)
from .pulses import PulseSequence, PulseSpec, delta_pulse_propagator, unit_envelope

MIN_GAP_FWHM = 5.0


def _resolve_dt(dt, fwhm):
    return min(DEFAULT_DT, fwhm / 50) if dt is None else dt


def _ascending(name, grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError(f"{name} must be a non-empty 1-D grid")
    if np.any(np.diff(grid) <= 0):
        raise DomainError(f"{name} must be strictly ascending")
    return grid


def carrier_phase(delay_fs, lambda_nm=LAMBDA_QD_NM):
    """Optical phase accumulated over ``delay_fs``, reduced to [0, 2 pi)."""
    cycles = np.asarray(delay_fs, dtype=float) * C_NM_PER_FS / lambda_nm
    return 2 * np.pi * (cycles - np.floor(cycles))


@dataclass
class RabiCurve:
    sqrt_power: np.ndarray
    theta: np.ndarray
    population: np.ndarray  # t- population after the pulse
    expected: np.ndarray
    counts: np.ndarray | None
    diagnostics: dict


@dataclass
class RamseyData:
    coarse: np.ndarray  # ps
    fine: np.ndarray  # fs
    phase: np.ndarray  # (n_coarse, n_fine) rad
    population: np.ndarray
    expected: np.ndarray
    counts: np.ndarray | None
    diagnostics: dict


@dataclass
class Su2Data:
    sqrt_power: np.ndarray
    fine: np.ndarray  # nominal fine delay, fs
    theta: np.ndarray
    coarse: float
    realized_fine: np.ndarray  # (n_power, n_fine) fs
    phase: np.ndarray
    timestamps: np.ndarray  # s
    population: np.ndarray
    expected: np.ndarray
    counts: np.ndarray | None
    diagnostics: dict


def _single_pulse_batch(rho0, theta, fwhm, dec, dt, threads):
    spec = PulseSpec(1.0, fwhm)
    lo, hi = spec.window
    n = _step_count(hi - lo, dt)
    h = (hi - lo) / n
    shape = unit_envelope(lo + 0.5 * h * np.arange(2 * n + 1), spec.sigma).astype(complex)

    def work(a, b):
        rho = np.broadcast_to(rho0, (b - a, 4, 4)).copy()
        return _rk4_window(rho, theta[a:b, None] * shape[None, :], h, dec)

    return chunked(work, theta.size, threads)


def simulate_rabi(sqrt_power, kappa, dec: DecoherenceParams, counts: CountModel,
                  fwhm=3.0, dt=None, rho0=None, noise=True, stream="rabi", threads=None):
    sqrt_power = _ascending("sqrt_power grid", sqrt_power)
    if np.any(sqrt_power < 0) or not kappa > 0:
        raise DomainError("need sqrt_power >= 0 and kappa > 0")
    dt = _resolve_dt(dt, fwhm)
    if dt > fwhm / 50 * (1 + 1e-12):
        raise DomainError("dt exceeds fwhm/50")
    rho0 = randomized_ground_state() if rho0 is None else np.asarray(rho0, complex)
    check_state(rho0)
    theta = kappa * sqrt_power
    rho = _single_pulse_batch(rho0, theta, fwhm, dec, dt, threads)
    pop = rho[:, 2, 2].real.copy()
    expected = counts.expected(pop, dec.branching_eta, power=sqrt_power**2)
    sampled = sample_counts(expected, counts.rng_seed, stream, threads) if noise else None
    return RabiCurve(sqrt_power, theta, pop, expected, sampled, state_diagnostics(rho))


def simulate_background_control(sqrt_power, kappa, dec, counts, leakage=0.0, **kw):
    """Control run without above-band pumping: the hole sits in the undriven
    ground state.  ``leakage`` puts a fraction back in the driven one."""
    if not 0 <= leakage <= 1:
        raise DomainError("leakage must lie in [0, 1]")
    rho0 = np.diag([leakage, 1 - leakage, 0, 0]).astype(complex)
    kw.setdefault("stream", "background")
    return simulate_rabi(sqrt_power, kappa, dec, counts, rho0=rho0, **kw)


def _two_pulse(S_first, S_second, rho0, delay_ps, phase, fwhm, dec):
    """Propagate through two pulses whose windows do not overlap."""
    sigma = PulseSpec(1.0, fwhm).sigma
    gap = np.asarray(delay_ps) - 12.0 * sigma
    rho1 = apply_channel(S_first, rho0)
    rho2 = free_evolve(rho1, gap, dec)
    return apply_channel(S_second, rho2, phase)


def _windows_overlap(delay_ps, fwhm):
    return np.asarray(delay_ps) < 12.0 * PulseSpec(1.0, fwhm).sigma


def _evolve_pair(rho0, theta, delay_ps, phase, fwhm, dec, dt):
    seq = PulseSequence(
        [PulseSpec(theta, fwhm, 0.0), PulseSpec(theta, fwhm, float(delay_ps), float(phase))]
    )
    return evolve(rho0, seq, dec, dt)


def delta_pulse(rho, theta, phi=0.0):
    """Instantaneous rotation of the driven ``g- <-> t-`` pair."""
    U = np.eye(4, dtype=complex)
    U[np.ix_([0, 2], [0, 2])] = delta_pulse_propagator(theta, phi)
    return U @ rho @ U.conj().T


def ramsey_delta(rho0, theta, delay_ps, phi, dec: DecoherenceParams):
    """Two delta pulses separated by ``delay_ps``; returns the final states."""
    delay_ps, phi = np.broadcast_arrays(np.asarray(delay_ps, float), np.asarray(phi, float))
    rho1 = delta_pulse(np.asarray(rho0, complex), theta)
    rho2 = free_evolve(rho1, delay_ps, dec)
    out = np.empty_like(rho2)
    for idx in np.ndindex(delay_ps.shape):
        out[idx] = delta_pulse(rho2[idx], theta, phi[idx])
    return out


def simulate_ramsey(coarse_grid, fine_grid, dec: DecoherenceParams, counts: CountModel,
                    theta=math.pi / 2, lambda_qd=LAMBDA_QD_NM, fwhm=3.0, dt=None,
                    rho0=None, noise=True, threads=None, pulse_model="gaussian"):
    """Two equal pulses per (coarse ps, fine fs) delay point.

    ``pulse_model='delta'`` replaces the Gaussian pulses by instantaneous
    rotations (analytic limit).
    """
    coarse = _ascending("coarse grid", coarse_grid)
    fine = _ascending("fine grid", fine_grid)
    if np.any(coarse < MIN_GAP_FWHM * fwhm):
        raise OverlapError(
            f"coarse delays below {MIN_GAP_FWHM} x fwhm = {MIN_GAP_FWHM * fwhm} ps "
            "let the pulses interfere optically"
        )
    dt = _resolve_dt(dt, fwhm)
    rho0 = randomized_ground_state() if rho0 is None else np.asarray(rho0, complex)
    check_state(rho0)
    delay = coarse[:, None] + 1e-3 * fine[None, :]
    phase = carrier_phase(1e3 * coarse[:, None] + fine[None, :], lambda_qd)
    if pulse_model == "delta":
        rho = ramsey_delta(rho0, theta, delay, phase, dec)
    elif pulse_model == "gaussian":
        S = pulse_channel([theta], fwhm, dec, dt)[0]
        rho = _two_pulse(S, S, rho0, delay, phase, fwhm, dec)
        for i, j in zip(*np.nonzero(_windows_overlap(delay, fwhm))):
            rho[i, j] = _evolve_pair(rho0, theta, delay[i, j], phase[i, j], fwhm, dec, dt)
    else:
        raise DomainError(f"unknown pulse model {pulse_model!r}")
    pop = rho[..., 2, 2].real.copy()
    expected = counts.expected(pop, dec.branching_eta)
    sampled = sample_counts(expected, counts.rng_seed, "ramsey", threads) if noise else None
    return RamseyData(coarse, fine, phase, pop, expected, sampled, state_diagnostics(rho))


def acquisition_timestamps(n_power, n_fine, integration_time, start=0.0):
    """Column-major acquisition: every fine delay for one power, then the next."""
    order = np.arange(n_power * n_fine, dtype=float).reshape(n_power, n_fine)
    return start + order * integration_time


def drift_delay_fs(drift, timestamps):
    """Delay added by the interferometer drift at each timestamp (fs)."""
    ts = np.asarray(timestamps, dtype=float)
    t_d = np.asarray(drift.timestamps, dtype=float)
    if ts.min() < t_d[0] or ts.max() > t_d[-1]:
        raise CoverageError(
            f"drift trace spans [{t_d[0]}, {t_d[-1]}] s but acquisition needs "
            f"[{ts.min()}, {ts.max()}] s"
        )
    return np.interp(ts, t_d, np.asarray(drift.path_drift, dtype=float)) / C_NM_PER_FS


def simulate_su2_map(sqrt_power, fine_grid, kappa, dec: DecoherenceParams, counts: CountModel,
                     coarse=66.0, lambda_qd=LAMBDA_QD_NM, drift=None, fwhm=3.0, dt=None,
                     rho0=None, noise=True, start_time=0.0, threads=None):
    """Two equal-area pulses over a (power, fine delay) grid, optionally with
    the realized delay perturbed by a path-length drift trace."""
    sqrt_power = _ascending("sqrt_power grid", sqrt_power)
    fine = _ascending("fine grid", fine_grid)
    if np.any(sqrt_power < 0) or not kappa > 0:
        raise DomainError("need sqrt_power >= 0 and kappa > 0")
    if coarse < MIN_GAP_FWHM * fwhm:
        raise OverlapError(f"coarse delay {coarse} ps below {MIN_GAP_FWHM} x fwhm")
    dt = _resolve_dt(dt, fwhm)
    rho0 = randomized_ground_state() if rho0 is None else np.asarray(rho0, complex)
    check_state(rho0)
    theta = kappa * sqrt_power
    n_p, n_f = theta.size, fine.size
    ts = acquisition_timestamps(n_p, n_f, counts.integration_time, start_time)
    realized = np.broadcast_to(fine, (n_p, n_f)).copy()
    if drift is not None:
        realized = realized + drift_delay_fs(drift, ts)
    delay = coarse + 1e-3 * realized
    phase = carrier_phase(1e3 * coarse + realized, lambda_qd)

    def work(a, b):
        S = pulse_channel(theta[a:b], fwhm, dec, dt)
        rho = _two_pulse(S[:, None], S[:, None], rho0, delay[a:b], phase[a:b], fwhm, dec)
        for i, j in zip(*np.nonzero(_windows_overlap(delay[a:b], fwhm))):
            rho[i, j] = _evolve_pair(rho0, theta[a + i], delay[a + i, j], phase[a + i, j],
                                     fwhm, dec, dt)
        return rho

    rho = chunked(work, n_p, threads)
    pop = rho[..., 2, 2].real.copy()
    power = np.broadcast_to((sqrt_power**2)[:, None], pop.shape)
    expected = counts.expected(pop, dec.branching_eta, power=power)
    sampled = sample_counts(expected, counts.rng_seed, "su2", threads) if noise else None
    return Su2Data(sqrt_power, fine, theta, coarse, realized, phase, ts, pop, expected,
                   sampled, state_diagnostics(rho))
