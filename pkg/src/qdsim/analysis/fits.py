"""Curve fits: Ramsey fringes, contrast decay, Rabi curves, Zeeman fan."""

from __future__ import annotations

import math

import numpy as np

from ..constants import MU_B
from ..errors import DegenerateLinesError, DomainError, NoOscillationError, RankError
from .lsq import FitReport, least_squares

FOURIER_SNR_MIN = 3.0


# -- Ramsey fringes -----------------------------------------------------------

def fringe_model(tau, p):
    amplitude, period, phase, offset = p
    return offset + amplitude * np.cos(2 * np.pi * tau / period + phase)


def _dominant_frequency(tau, y, oversample=16):
    """Peak of the discrete Fourier amplitude and its SNR against the rest
    of the spectrum."""
    span = tau[-1] - tau[0]
    n = tau.size
    yc = y - y.mean()
    step = 1.0 / (span * oversample)
    freqs = np.arange(1, oversample * (n // 2) + 1) * step
    amps = np.abs(np.exp(-2j * np.pi * np.outer(freqs, tau)) @ yc)
    k = int(np.argmax(amps))
    f0 = freqs[k]
    bins = freqs[oversample - 1 :: oversample]
    far = np.abs(bins - f0) > 1.5 / span
    floor = np.abs(np.exp(-2j * np.pi * np.outer(bins[far], tau)) @ yc).mean() if far.any() else 0.0
    peak = amps[k]
    snr = math.inf if floor == 0 and peak > 0 else (peak / floor if floor > 0 else 0.0)
    phase = float(np.angle(np.exp(-2j * np.pi * f0 * tau) @ yc))
    return f0, snr, phase


def fit_fringe(tau, counts, sigma=None) -> FitReport:
    """Sinusoid fit of counts against fine delay.

    Returns ``amplitude``, ``period``, ``phase`` (at tau = 0) and ``offset``;
    ``derived['contrast']`` is amplitude / offset.
    """
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(counts, dtype=float)
    if tau.shape != y.shape or tau.size < 16:
        raise DomainError("need matching delay/count arrays with >= 16 points")
    ptp = float(y.max() - y.min())
    if ptp <= 1e-12 * max(abs(float(y.mean())), 1e-300):
        raise NoOscillationError("flat fringe data")
    f0, snr, phase0 = _dominant_frequency(tau, y)
    if snr < FOURIER_SNR_MIN:
        raise NoOscillationError(f"Fourier peak SNR {snr:.2f} below {FOURIER_SNR_MIN}")
    span = tau[-1] - tau[0]
    period0 = 1.0 / f0
    if span / period0 < 2 or (tau.size - 1) / (span / period0) < 8:
        raise DomainError("need >= 2 periods sampled at >= 8 points per period")
    init = [0.5 * ptp, period0, phase0, float(y.mean())]
    typical = [max(0.5 * ptp, 1e-12), period0, 1.0, max(abs(float(y.mean())), 1e-12)]
    rep = least_squares(fringe_model, init, tau, y, ["amplitude", "period", "phase", "offset"],
                        sigma=sigma, typical=typical, absolute_sigma=sigma is not None)
    if rep.params["amplitude"] < 0:
        rep.params["amplitude"] *= -1
        rep.params["phase"] += math.pi
    rep.params["phase"] = float(math.remainder(rep.params["phase"], 2 * math.pi))
    a, off = rep.params["amplitude"], rep.params["offset"]
    c = a / off
    rel = math.hypot(rep.sigmas["amplitude"] / a, rep.sigmas["offset"] / off) if a else math.inf
    rep.derived["contrast"] = c
    rep.derived["contrast_sigma"] = abs(c) * rel
    rep.derived["fourier_snr"] = snr
    return rep


def ramsey_contrasts(fine, counts, normalization="reference", sigma=None):
    """Fit every coarse-delay row of a Ramsey grid.

    ``normalization='offset'`` gives amplitude/offset per row.  The default
    ``'reference'`` divides every amplitude by the offset of the first row,
    which keeps the decay of the fringe amplitude alone: the offset itself
    drifts with population relaxation into the undriven ground state.
    """
    counts = np.asarray(counts, dtype=float)
    reports = [fit_fringe(fine, row, None if sigma is None else sigma[i])
               for i, row in enumerate(counts)]
    amps = np.array([r.params["amplitude"] for r in reports])
    amp_sig = np.array([r.sigmas["amplitude"] for r in reports])
    if normalization == "offset":
        contrast = np.array([r.derived["contrast"] for r in reports])
        c_sig = np.array([r.derived["contrast_sigma"] for r in reports])
    elif normalization == "reference":
        ref = reports[0].params["offset"]
        contrast, c_sig = amps / ref, amp_sig / ref
    else:
        raise DomainError(f"unknown normalization {normalization!r}")
    return contrast, c_sig, reports


# -- contrast decay -----------------------------------------------------------

def decay_model(tau, p):
    c0, rate = p
    return c0 * np.exp(-rate * tau)


def fit_contrast_decay(tau, contrast, sigma=None) -> FitReport:
    """Single-exponential fit ``C0 exp(-tau / T2*)``.

    Fitted internally in terms of the rate so non-decaying data stays finite;
    ``params['T2star']`` is ``inf`` and the ``non_decaying`` flag is raised
    when the best rate is not positive.
    """
    tau = np.asarray(tau, dtype=float)
    c = np.asarray(contrast, dtype=float)
    if tau.size < 4 or tau.shape != c.shape:
        raise DomainError("need >= 4 matching delay/contrast points")
    if np.any(c <= 0) or np.any(c > 1 + 1e-9):
        raise DomainError("contrasts must lie in (0, 1]")
    slope, icpt = np.polyfit(tau, np.log(c), 1)
    init = [math.exp(icpt), -slope]
    span = tau.max() - tau.min()
    rep = least_squares(decay_model, init, tau, c, ["C0", "rate"], sigma=sigma,
                        typical=[float(c.max()), 1.0 / span], absolute_sigma=sigma is not None)
    rate, rate_sig = rep.params["rate"], rep.sigmas["rate"]
    if rate * span <= 1e-9:
        rep.flags.append("non_decaying")
        t2, t2_sig = math.inf, math.inf
    else:
        t2, t2_sig = 1.0 / rate, rate_sig / rate**2
    rep.params["T2star"] = t2
    rep.sigmas["T2star"] = t2_sig
    return rep


def fit_ramsey_t2star(coarse, fine, counts, normalization="reference"):
    """Fringe fits per coarse delay followed by the contrast-decay fit."""
    contrast, c_sig, fringes = ramsey_contrasts(fine, counts, normalization)
    rep = fit_contrast_decay(coarse, contrast)
    rep.derived["n_fringes"] = len(fringes)
    return rep, contrast, fringes


# -- Rabi ---------------------------------------------------------------------

RABI_NAMES = ["kappa", "contrast", "damping", "offset", "slope"]


def rabi_model(sqrt_power, p):
    kappa, contrast, damping, offset, slope = p
    theta = kappa * sqrt_power
    return offset + slope * sqrt_power**2 + 0.5 * contrast * (
        1 - np.exp(-damping * theta**2) * np.cos(theta)
    )


def _first_maximum(x, y, noise):
    for i in range(1, y.size - 1):
        if y[i] >= y[i - 1] and y[i] >= y[i + 1] and y[i] - y[0] > 6 * noise:
            # must be the top of its neighbourhood, not a noise ripple on the rise
            lo, hi = max(0, i - 3), min(y.size, i + 4)
            if y[i] >= y[lo:hi].max():
                return i
    return None


def fit_rabi(sqrt_power, counts, sigma=None) -> FitReport:
    """Damped-oscillation fit of counts against the square root of power.

    Model: ``offset + slope P + C/2 (1 - exp(-d theta^2) cos theta)`` with
    ``theta = kappa sqrt(P)``; the exponential damping is phenomenological.
    """
    x = np.asarray(sqrt_power, dtype=float)
    y = np.asarray(counts, dtype=float)
    if x.shape != y.shape or x.size < 8:
        raise DomainError("need >= 8 matching points")
    noise = float(np.std(np.diff(y)) / math.sqrt(2))
    i_max = _first_maximum(x, y, noise)
    if i_max is None:
        rep = FitReport(
            params={"kappa": math.nan, "contrast": 0.0, "damping": math.nan,
                    "offset": float(y.mean()), "slope": 0.0},
            sigmas={k: math.nan for k in RABI_NAMES},
            residual_rms=float(np.std(y)),
            converged=False,
            n_iter=0,
            flags=["non_oscillating"],
        )
        return rep
    kappa0 = math.pi / x[i_max]
    if kappa0 * x.max() < 3 * math.pi:
        raise DomainError("Rabi grid must cover at least 1.5 oscillations")
    init = [kappa0, 2 * (y[i_max] - y[0]), 1e-3, y[0], 0.0]
    typical = [kappa0, abs(init[1]), 1e-2, max(abs(y[0]), 1.0), 1.0]
    rep = least_squares(rabi_model, init, x, y, RABI_NAMES, sigma=sigma, typical=typical,
                        absolute_sigma=sigma is not None)
    kappa = rep.params["kappa"]
    rep.derived["pi_sqrt_power"] = math.pi / kappa
    rep.derived["pi_power"] = (math.pi / kappa) ** 2
    if rep.params["contrast"] < 3 * rep.sigmas["contrast"]:
        rep.flags.append("non_oscillating")
    return rep


# -- Zeeman fan ---------------------------------------------------------------

# ascending order at positive field when g_h > g_e > 0
FAN_BRANCHES = ((-1, -1), (1, -1), (-1, 1), (1, 1))


def fan_design(B, mu_B=MU_B):
    B = np.asarray(B, dtype=float)
    rows = []
    for s_e, s_h in FAN_BRANCHES:
        rows.append(np.stack([np.ones_like(B), B**2, s_e * mu_B * B / 2, s_h * mu_B * B / 2], -1))
    return np.stack(rows, axis=1)  # (n_B, 4 lines, 4 params)


def fit_zeeman_fan(B, energies, mu_B=MU_B, eps=1e-9) -> FitReport:
    """Linear least squares for (E0, gamma, g_e, g_h) from line energies.

    ``energies`` is (n_fields, 4); lines are assigned to branches by their
    energy order at the highest field.
    """
    B = np.asarray(B, dtype=float)
    E = np.sort(np.asarray(energies, dtype=float), axis=1)
    if E.shape != (B.size, 4):
        raise DomainError("energies must be (n_fields, 4)")
    if np.unique(B).size < 3:
        raise RankError("need at least 3 distinct field values")
    top = E[np.argmax(B)]
    if np.any(np.diff(top) < eps):
        raise DegenerateLinesError("line order at the highest field is ambiguous")
    X = fan_design(B, mu_B).reshape(-1, 4)
    y = E.reshape(-1)
    A = X.T @ X
    beta = np.linalg.solve(A, X.T @ y)
    r = y - X @ beta
    dof = y.size - 4
    s2 = float(r @ r) / dof if dof > 0 else math.inf
    cov = s2 * np.linalg.inv(A)
    names = ["E0", "gamma", "g_e", "g_h"]
    flags = [] if beta[3] > beta[2] > 0 else ["branch_convention_violated"]
    return FitReport(
        params=dict(zip(names, map(float, beta))),
        sigmas=dict(zip(names, map(float, np.sqrt(np.diag(cov))))),
        residual_rms=float(np.sqrt(np.mean(r**2))),
        converged=True,
        n_iter=1,
        flags=flags,
        covariance=cov,
    )
