"""Config-driven dataset generation and analysis, shared by the CLI and
:func:`reproduce`."""

from __future__ import annotations

import math

import numpy as np

from .. import levels as lv
from ..analysis import (
    fit_rabi,
    fit_ramsey_t2star,
    fit_zeeman_fan,
    polarimetry_extract,
    polarimetry_simulate,
    subtract_background,
)
from ..analysis.polarimetry import StokesVector
from ..dynamics import (
    CountModel,
    DecoherenceParams,
    simulate_background_control,
    simulate_rabi,
    simulate_ramsey,
    simulate_su2_map,
)
from ..dynamics.counts import STREAMS, point_rng
from ..errors import SchemaError
from ..interferometer import (
    DelaySchedule,
    DriftTrace,
    HeNeTrace,
    correct_su2_map,
    generate_drift,
    hene_wrapped_phase,
)
from .config import ExperimentConfig
from .io import Dataset


def magneto(cfg: ExperimentConfig) -> lv.MagnetoParams:
    L = cfg.levels
    return lv.MagnetoParams(L.E0, L.gamma, L.g_e, L.g_h)


def decoherence(cfg: ExperimentConfig) -> DecoherenceParams:
    d = cfg.decoherence
    return DecoherenceParams.from_t2star(d.t2star, d.t1, d.branching_eta, d.eid_coeff)


def count_model(cfg: ExperimentConfig) -> CountModel:
    c = cfg.counts
    return CountModel(c.rep_rate, c.integration_time, c.efficiency, c.background_rate,
                      cfg.seed, c.power_background)


def noisy(expected, sampled, scale):
    """Interpolate between the expected counts (scale 0) and the Poisson draw (1)."""
    if sampled is None or scale == 0:
        return np.array(expected, dtype=float)
    return expected + scale * (sampled - expected)


def _meta(cfg, **extra):
    return {"config_hash": cfg.hash, "seed": cfg.seed, **extra}


def _gaussian(cfg, stream, shape, index_offset=0):
    """Standard normal draws, one counter-based substream per element."""
    tag = STREAMS[stream]
    n = int(np.prod(shape))
    return np.array(
        [point_rng(cfg.seed, tag, index_offset + i).standard_normal() for i in range(n)]
    ).reshape(shape)


# -- spectra ------------------------------------------------------------------

def spectrum_lines(cfg, B):
    p = magneto(cfg)
    lines = lv.transition_energies(p, B)
    mixing = lv.hole_mixing(cfg.levels.chi)
    lines = lv.with_polarizations(lines, mixing, cfg.levels.docp)
    try:
        lines = lv.assign_roles(lines)
    except lv.DegenerateLinesError:
        pass
    return lines


def spectrum_dataset(cfg: ExperimentConfig, B=None) -> Dataset:
    """Four lines at one field, or a noisy fan over ``[0, b_max]`` when ``B`` is None."""
    if B is not None:
        fields, noise = np.array([float(B)]), 0.0
    else:
        fields = np.linspace(0.0, cfg.levels.b_max, cfg.levels.n_fields)
        noise = cfg.levels.energy_noise * cfg.counts.noise_scale
    rows = []
    for b in fields:
        for ln in spectrum_lines(cfg, b):
            rows.append((b, ln.s_e, ln.s_h, ln.energy, ln.energy - cfg.levels.E0, *ln.stokes,
                         ln.role.value))
    cols = list(zip(*rows))
    energy = np.array(cols[3], dtype=float)
    if noise:
        energy = energy + noise * _gaussian(cfg, "zeeman", energy.shape)
    names = ["B_T", "s_e", "s_h", "energy_ueV", "offset_ueV", "S0", "S1", "S2", "S3", "role"]
    data = dict(zip(names, [np.array(c) for c in cols]))
    data["energy_ueV"] = energy
    data["offset_ueV"] = energy - cfg.levels.E0
    data["s_e"] = data["s_e"].astype(int)
    data["s_h"] = data["s_h"].astype(int)
    return Dataset("Spectrum", data, _meta(cfg, energy_noise_ueV=noise))


def fit_zeeman_dataset(ds: Dataset) -> dict:
    B = ds["B_T"]
    fields = np.unique(B)
    E = np.array([np.sort(ds["energy_ueV"][B == b]) for b in fields])
    rep = fit_zeeman_fan(fields, E)
    return {"kind": "ZeemanFit", **rep.to_dict()}


# -- Rabi ---------------------------------------------------------------------

def rabi_dataset(cfg: ExperimentConfig) -> Dataset:
    R = cfg.rabi
    x = np.linspace(0.0, R.sqrtp_max, R.n_points)
    dec, cm = decoherence(cfg), count_model(cfg)
    kw = dict(fwhm=cfg.pulse.fwhm, dt=cfg.pulse.dt)
    sig = simulate_rabi(x, cfg.pulse.kappa, dec, cm, **kw)
    bg = simulate_background_control(x, cfg.pulse.kappa, dec, cm, leakage=R.leakage, **kw)
    s = cfg.counts.noise_scale
    cols = {
        "sqrtP_uW12": x,
        "theta_rad": sig.theta,
        "trion_population": sig.population,
        "expected_counts": sig.expected,
        "counts": noisy(sig.expected, sig.counts, s),
        "background_expected": bg.expected,
        "background_counts": noisy(bg.expected, bg.counts, s),
    }
    return Dataset("Rabi", cols, _meta(cfg, kappa_true=cfg.pulse.kappa,
                                       diagnostics=sig.diagnostics))


def fit_rabi_dataset(ds: Dataset) -> dict:
    sub = subtract_background(ds["sqrtP_uW12"], ds["counts"], ds["sqrtP_uW12"],
                              ds["background_counts"])
    rep = fit_rabi(sub.x, sub.y)
    out = {"kind": "RabiFit", **rep.to_dict()}
    out["n_negative_after_subtraction"] = int(sub.negative.sum())
    return out


# -- Ramsey -------------------------------------------------------------------

def ramsey_schedule(cfg) -> DelaySchedule:
    r = cfg.ramsey
    return DelaySchedule(r.coarse_start, r.coarse_step, r.n_coarse, r.fine_span, r.n_fine)


def ramsey_dataset(cfg: ExperimentConfig) -> Dataset:
    sch = ramsey_schedule(cfg)
    data = simulate_ramsey(sch.coarse, sch.fine, decoherence(cfg), count_model(cfg),
                           theta=cfg.ramsey.theta, lambda_qd=cfg.interferometer.lambda_qd,
                           fwhm=cfg.pulse.fwhm, dt=cfg.pulse.dt)
    counts = noisy(data.expected, data.counts, cfg.counts.noise_scale)
    cc, ff = np.meshgrid(sch.coarse, sch.fine, indexing="ij")
    cols = {
        "coarse_delay_ps": cc.ravel(),
        "fine_delay_fs": ff.ravel(),
        "phase_rad": data.phase.ravel(),
        "expected_counts": data.expected.ravel(),
        "counts": counts.ravel(),
    }
    return Dataset("Ramsey", cols, _meta(cfg, t2star_true=cfg.decoherence.t2star,
                                         shape=[sch.n_coarse, sch.n_fine],
                                         diagnostics=data.diagnostics))


def _grid(ds, row_key, col_key, value_key):
    rows, cols = np.unique(ds[row_key]), np.unique(ds[col_key])
    if rows.size * cols.size != len(ds):
        raise SchemaError("dataset is not a complete rectangular grid")
    order = np.lexsort((ds[col_key], ds[row_key]))
    return rows, cols, np.asarray(ds[value_key], dtype=float)[order].reshape(rows.size, cols.size)


def fit_ramsey_dataset(ds: Dataset, normalization="reference") -> dict:
    coarse, fine, counts = _grid(ds, "coarse_delay_ps", "fine_delay_fs", "counts")
    rep, contrast, fringes = fit_ramsey_t2star(coarse, fine, counts, normalization)
    out = {"kind": "RamseyFit", **rep.to_dict()}
    out["contrast"] = contrast.tolist()
    out["coarse_delay_ps"] = coarse.tolist()
    out["fringe_period_fs"] = [f.params["period"] for f in fringes]
    return out


# -- SU(2) map and drift ------------------------------------------------------

def su2_axes(cfg):
    s = cfg.su2
    return np.linspace(0.0, s.sqrtp_max, s.n_power), np.linspace(0.0, s.fine_span, s.n_fine)


def acquisition_duration(cfg):
    return cfg.su2.n_power * cfg.su2.n_fine * cfg.counts.integration_time


def drift_trace(cfg) -> DriftTrace:
    I = cfg.interferometer
    return generate_drift(acquisition_duration(cfg), I.hene_samples, I.drift_sigma_rw,
                          I.drift_linear, cfg.seed)


def su2_run(cfg: ExperimentConfig, drift=None):
    x, fine = su2_axes(cfg)
    return simulate_su2_map(x, fine, cfg.pulse.kappa, decoherence(cfg), count_model(cfg),
                            coarse=cfg.su2.coarse, lambda_qd=cfg.interferometer.lambda_qd,
                            drift=drift, fwhm=cfg.pulse.fwhm, dt=cfg.pulse.dt)


def su2_dataset(cfg, data, counts=None, **extra) -> Dataset:
    n_p, n_f = data.expected.shape
    counts = noisy(data.expected, data.counts, cfg.counts.noise_scale) if counts is None else counts
    cols = {
        "sqrtP_uW12": np.repeat(data.sqrt_power, n_f),
        "fine_delay_fs": np.tile(data.fine, n_p),
        "counts": np.asarray(counts, float).ravel(),
        "timestamp_s": data.timestamps.ravel(),
        "expected_counts": data.expected.ravel(),
    }
    return Dataset("Su2Map", cols, _meta(cfg, coarse_delay_ps=data.coarse, shape=[n_p, n_f],
                                         **extra))


def hene_datasets(cfg, drift: DriftTrace):
    I = cfg.interferometer
    hene = hene_wrapped_phase(drift, I.lambda_hene, I.hene_sign)
    h = Dataset("HeNe", {"timestamp_s": hene.timestamps, "wrapped_phase_rad": hene.wrapped_phase},
                _meta(cfg, lambda_hene_nm=I.lambda_hene, sign=I.hene_sign))
    d = Dataset("Drift", {"timestamp_s": drift.timestamps, "path_drift_nm": drift.path_drift},
                _meta(cfg))
    return h, d


def correct_dataset(cfg, su2: Dataset, hene: Dataset) -> Dataset:
    x, fine, counts = _grid(su2, "sqrtP_uW12", "fine_delay_fs", "counts")
    _, _, ts = _grid(su2, "sqrtP_uW12", "fine_delay_fs", "timestamp_s")
    trace = HeNeTrace(hene["timestamp_s"], hene["wrapped_phase_rad"])
    sign = int(hene.metadata.get("sign", cfg.interferometer.hene_sign))
    lam = float(hene.metadata.get("lambda_hene_nm", cfg.interferometer.lambda_hene))
    corrected, _ = correct_su2_map(counts, ts, fine, trace, lambda_hene=lam, sign=sign)
    cols = {
        "sqrtP_uW12": np.repeat(x, fine.size),
        "fine_delay_fs": np.tile(fine, x.size),
        "counts": corrected.ravel(),
        "timestamp_s": ts.ravel(),
    }
    meta = {k: v for k, v in su2.metadata.items() if k != "drift"}
    meta["corrected"] = True
    return Dataset("Su2Map", cols, meta)


# -- polarimetry --------------------------------------------------------------

def polarimetry_dataset(cfg: ExperimentConfig) -> Dataset:
    P = cfg.polarimetry
    alphas = np.arange(P.n_angles) * (2 * math.pi / P.n_angles)
    lines = spectrum_lines(cfg, cfg.levels.B)
    rows_line, rows_a, rows_i = [], [], []
    noise = P.intensity_noise * cfg.counts.noise_scale
    for k, ln in enumerate(lines):
        I = polarimetry_simulate(StokesVector(*ln.stokes), alphas)
        if noise:
            I = I * (1 + noise * _gaussian(cfg, "polarimetry", I.shape, k * P.n_angles))
        rows_line.append(np.full(alphas.size, k))
        rows_a.append(alphas)
        rows_i.append(I)
    cols = {"line": np.concatenate(rows_line), "alpha_rad": np.concatenate(rows_a),
            "intensity": np.concatenate(rows_i)}
    return Dataset("Polarimetry", cols, _meta(cfg, B_T=cfg.levels.B, docp_true=cfg.levels.docp))


def fit_polarimetry_dataset(ds: Dataset) -> dict:
    out = {"kind": "PolarimetryFit", "lines": []}
    for k in np.unique(ds["line"]):
        m = ds["line"] == k
        S, docp = polarimetry_extract(ds["alpha_rad"][m], ds["intensity"][m])
        out["lines"].append({"line": int(k), "stokes": S.as_array().tolist(), "docp": docp})
    out["min_docp"] = min(l["docp"] for l in out["lines"])
    return out
