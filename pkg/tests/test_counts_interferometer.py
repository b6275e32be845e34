import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdsim.analysis.background import subtract_background
from qdsim.analysis.maps import su2_ideal_map
from qdsim.constants import C_NM_PER_FS, fringe_period_fs
from qdsim.dynamics import CountModel, DecoherenceParams
from qdsim.dynamics.counts import point_rng, sample_counts
from qdsim.dynamics.experiments import carrier_phase, simulate_su2_map
from qdsim.errors import CoverageError, DomainError, GridError
from qdsim.interferometer import (
    DelaySchedule,
    DriftTrace,
    HeNeTrace,
    correct_su2_map,
    drift_to_delay,
    generate_drift,
    hene_wrapped_phase,
    qd_phase_from_hene,
    unwrap_phase,
    wrap_phase,
)

# -- counts --------------------------------------------------------------------


def test_count_model_linear():
    cm = CountModel()
    bg = cm.background_rate * cm.integration_time
    assert cm.expected(0.0, 0.5) == pytest.approx(bg)
    assert cm.expected(0.4, 0.5) - bg == pytest.approx(2 * (cm.expected(0.2, 0.5) - bg))
    assert cm.signal_scale == pytest.approx(80e6 * cm.integration_time * 0.002)


def test_point_substreams_independent_of_grid_shape():
    lam = np.linspace(10, 1000, 60)
    a = sample_counts(lam, 3, "ramsey")
    b = sample_counts(lam.reshape(6, 10), 3, "ramsey").ravel()
    c = sample_counts(lam, 3, "ramsey", threads=5)
    assert np.array_equal(a, b) and np.array_equal(a, c)
    assert a[17] == point_rng(3, 3, 17).poisson(lam[17])
    assert not np.array_equal(a, sample_counts(lam, 3, "su2"))
    assert not np.array_equal(a, sample_counts(lam, 4, "ramsey"))


def test_poisson_moments():
    lam = np.full(20000, 250.0)
    x = sample_counts(lam, 11, "rabi")
    assert x.mean() == pytest.approx(250, abs=4 * math.sqrt(250 / x.size))
    assert x.var() == pytest.approx(250, rel=0.05)


def test_subtraction_variance_adds():
    """Var(signal - background) = Var(signal) + Var(background) over 200 seeds."""
    s_lam, b_lam = np.full(50, 400.0), np.full(50, 150.0)
    x = np.arange(50.0)
    diffs = []
    for seed in range(200):
        sub = subtract_background(x, sample_counts(s_lam, seed, "rabi"),
                                  x, sample_counts(b_lam, seed, "background"))
        diffs.append(sub.y)
    var = np.var(np.array(diffs), axis=0, ddof=1).mean()
    assert var == pytest.approx(550.0, rel=0.05)


def test_subtraction_flags_and_grid():
    x = np.arange(5.0)
    sub = subtract_background(x, np.ones(5), x, np.ones(5))
    assert np.array_equal(sub.y, np.zeros(5)) and sub.boundary.all() and not sub.negative.any()
    sub = subtract_background(x, np.zeros(5), x, np.ones(5))
    assert sub.negative.all() and (sub.y == -1).all()
    with pytest.raises(GridError):
        subtract_background(x, x, x + 1, x)


# -- delay schedule and drift -------------------------------------------------


def test_delay_schedule():
    s = DelaySchedule()
    assert s.coarse[0] == 66.7 and s.coarse[-1] == pytest.approx(66.7 + 20 * 3.33)
    assert s.fine[-1] == 12.0 and s.fine.size == 48
    with pytest.raises(DomainError):
        DelaySchedule(n_fine=1)


def test_drift_generation():
    still = generate_drift(14400, 101, 0.0, 0.0, seed=1)
    assert not still.path_drift.any()
    ramp = generate_drift(14400, 101, 0.0, 0.05, seed=1)
    assert ramp.path_drift[-1] == pytest.approx(720.0, rel=1e-12)
    a, b = generate_drift(100, 50, 0.5, 0.1, 9), generate_drift(100, 50, 0.5, 0.1, 9)
    assert np.array_equal(a.path_drift, b.path_drift)


@pytest.mark.parametrize("dl,phi", [(0.0, 0.0), (632.8, 0.0), (158.2, math.pi / 2)])
def test_hene_phase(dl, phi):
    tr = DriftTrace(np.array([0.0, 1.0]), np.array([0.0, dl]))
    got = hene_wrapped_phase(tr).wrapped_phase[1]
    assert got == pytest.approx(phi, abs=1e-12)


def test_unwrap_examples():
    assert np.array_equal(unwrap_phase(np.full(7, 1.2)), np.full(7, 1.2))
    assert unwrap_phase(np.array([3.0, -3.0])) == pytest.approx([3.0, 3.2832], abs=1e-4)
    ramp = np.linspace(0, 6 * math.pi, 100)
    assert np.abs(unwrap_phase(wrap_phase(ramp)) - ramp).max() < 1e-12


def test_wrap_range():
    x = np.array([-math.pi, math.pi, 3 * math.pi, -3 * math.pi + 1e-9, 0.0])
    w = wrap_phase(x)
    assert np.all(w > -math.pi) and np.all(w <= math.pi)


@settings(max_examples=100)
@given(st.lists(st.floats(-3.0, 3.0), min_size=1, max_size=400),
       st.floats(-math.pi, math.pi, exclude_min=True))
def test_unwrap_round_trip(steps, start):
    x = start + np.concatenate([[0.0], np.cumsum(steps)])
    assert np.abs(unwrap_phase(wrap_phase(x)) - x).max() < 1e-12


@settings(max_examples=50)
@given(st.lists(st.floats(-3.0, 3.0), min_size=2, max_size=200))
def test_unwrap_agrees_with_numpy(steps):
    x = np.concatenate([[0.0], np.cumsum(steps)])
    w = wrap_phase(x)
    assert np.allclose(unwrap_phase(w), np.unwrap(w), atol=1e-9)


def test_phase_to_delay():
    assert drift_to_delay(2 * math.pi) == pytest.approx(632.8 / C_NM_PER_FS, rel=1e-15)
    assert drift_to_delay(2 * math.pi) == pytest.approx(2.1108, abs=1e-4)
    assert drift_to_delay(0.0) == 0.0
    assert qd_phase_from_hene(1.0, 880.0) == pytest.approx(0.7191, abs=1e-4)


def test_hene_coverage():
    hene = HeNeTrace(np.array([1.0, 2.0]), np.zeros(2))
    with pytest.raises(CoverageError):
        correct_su2_map(np.zeros((1, 3)), np.array([[0.5, 1.0, 1.5]]), np.arange(3.0), hene)


# -- correction ---------------------------------------------------------------

KAPPA = 4 * math.pi / 2.5


def _maps(drift, dec, n_p=16, n_f=64):
    x, fine = np.linspace(0, 2.5, n_p), np.linspace(0, 12, n_f)
    cm = CountModel(integration_time=14400 / (n_p * n_f))
    clean = simulate_su2_map(x, fine, KAPPA, dec, cm, noise=False)
    drifted = simulate_su2_map(x, fine, KAPPA, dec, cm, drift=drift, noise=False)
    return clean, drifted


def test_zero_drift_correction_is_identity():
    drift = generate_drift(14400, 1001)
    _, d = _maps(drift, DecoherenceParams(), 4, 16)
    out, realized = correct_su2_map(d.expected, d.timestamps, d.fine, hene_wrapped_phase(drift))
    assert np.array_equal(out, d.expected)
    assert np.array_equal(realized, np.broadcast_to(d.fine, realized.shape))


def test_linear_720nm_drift_round_trip():
    drift = generate_drift(14400, 14401, 0.0, 0.05)
    clean, d = _maps(drift, DecoherenceParams.off())
    out, _ = correct_su2_map(d.expected, d.timestamps, d.fine, hene_wrapped_phase(drift))
    ok = np.isfinite(out)
    amp = np.ptp(clean.expected)
    assert np.sqrt(np.mean((out[ok] - clean.expected[ok]) ** 2)) < 0.02 * amp
    assert np.sqrt(np.mean((d.expected - clean.expected) ** 2)) > 0.02 * amp


def test_one_qd_period_shift_is_invisible_on_periodic_map():
    """A drift of exactly one QD fringe period leaves the ideal map unchanged;
    the correction then reports the same values on a grid shifted by one period."""
    period = fringe_period_fs(880.0)
    fine = np.linspace(0, 12, 49)
    theta = np.linspace(0.2, 3.0, 5)[:, None]
    phi = carrier_phase(66000 + fine)[None, :]
    raw = su2_ideal_map(theta, carrier_phase(66000 + fine + period)[None, :])
    assert np.abs(raw - su2_ideal_map(theta, phi)).max() < 1e-9
    ts = np.tile(np.arange(fine.size, dtype=float), (5, 1)) + 1
    # ramp to one QD period of path length within the first second, then hold
    t = np.concatenate([np.linspace(0, 1, 101), [1e3]])
    path = np.minimum(t, 1.0) * period * C_NM_PER_FS
    hene = hene_wrapped_phase(DriftTrace(t, path))
    out, realized = correct_su2_map(raw, ts, fine, hene, target_axis=fine + period)
    assert np.allclose(realized, fine + period, atol=1e-9)
    assert np.allclose(out, raw, atol=1e-9)


def test_correction_never_rescales():
    ts = np.tile(np.arange(8.0), (2, 1))
    hene = hene_wrapped_phase(DriftTrace(np.array([0.0, 10.0]), np.array([0.0, 3000.0])))
    raw = np.arange(16.0).reshape(2, 8)
    out, _ = correct_su2_map(raw, ts, np.linspace(0, 12, 8), hene)
    ok = np.isfinite(out)
    assert out[ok].min() >= raw.min() and out[ok].max() <= raw.max()
    assert not ok.all()
