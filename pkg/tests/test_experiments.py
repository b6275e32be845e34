import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdsim.analysis.maps import su2_ideal_map
from qdsim.constants import fringe_period_fs
from qdsim.dynamics import CountModel, DecoherenceParams
from qdsim.dynamics.counts import sample_counts
from qdsim.dynamics.experiments import (
    acquisition_timestamps,
    carrier_phase,
    ramsey_delta,
    simulate_background_control,
    simulate_rabi,
    simulate_ramsey,
    simulate_su2_map,
)
from qdsim.dynamics.master import ground_state
from qdsim.errors import CoverageError, OverlapError
from qdsim.interferometer import DriftTrace

KAPPA = 4 * math.pi / 2.5
CM = CountModel()
OFF = DecoherenceParams.off()
X = np.linspace(0, 2.5, 41)


def test_carrier_phase_period():
    assert fringe_period_fs(880.0) == pytest.approx(2.9354, abs=1e-4)
    assert carrier_phase(fringe_period_fs(880.0)) == pytest.approx(0.0, abs=1e-9) or \
        carrier_phase(fringe_period_fs(880.0)) == pytest.approx(2 * math.pi, abs=1e-9)
    assert carrier_phase(fringe_period_fs(880.0) / 4) == pytest.approx(math.pi / 2, abs=1e-12)


def test_rabi_zero_power_is_background():
    r = simulate_rabi(X, KAPPA, DecoherenceParams(), CM, noise=False)
    assert r.expected[0] == pytest.approx(CM.background_rate * CM.integration_time, rel=1e-12)


def test_rabi_ideal_limit_extrema():
    theta = np.linspace(0, 4 * math.pi, 161)
    r = simulate_rabi(theta / KAPPA, KAPPA, OFF, CM, fwhm=0.03, dt=0.03 / 100,
                      rho0=ground_state(), noise=False)
    assert np.abs(r.population - np.sin(theta / 2) ** 2).max() < 1e-4
    y = r.expected
    for k in (1, 3):
        assert np.argmax(np.where(np.abs(theta - k * math.pi) < 1, y, -1)) == 40 * k
    for k in (2, 4):
        assert np.argmin(np.where(np.abs(theta - k * math.pi) < 1, y, np.inf)) == 40 * k


def test_rabi_eid_minimum_finite():
    r = simulate_rabi(X, KAPPA, DecoherenceParams(), CM, noise=False)
    i2 = np.argmin(np.abs(r.theta - 2 * math.pi))
    near = slice(i2 - 3, i2 + 4)
    assert r.expected[near].min() > r.expected[0]
    i1, i3 = (np.argmin(np.abs(r.theta - k * math.pi)) for k in (1, 3))
    assert r.population[i1 - 2:i1 + 3].max() > r.population[i3 - 2:i3 + 3].max()


def test_background_control_ideal():
    b = simulate_background_control(X, KAPPA, OFF, CM, noise=False)
    assert np.allclose(b.expected, CM.background_rate * CM.integration_time, rtol=1e-12)


def test_background_leakage_linear():
    full = simulate_rabi(np.array([0.625]), KAPPA, OFF, CM, rho0=ground_state(), noise=False)
    leak = simulate_background_control(np.array([0.625]), KAPPA, OFF, CM, leakage=0.01,
                                       noise=False)
    bg = CM.background_rate * CM.integration_time
    assert leak.expected[0] - bg == pytest.approx(0.01 * (full.expected[0] - bg), rel=1e-9)


def test_background_subtraction_recovers_half_pure_curve():
    dec = DecoherenceParams()
    mixed = simulate_rabi(X, KAPPA, dec, CM, noise=False)
    pure = simulate_rabi(X, KAPPA, dec, CM, rho0=ground_state(), noise=False)
    bg = simulate_background_control(X, KAPPA, dec, CM, noise=False)
    bg0 = CM.background_rate * CM.integration_time
    # the undriven half of the mixture is exactly the background control run
    assert np.allclose(mixed.expected - bg.expected, 0.5 * (pure.expected - bg0), atol=1e-9 * bg0)


def test_ramsey_delta_bloch_formula():
    t2 = 51.0
    dec = DecoherenceParams(math.inf, 0.5, 1 / t2, 0.0)
    tau = np.linspace(0, 200, 21)[:, None]
    phi = np.linspace(0, 2 * math.pi, 13)[None, :]
    rho = ramsey_delta(ground_state(), math.pi / 2, tau, phi, dec)
    want = 0.5 * (1 + np.exp(-tau / t2) * np.cos(phi))
    assert np.abs(rho[..., 2, 2].real - want).max() < 1e-12
    assert math.exp(-66.7 / 51) == pytest.approx(0.27040, abs=1e-5)


def test_ramsey_delta_destructive_return():
    rho = ramsey_delta(ground_state(), math.pi / 2, 0.0, math.pi, OFF)
    assert rho[2, 2].real == pytest.approx(0.0, abs=1e-15)


def test_ramsey_gaussian_vs_delta_fringe():
    """Finite pulses follow the delta-pulse fringe up to dephasing during the
    pulses (order gamma * fwhm)."""
    dec = DecoherenceParams(math.inf, 0.5, 1 / 51, 0.0)
    coarse, fine = np.array([66.7, 100.0]), np.linspace(0, 12, 25)
    g = simulate_ramsey(coarse, fine, dec, CM, rho0=ground_state(), noise=False)
    d = simulate_ramsey(coarse, fine, dec, CM, rho0=ground_state(), noise=False,
                        pulse_model="delta")
    assert np.abs(g.population - d.population).max() < 0.01


def test_ramsey_rejects_overlap():
    with pytest.raises(OverlapError):
        simulate_ramsey(np.array([10.0]), np.linspace(0, 12, 16), DecoherenceParams(), CM)


def test_su2_ideal_map():
    x, fine = np.linspace(0, 2.5, 16), np.linspace(0, 12, 32)
    d = simulate_su2_map(x, fine, KAPPA, OFF, CM, rho0=ground_state(), noise=False)
    ideal = su2_ideal_map(d.theta[:, None], d.phase)
    assert np.sqrt(np.mean((d.population - ideal) ** 2)) < 1e-3
    # theta = pi rows sit at background for every phase
    x_pi = np.array([math.pi / KAPPA])
    row = simulate_su2_map(x_pi, fine, KAPPA, OFF, CM, rho0=ground_state(), noise=False)
    assert np.abs(row.population).max() < 1e-6


def test_su2_global_maximum_at_half_pi_in_phase():
    x = np.array([math.pi / 2 / KAPPA, math.pi / KAPPA / 1.3])
    period = fringe_period_fs(880.0)
    # fine delays that put the carrier phase exactly at 0 relative to 66 ps
    start = (-66000.0) % period
    fine = start + np.linspace(0, 3 * period, 49)
    d = simulate_su2_map(x, fine, KAPPA, OFF, CM, rho0=ground_state(), noise=False)
    i, j = np.unravel_index(np.argmax(d.population), d.population.shape)
    assert i == 0 and min(d.phase[i, j], 2 * math.pi - d.phase[i, j]) < 1e-6
    assert d.population[i, j] == pytest.approx(1.0, abs=1e-6)


def test_acquisition_order_and_drift_coverage():
    ts = acquisition_timestamps(3, 4, 2.0)
    assert ts[0].tolist() == [0, 2, 4, 6] and ts[1, 0] == 8
    short = DriftTrace(np.linspace(0, 5, 6), np.zeros(6), 0)
    with pytest.raises(CoverageError):
        simulate_su2_map(X[:3], np.linspace(0, 12, 4), KAPPA, OFF, CountModel(integration_time=2.0),
                         drift=short)


def test_su2_constant_drift_equals_shifted_grid():
    fine = np.linspace(0, 12, 17)
    trace = DriftTrace(np.array([0.0, 1e6]), np.full(2, 1.5 * 299.792458), 0)  # 1.5 fs
    a = simulate_su2_map(X[:4], fine, KAPPA, DecoherenceParams(), CM, drift=trace, noise=False)
    b = simulate_su2_map(X[:4], fine + 1.5, KAPPA, DecoherenceParams(), CM, noise=False)
    assert np.abs(a.population - b.population).max() < 1e-12


def test_threads_do_not_change_results():
    a = simulate_su2_map(X[:9], np.linspace(0, 12, 8), KAPPA, DecoherenceParams(), CM, threads=1)
    b = simulate_su2_map(X[:9], np.linspace(0, 12, 8), KAPPA, DecoherenceParams(), CM, threads=4)
    assert np.array_equal(a.population, b.population)
    assert np.array_equal(a.counts, b.counts)


@settings(max_examples=10, deadline=None)
@given(phi0=st.floats(0.1, 2 * math.pi - 0.1))
def test_ramsey_fringe_symmetric_in_phase(phi0):
    """P(phi) = P(-phi) for a diagonal initial state."""
    dec = DecoherenceParams()
    a = ramsey_delta(ground_state(), math.pi / 2, 66.7, phi0, dec)[2, 2].real
    b = ramsey_delta(ground_state(), math.pi / 2, 66.7, -phi0, dec)[2, 2].real
    assert a == pytest.approx(b, abs=1e-14)
