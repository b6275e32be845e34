"""Independent reference integrator: explicit Lindblad operators + scipy."""

import math

import numpy as np
from scipy.integrate import solve_ivp

from qdsim.dynamics.pulses import gaussian_envelope

G_M, G_P, T_M, T_P = range(4)


def ket_bra(i, j):
    op = np.zeros((4, 4), complex)
    op[i, j] = 1.0
    return op


def lindblad_reference(rho0, pulses, t1, eta, gamma_phi, eid, t_end, detuning=0.0):
    """Integrate d(rho)/dt = -i[H, rho] + sum_k D[L_k] rho over [t_start, t_end].

    ``pulses`` is a list of PulseSpec; the drive couples g- and t- only.
    """
    envs = [(gaussian_envelope(p), p.carrier_phase) for p in pulses]
    g1 = 0.0 if math.isinf(t1) else 1.0 / t1
    jumps = [
        math.sqrt(eta * g1) * ket_bra(G_P, T_M),
        math.sqrt(eta * g1) * ket_bra(G_M, T_P),
        math.sqrt((1 - eta) * g1) * ket_bra(G_M, T_M),
        math.sqrt((1 - eta) * g1) * ket_bra(G_P, T_P),
    ]
    proj = np.diag([0, 0, 1, 1]).astype(complex)

    def rhs(t, y):
        rho = y.reshape(4, 4)
        c = sum(f(t) * np.exp(-1j * phi) for f, phi in envs)
        H = np.zeros((4, 4), complex)
        H[G_M, T_M] = 0.5 * c
        H[T_M, G_M] = 0.5 * np.conj(c)
        H[T_M, T_M] = -detuning
        out = -1j * (H @ rho - rho @ H)
        rate = gamma_phi + eid * abs(c) ** 2
        ops = jumps + [math.sqrt(2 * rate) * proj]
        for L in ops:
            LdL = L.conj().T @ L
            out += L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL)
        return out.ravel()

    t0 = min(p.window[0] for p in pulses)
    sol = solve_ivp(rhs, (t0, t_end), np.asarray(rho0, complex).ravel(), method="DOP853",
                    rtol=1e-11, atol=1e-13,
                    max_step=min(p.sigma for p in pulses) / 4)
    return sol.y[:, -1].reshape(4, 4)
