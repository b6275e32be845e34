"""Closed-form two-pulse map and lobe location."""

import numpy as np


def su2_ideal_map(theta, phi):
    """Excited population after R(theta, phi) R(theta, 0) from the ground state."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.sin(theta) ** 2 * np.cos(phi / 2) ** 2


def su2_maxima(values, rel_threshold=0.9):
    """Indices of 2-D local maxima (ties allowed) reaching ``rel_threshold`` of the
    global range (edges compared against their existing neighbours only)."""
    v = np.asarray(values, dtype=float)
    lo, hi = np.nanmin(v), np.nanmax(v)
    pad = np.pad(v, 1, constant_values=-np.inf)
    core = pad[1:-1, 1:-1]
    is_max = np.ones_like(v, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_max &= core >= pad[1 + di : pad.shape[0] - 1 + di, 1 + dj : pad.shape[1] - 1 + dj]
    is_max &= v >= lo + rel_threshold * (hi - lo)
    return np.argwhere(is_max)
