from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import GridError


@dataclass
class BackgroundSubtracted:
    x: np.ndarray
    y: np.ndarray
    negative: np.ndarray  # y < 0, kept as is
    boundary: np.ndarray  # y == 0


def subtract_background(x_signal, y_signal, x_background, y_background) -> BackgroundSubtracted:
    """Pointwise signal - background on identical abscissae; no clamping."""
    xs, xb = np.asarray(x_signal, float), np.asarray(x_background, float)
    if xs.shape != xb.shape or not np.array_equal(xs, xb):
        raise GridError("signal and background abscissae differ")
    y = np.asarray(y_signal, float) - np.asarray(y_background, float)
    return BackgroundSubtracted(xs, y, y < 0, y == 0)
