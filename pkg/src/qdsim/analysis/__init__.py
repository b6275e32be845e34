from .lsq import FitReport, least_squares, numeric_jacobian
from .fits import (
    fit_fringe,
    fit_contrast_decay,
    fit_rabi,
    fit_zeeman_fan,
    ramsey_contrasts,
    fit_ramsey_t2star,
)
from .polarimetry import StokesVector, polarimetry_simulate, polarimetry_extract
from .background import BackgroundSubtracted, subtract_background
from .maps import su2_ideal_map, su2_maxima
