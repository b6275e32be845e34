"""Physical constants in the unit system used throughout the package.

Energies are in micro-electronvolts, times in picoseconds (femtoseconds for
interferometer fine delays), lengths in nanometres and fields in tesla.
"""

from types import MappingProxyType

MU_B = 57.8838  # ueV / T
HBAR = 658.2119  # ueV ps
C_NM_PER_FS = 299.792458  # speed of light, nm / fs
C_NM_PER_PS = 1e3 * C_NM_PER_FS
HC_EV_NM = 1239.841984  # eV nm

LAMBDA_QD_NM = 880.0  # assumed emission wavelength (not reported)
LAMBDA_HENE_NM = 632.8

FWHM_TO_SIGMA = 1.0 / (2.0 * (2.0 * 0.6931471805599453) ** 0.5)

TABLE = MappingProxyType(
    {
        "mu_B_ueV_per_T": MU_B,
        "hbar_ueV_ps": HBAR,
        "c_nm_per_fs": C_NM_PER_FS,
        "lambda_qd_nm": LAMBDA_QD_NM,
        "lambda_hene_nm": LAMBDA_HENE_NM,
    }
)


def fringe_period_fs(wavelength_nm: float) -> float:
    """Optical period of light at ``wavelength_nm`` in femtoseconds."""
    return wavelength_nm / C_NM_PER_FS
