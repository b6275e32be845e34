"""Deterministic SVG figures for every dataset kind."""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..errors import SchemaError  # noqa: E402
from ..interferometer import unwrap_phase  # noqa: E402
from .io import Dataset, atomic_write  # noqa: E402

_RC = {"svg.hashsalt": "qdsim", "svg.fonttype": "path", "figure.figsize": (6.4, 4.4)}


def _spectrum(ax, ds):
    B = ds["B_T"]
    for s_e in (-1, 1):
        for s_h in (-1, 1):
            m = (ds["s_e"] == s_e) & (ds["s_h"] == s_h)
            ax.plot(B[m], ds["offset_ueV"][m], "o-", label=f"({s_e:+d},{s_h:+d})")
    ax.set_xlabel("B (T)")
    ax.set_ylabel("E - E0 (ueV)")
    ax.legend(title="(s_e, s_h)")


def _rabi(ax, ds):
    x = ds["sqrtP_uW12"]
    ax.plot(x, ds["counts"], ".", label="signal")
    ax.plot(x, ds["background_counts"], ".", label="background control")
    ax.set_xlabel("sqrt(P) (uW^1/2)")
    ax.set_ylabel("counts")
    ax.legend()


def _ramsey(ax, ds):
    coarse = np.unique(ds["coarse_delay_ps"])
    for c in coarse[:: max(1, coarse.size // 5)]:
        m = ds["coarse_delay_ps"] == c
        ax.plot(ds["fine_delay_fs"][m], ds["counts"][m], ".-", label=f"{c:.1f} ps")
    ax.set_xlabel("fine delay (fs)")
    ax.set_ylabel("counts")
    ax.legend(title="coarse delay")


def _su2(ax, ds):
    x, f = np.unique(ds["sqrtP_uW12"]), np.unique(ds["fine_delay_fs"])
    order = np.lexsort((ds["fine_delay_fs"], ds["sqrtP_uW12"]))
    z = ds["counts"][order].reshape(x.size, f.size)
    mesh = ax.pcolormesh(x, f, z.T, shading="nearest", cmap="viridis")
    ax.figure.colorbar(mesh, ax=ax, label="counts")
    ax.set_xlabel("sqrt(P) (uW^1/2)")
    ax.set_ylabel("fine delay (fs)")


def _polarimetry(ax, ds):
    for k in np.unique(ds["line"]):
        m = ds["line"] == k
        ax.plot(ds["alpha_rad"][m], ds["intensity"][m], label=f"line {int(k)}")
    ax.set_xlabel("QWP angle (rad)")
    ax.set_ylabel("intensity")
    ax.legend()


def _hene(ax, ds):
    t = ds["timestamp_s"] / 3600
    ax.plot(t, ds["wrapped_phase_rad"], lw=0.5, label="wrapped")
    ax.plot(t, unwrap_phase(ds["wrapped_phase_rad"]), label="unwrapped")
    ax.set_xlabel("time (h)")
    ax.set_ylabel("HeNe phase (rad)")
    ax.legend()


def _drift(ax, ds):
    ax.plot(ds["timestamp_s"] / 3600, ds["path_drift_nm"])
    ax.set_xlabel("time (h)")
    ax.set_ylabel("path drift (nm)")


_PLOTTERS = {
    "Spectrum": _spectrum,
    "Rabi": _rabi,
    "Ramsey": _ramsey,
    "Su2Map": _su2,
    "Polarimetry": _polarimetry,
    "HeNe": _hene,
    "Drift": _drift,
}


def render_svg(ds: Dataset) -> bytes:
    if ds.kind not in _PLOTTERS:
        raise SchemaError(f"cannot plot dataset kind {ds.kind!r}")
    if len(ds) == 0:
        raise SchemaError("cannot plot an empty dataset")
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        try:
            _PLOTTERS[ds.kind](ax, ds)
            ax.set_title(f"{ds.kind} [config {ds.metadata.get('config_hash', '')}, "
                         f"seed {ds.metadata.get('seed', '')}]")
            buf = io.BytesIO()
            fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": "qdsim"})
        finally:
            plt.close(fig)
    return buf.getvalue()


def plot_dataset(ds: Dataset, path):
    atomic_write(path, render_svg(ds))
    return path
