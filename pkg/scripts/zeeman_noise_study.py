"""Spread of fan-fit parameters under Gaussian energy noise, against the
linear-regression covariance.

    python scripts/zeeman_noise_study.py [--seeds 1000] [--noise 2.0]
"""

import argparse

import numpy as np
from math import erfc, sqrt

from qdsim.analysis.fits import fan_design, fit_zeeman_fan
from qdsim.harness import pipelines as pl
from qdsim.harness.config import ExperimentConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=1000)
    ap.add_argument("--noise", type=float, default=2.0)
    ap.add_argument("--bound", type=float, default=0.02)
    args = ap.parse_args()
    cfg = ExperimentConfig()
    L = cfg.levels
    truth = {"gamma": L.gamma, "g_e": L.g_e, "g_h": L.g_h}
    X = fan_design(np.linspace(0, L.b_max, L.n_fields)).reshape(-1, 4)
    sig = args.noise * np.sqrt(np.diag(np.linalg.inv(X.T @ X)))[1:]
    est = {k: [] for k in truth}
    for s in range(args.seeds):
        c = cfg.replace(seed=s, levels={"energy_noise": args.noise})
        p = pl.fit_zeeman_dataset(pl.spectrum_dataset(c))["params"]
        for k in truth:
            est[k].append(p[k])
    for (k, v), s_th in zip(truth.items(), sig):
        e = np.array(est[k])
        z = args.bound * v / s_th
        print(f"{k:6s} sigma theory {s_th / v:.4%}  MC {e.std(ddof=1) / v:.4%}  "
              f"outside {args.bound:.0%}: {np.mean(np.abs(e - v) > args.bound * v):.2%} "
              f"(expected {erfc(z / sqrt(2)):.2%})")


if __name__ == "__main__":
    main()
