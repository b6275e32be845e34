"""Damped Gauss-Newton (Levenberg-Marquardt) engine shared by all fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, SingularJacobianError

RANK_RTOL = 1e-10


@dataclass
class FitReport:
    params: dict
    sigmas: dict
    residual_rms: float
    converged: bool
    n_iter: int
    flags: list = field(default_factory=list)
    derived: dict = field(default_factory=dict)
    covariance: np.ndarray | None = None

    def __getitem__(self, name):
        if name in self.params:
            return self.params[name]
        return self.derived[name]

    def to_dict(self) -> dict:
        def clean(d):
            return {k: float(v) for k, v in d.items()}

        return {
            "params": clean(self.params),
            "sigmas": clean(self.sigmas),
            "derived": clean(self.derived),
            "residual_rms": float(self.residual_rms),
            "converged": bool(self.converged),
            "n_iter": int(self.n_iter),
            "flags": list(self.flags),
        }


def numeric_jacobian(fun, p, rel_step=1e-6, typical=None):
    """Central-difference Jacobian of ``fun`` at ``p``; step is
    ``rel_step * max(|p_j|, typical_j)``."""
    p = np.asarray(p, dtype=float)
    typical = np.ones_like(p) if typical is None else np.asarray(typical, dtype=float)
    steps = rel_step * np.maximum(np.abs(p), typical)
    cols = []
    for j, h in enumerate(steps):
        dp = np.zeros_like(p)
        dp[j] = h
        cols.append((fun(p + dp) - fun(p - dp)) / (2 * h))
    return np.stack(cols, axis=-1)


def _check_rank(J, names):
    norms = np.linalg.norm(J, axis=0)
    if np.any(norms == 0):
        dead = [n for n, v in zip(names, norms) if v == 0]
        raise SingularJacobianError(f"residuals do not depend on {dead}")
    sv = np.linalg.svd(J / norms, compute_uv=False)
    if sv[-1] <= RANK_RTOL * sv[0]:
        raise SingularJacobianError(
            f"Jacobian is rank deficient (condition {sv[0] / max(sv[-1], 1e-300):.3g})"
        )


def least_squares(model, init, x, y, names=None, tol=1e-10, max_iter=200, sigma=None,
                  typical=None, absolute_sigma=False) -> FitReport:
    """Minimize sum(((model(x, p) - y) / sigma)**2).

    Starts undamped and raises the Marquardt damping only when a step fails
    to lower the cost.  Hitting ``max_iter`` returns ``converged=False``.
    """
    p = np.asarray(init, dtype=float).copy()
    y = np.asarray(y, dtype=float)
    names = list(names) if names is not None else [f"p{i}" for i in range(p.size)]
    if len(names) != p.size:
        raise DomainError("names and init have different lengths")
    if not np.all(np.isfinite(y)) or not np.all(np.isfinite(p)):
        raise DomainError("data and initial guess must be finite")
    w = 1.0 if sigma is None else 1.0 / np.asarray(sigma, dtype=float)

    def resid(q):
        return ((np.asarray(model(x, q), dtype=float) - y) * w).ravel()

    r = resid(p)
    cost = 0.5 * r @ r
    scale0 = 0.5 * float(np.sum((y * w) ** 2)) + 1e-300
    lam = 0.0
    n_iter = 0
    converged = False
    J = numeric_jacobian(resid, p, typical=typical)
    _check_rank(J, names)
    while n_iter < max_iter:
        n_iter += 1
        A = J.T @ J
        g = J.T @ r
        D = np.diag(np.diag(A))
        accepted = False
        while True:
            try:
                step = np.linalg.solve(A + lam * D, -g)
            except np.linalg.LinAlgError:
                step = None
            if step is not None and np.all(np.isfinite(step)):
                p_new = p + step
                r_new = resid(p_new)
                cost_new = 0.5 * r_new @ r_new
                if np.isfinite(cost_new) and cost_new <= cost:
                    accepted = True
                    break
            lam = 1e-3 if lam == 0 else lam * 10
            if lam > 1e16:
                break
        if not accepted:
            # no descent direction left at working precision
            converged = True
            break
        small_step = np.linalg.norm(step) <= tol * (np.linalg.norm(p) + tol)
        small_drop = cost - cost_new <= tol * cost
        p, r, cost = p_new, r_new, cost_new
        lam = 0.0 if lam < 1e-9 else lam / 10
        J = numeric_jacobian(resid, p, typical=typical)
        if small_step or small_drop or cost <= 1e-30 * scale0:
            converged = True
            break
    _check_rank(J, names)
    m, n = r.size, p.size
    cov = np.linalg.inv(J.T @ J)
    if not absolute_sigma:
        cov = cov * (2 * cost / (m - n) if m > n else math.inf)
    sig = np.sqrt(np.clip(np.diag(cov), 0, None))
    rms = float(np.sqrt(np.mean(r**2))) if sigma is None else float(
        np.sqrt(np.mean((r / w) ** 2))
    )
    return FitReport(
        params=dict(zip(names, map(float, p))),
        sigmas=dict(zip(names, map(float, sig))),
        residual_rms=rms,
        converged=converged,
        n_iter=n_iter,
        covariance=cov,
    )
