"""Damped least squares (Levenberg-Marquardt) with a numeric Jacobian.

Every nonlinear fitter in the package goes through :func:`fit_least_squares`,
so convergence behavior, iteration accounting, and covariance estimation are
uniform across analyses.  Residual functions return a 1-d float array; the
cost is the plain sum of squared residuals (callers bake in any weights).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FitError

_SQRT_EPS = np.sqrt(np.finfo(float).eps)


@dataclass
class LeastSquaresResult:
    params: np.ndarray
    param_errors: np.ndarray
    covariance: np.ndarray
    residual: np.ndarray
    cost: float
    n_iterations: int
    converged: bool
    # Costs of the accepted states, starting at the initial point.  Strictly
    # non-increasing: only downhill steps are ever accepted.
    cost_history: list = field(default_factory=list)
    pinned_low: np.ndarray | None = None
    pinned_high: np.ndarray | None = None


def numeric_jacobian(fun, p, r0=None, x_scale=None):
    """Forward-difference Jacobian of ``fun`` at ``p``.

    Step sizes are sqrt(eps) times a per-parameter scale, so parameters of
    wildly different magnitude (Hz next to seconds) differentiate cleanly.
    """
    p = np.asarray(p, dtype=float)
    if r0 is None:
        r0 = np.asarray(fun(p), dtype=float)
    if x_scale is None:
        x_scale = np.ones_like(p)
    scale = np.maximum(np.abs(p), np.asarray(x_scale, dtype=float))
    jac = np.empty((r0.size, p.size))
    for i in range(p.size):
        h = _SQRT_EPS * scale[i]
        if h == 0.0:
            h = _SQRT_EPS
        p_step = p.copy()
        p_step[i] += h
        jac[:, i] = (np.asarray(fun(p_step), dtype=float) - r0) / h
    return jac


def _damped_step(a, g, d, lam):
    try:
        return np.linalg.solve(a + lam * np.diag(d), -g)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(a + lam * np.diag(d), -g, rcond=None)[0]


def fit_least_squares(fun, p0, *, x_scale=None, lower=None, upper=None,
                      max_iter=200, cost_tol=1e-10, step_tol=1e-12,
                      lam0=1e-3):
    """Minimize ``sum(fun(p)**2)`` from ``p0`` by damped least squares.

    The normal equations are damped with the Marquardt scaling
    ``(J'J + lam * diag(J'J))`` and ``lam`` is adapted: divided by 10 after an
    accepted (downhill) step, multiplied by 10 after a rejected one.
    Convergence is declared when the relative cost decrease of an accepted
    step falls below ``cost_tol`` or the step norm relative to the parameter
    norm falls below ``step_tol``.  Optional ``lower``/``upper`` box bounds
    are enforced by projecting trial steps.

    Raises FitError if ``max_iter`` iterations pass without convergence.
    """
    p = np.asarray(p0, dtype=float).copy()
    n = p.size
    if x_scale is None:
        x_scale = np.maximum(np.abs(p), 1e-30)
    x_scale = np.asarray(x_scale, dtype=float)
    lo = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    hi = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    p = np.clip(p, lo, hi)

    r = np.asarray(fun(p), dtype=float)
    if not np.all(np.isfinite(r)):
        raise FitError("residual is not finite at the initial parameters")
    cost = float(r @ r)
    history = [cost]
    lam = lam0
    converged = False
    n_iter = 0

    for n_iter in range(1, max_iter + 1):
        jac = numeric_jacobian(fun, p, r0=r, x_scale=x_scale)
        a = jac.T @ jac
        g = jac.T @ r
        d = np.diag(a).copy()
        d[d <= 0] = max(d.max(), 1.0) * 1e-14

        accepted = False
        for _ in range(50):
            step = _damped_step(a, g, d, lam)
            p_try = np.clip(p + step, lo, hi)
            clipped = p_try != p + step
            if np.any(clipped) and not np.all(clipped):
                # re-solve in the free subspace so the bound does not stall
                # progress of the unconstrained parameters
                free = ~clipped
                sub = _damped_step(a[np.ix_(free, free)], g[free], d[free], lam)
                p_try = p_try.copy()
                p_try[free] = np.clip(p[free] + sub, lo[free], hi[free])
            r_try = np.asarray(fun(p_try), dtype=float)
            cost_try = float(r_try @ r_try) if np.all(np.isfinite(r_try)) else np.inf
            if cost_try < cost:
                accepted = True
                step_norm = float(np.linalg.norm(p_try - p))
                rel_drop = (cost - cost_try) / max(cost, np.finfo(float).tiny)
                p, r, cost = p_try, r_try, cost_try
                history.append(cost)
                lam = max(lam / 10.0, 1e-14)
                if rel_drop < cost_tol or step_norm < step_tol * (np.linalg.norm(p) + step_tol):
                    converged = True
                break
            lam = min(lam * 10.0, 1e15)
        if not accepted:
            # No downhill direction at any damping: stationary to numerical
            # precision, which is as converged as a numeric Jacobian gets.
            converged = True
        if converged:
            break

    if not converged:
        raise FitError(f"no convergence after {max_iter} iterations "
                       f"(cost {cost:.3e})")

    jac = numeric_jacobian(fun, p, r0=r, x_scale=x_scale)
    covariance = _scaled_covariance(jac, cost, r.size, n)
    errors = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    return LeastSquaresResult(
        params=p,
        param_errors=errors,
        covariance=covariance,
        residual=r,
        cost=cost,
        n_iterations=n_iter,
        converged=True,
        cost_history=history,
        pinned_low=np.isfinite(lo) & (p <= lo),
        pinned_high=np.isfinite(hi) & (p >= hi),
    )


def _scaled_covariance(jac, cost, n_residuals, n_params):
    """Covariance of the optimum: (J'J)^-1 scaled by the residual variance.

    Near-null directions of J'J are genuinely unidentified parameters; their
    eigenvalues are floored (not discarded) so the corresponding variances
    come out huge rather than deceptively small.
    """
    dof = max(1, n_residuals - n_params)
    s2 = cost / dof
    a = jac.T @ jac
    w, v = np.linalg.eigh(a)
    floor = max(float(w.max()), 0.0) * 1e-14 + np.finfo(float).tiny
    inv_w = 1.0 / np.maximum(w, floor)
    return (v * inv_w) @ v.T * s2
