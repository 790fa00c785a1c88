"""Standard-tunneling-model formulas and the sweep fitters built on them.

The frequency-shift model for a mode at ``f0`` is, relative to a reference
temperature ``T_ref``::

    shift(T) = (F_delta / pi) * [ bracket(T) - bracket(T_ref) ]
    bracket(T) = Re psi(1/2 + i*y) - ln(y),   y = hbar * 2*pi*f0 / (2*pi*kB*T)

so the shift is exactly zero at the reference temperature.  ``F_delta`` is
the product of the TLS filling fraction and the intrinsic loss tangent; it is
the single scalar the temperature-sweep fit extracts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitError, ValidationError
from .lsq import fit_least_squares

HBAR = 1.054571817e-34  # J s (exact SI)
KB = 1.380649e-23       # J / K (exact SI)

#: psi(1/2) = -euler_gamma - 2 ln 2
PSI_HALF = -1.9635100260214235

# B_{2k}/(2k) for k = 1..8, the correction coefficients of the asymptotic
# series psi(z) ~ ln z - 1/(2z) - sum_k B_{2k} / (2k z^{2k}).
_ASYMPTOTIC_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
)

# |y| below this is pushed up by recurrence before the asymptotic series is
# applied; above it the series is already accurate to well under 1e-12.
_ASYMPTOTIC_CUT = 8.0
_RECURRENCE_STEPS = 9


def _psi_asymptotic(z):
    inv = 1.0 / z
    inv2 = inv * inv
    out = np.log(z) - 0.5 * inv
    term = inv2
    for c in _ASYMPTOTIC_COEFFS:
        out = out - c * term
        term = term * inv2
    return out


def re_digamma_half_plus_imag(y):
    """Re psi(1/2 + i*y) for real ``y`` (scalar or array).

    Uses the asymptotic Bernoulli series directly for |y| >= 8 and nine
    steps of the upward recurrence psi(z) = psi(z+1) - 1/z first otherwise.
    Absolute accuracy is better than 1e-12 everywhere; the value is even in
    ``y`` because psi(conj z) = conj psi(z).
    """
    y_arr = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y_arr)):
        raise ValidationError("digamma argument must be finite")
    z = 0.5 + 1j * np.abs(y_arr)
    small = np.abs(y_arr) < _ASYMPTOTIC_CUT
    correction = np.zeros_like(y_arr, dtype=float)
    if np.any(small):
        z_small = np.where(small, z, 0.5 + 10j)  # placeholder for the masked lanes
        for k in range(_RECURRENCE_STEPS):
            correction += np.where(small, (1.0 / (z_small + k)).real, 0.0)
        z = np.where(small, z_small + _RECURRENCE_STEPS, z)
    out = _psi_asymptotic(z).real - correction
    if np.isscalar(y) or y_arr.ndim == 0:
        return float(out)
    return out


def _bracket(f0_hz, temperature_k):
    y = HBAR * f0_hz / (KB * temperature_k)
    return re_digamma_half_plus_imag(y) - np.log(y)


def tls_frequency_shift(f_delta_tls, f0_hz, temperature_k,
                        reference_temperature_k=0.200):
    """Fractional frequency shift of a mode at ``f0_hz``, zero at the reference.

    ``temperature_k`` may be a scalar or array; all temperatures must be > 0.
    """
    t = np.asarray(temperature_k, dtype=float)
    if np.any(t <= 0) or reference_temperature_k <= 0:
        raise ValidationError("temperatures must be positive")
    if f0_hz <= 0:
        raise ValidationError("f0_hz must be positive")
    shape = _bracket(f0_hz, t) - _bracket(f0_hz, reference_temperature_k)
    out = (f_delta_tls / np.pi) * shape
    if np.isscalar(temperature_k):
        return float(out)
    return out


@dataclass(frozen=True)
class TlsFitResult:
    """Outcome of the one-parameter temperature-sweep fit."""

    f_delta_tls: float
    f_delta_err: float
    f0_hz: float
    reference_temperature_k: float
    residual_rms: float
    #: set when the fitted loss product came out <= 0 (a warning, not an error)
    non_positive: bool = False

    def __post_init__(self):
        if self.f_delta_err < 0:
            raise ValidationError("f_delta_err must be >= 0")

    def to_json_dict(self):
        return {
            "f_delta_tls": self.f_delta_tls,
            "f_delta_err": self.f_delta_err,
            "f0_hz": self.f0_hz,
            "reference_temperature_K": self.reference_temperature_k,
            "residual_rms": self.residual_rms,
            "non_positive": self.non_positive,
        }


def fit_fdelta(series) -> TlsFitResult:
    """Extract the TLS loss product from a temperature sweep.

    The model is linear in the loss product (a known temperature shape times
    ``F_delta``), so the weighted least-squares solution is closed form.
    The shift is anchored at the sweep point closest to the series reference
    temperature; that point's fitted frequency also supplies the mode
    frequency inside the bracket.
    """
    t = np.asarray(series.temperatures_k, dtype=float)
    f0 = np.asarray(series.f0_hz, dtype=float)
    err = np.asarray(series.f0_err_hz, dtype=float)

    i_ref = int(np.argmin(np.abs(t - series.reference_temperature_k)))
    f_ref = f0[i_ref]
    t_ref = t[i_ref]

    shape = (_bracket(f_ref, t) - _bracket(f_ref, t_ref)) / np.pi
    data = f0 / f_ref - 1.0

    denom_shape = float(shape @ shape)
    if denom_shape == 0.0:
        raise FitError("degenerate temperature shape: no usable spread in T")

    if np.all(err > 0):
        w = 1.0 / err**2
    else:
        w = np.ones_like(t)
    swd = float(np.sum(w * shape * data))
    sws = float(np.sum(w * shape * shape))
    f_delta = swd / sws

    resid = data - f_delta * shape
    dof = max(1, t.size - 1)
    var = float(np.sum(w * resid**2) / dof / sws)
    return TlsFitResult(
        f_delta_tls=f_delta,
        f_delta_err=float(np.sqrt(max(var, 0.0))),
        f0_hz=float(f_ref),
        reference_temperature_k=float(series.reference_temperature_k),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        non_positive=bool(f_delta <= 0),
    )


def q_tls(f_delta_tls, f0_hz, temperature_k):
    """Quality factor set by TLS loss alone at the given temperature."""
    if f_delta_tls <= 0 or f0_hz <= 0 or temperature_k <= 0:
        raise ValidationError("q_tls arguments must all be positive")
    arg = HBAR * 2.0 * np.pi * f0_hz / (2.0 * KB * temperature_k)
    return 1.0 / (f_delta_tls * np.tanh(arg))


@dataclass(frozen=True)
class PowerModelParams:
    """Parameters of the power-saturation model for the internal Q."""

    f_delta_tls: float
    n_c: float            # critical phonon number
    beta: float           # saturation exponent, in (0, 2]
    q_i_res: float        # residual (power-independent) internal Q
    temperature_k: float
    f0_hz: float

    def __post_init__(self):
        if min(self.f_delta_tls, self.n_c, self.q_i_res,
               self.temperature_k, self.f0_hz) <= 0:
            raise ValidationError("power-model parameters must be positive")
        if not 0.0 < self.beta <= 2.0:
            raise ValidationError("beta must lie in (0, 2]")

    def to_json_dict(self):
        return {
            "f_delta_tls": self.f_delta_tls,
            "n_c": self.n_c,
            "beta": self.beta,
            "q_i_res": self.q_i_res,
            "temperature_K": self.temperature_k,
            "f0_hz": self.f0_hz,
        }


def qi_power_model(params: PowerModelParams, mean_phonon_number):
    """Total internal Q at a given drive level.

    1/Q_tot = F_delta * tanh(hbar w / 2 kB T) / sqrt(1 + (n/n_c)^beta) + 1/Q_res
    """
    n = np.asarray(mean_phonon_number, dtype=float)
    if np.any(n <= 0):
        raise ValidationError("mean phonon number must be positive")
    arg = HBAR * 2.0 * np.pi * params.f0_hz / (2.0 * KB * params.temperature_k)
    tls_loss = params.f_delta_tls * np.tanh(arg) / np.sqrt(1.0 + (n / params.n_c) ** params.beta)
    out = 1.0 / (tls_loss + 1.0 / params.q_i_res)
    if np.isscalar(mean_phonon_number):
        return float(out)
    return out


#: sweeps spanning fewer than this many decades keep beta fixed by default
BETA_FREE_MIN_DECADES = 4.0
DEFAULT_BETA = 0.5


@dataclass(frozen=True)
class PowerSweepFitResult:
    params: PowerModelParams
    param_errors: dict
    beta_fixed: bool
    beta_unidentifiable: bool
    residual_rms: float
    n_iterations: int

    def to_json_dict(self):
        return {
            "params": self.params.to_json_dict(),
            "param_errors": dict(self.param_errors),
            "beta_fixed": self.beta_fixed,
            "beta_unidentifiable": self.beta_unidentifiable,
            "residual_rms": self.residual_rms,
            "n_iterations": self.n_iterations,
        }


def fit_power_sweep(series, fixed_beta=None) -> PowerSweepFitResult:
    """Fit the saturation model to a power sweep, minimizing error in 1/Q.

    ``fixed_beta`` pins the saturation exponent; when it is None the exponent
    is fitted only if the sweep spans at least four decades of phonon number
    (it is weakly identified on shorter sweeps) and held at 0.5 otherwise.
    Positive parameters are fitted in log space, so no bound can be violated.
    """
    n = np.asarray(series.mean_phonon_number, dtype=float)
    qi = np.asarray(series.qi, dtype=float)
    qi_err = np.asarray(series.qi_err, dtype=float)

    decades = np.log10(n.max() / n.min())
    if fixed_beta is not None:
        if not 0.0 < fixed_beta <= 2.0:
            raise ValidationError("fixed beta must lie in (0, 2]")
        beta_fixed = True
        beta0 = float(fixed_beta)
    elif decades < BETA_FREE_MIN_DECADES:
        beta_fixed = True
        beta0 = DEFAULT_BETA
    else:
        beta_fixed = False
        beta0 = DEFAULT_BETA

    arg = HBAR * 2.0 * np.pi * series.f0_hz / (2.0 * KB * series.temperature_k)
    tanh_arg = np.tanh(arg)

    # Initial guesses from the sweep extremes: the high-power plateau is the
    # residual Q, the low-power deficit is the unsaturated TLS loss.
    q_res0 = float(qi.max()) * 1.05
    loss_lo = max(1.0 / qi.min() - 1.0 / q_res0, 1e-3 / qi.min())
    f_delta0 = loss_lo / tanh_arg
    order = np.argsort(n)
    excess = 1.0 / qi[order] - 1.0 / q_res0
    half = loss_lo / 2.0
    below = np.nonzero(excess < half)[0]
    n_c0 = float(n[order[below[0]]]) if below.size else float(np.sqrt(n.min() * n.max()))

    if np.all(qi_err > 0):
        w = qi**2 / qi_err  # 1/sigma of the 1/Q data
    else:
        w = np.full_like(qi, qi.mean() ** 2 / qi.mean())  # uniform in 1/Q units

    def unpack(p):
        f_delta = np.exp(p[0])
        n_c = np.exp(p[1])
        q_res = np.exp(p[2])
        beta = beta0 if beta_fixed else p[3]
        return f_delta, n_c, q_res, beta

    def residual(p):
        f_delta, n_c, q_res, beta = unpack(p)
        inv_q = f_delta * tanh_arg / np.sqrt(1.0 + (n / n_c) ** beta) + 1.0 / q_res
        return w * (inv_q - 1.0 / qi)

    p0 = [np.log(f_delta0), np.log(n_c0), np.log(q_res0)]
    scale = [1.0, 1.0, 1.0]
    lower = [-np.inf, -np.inf, -np.inf]
    upper = [np.inf, np.inf, np.inf]
    if not beta_fixed:
        p0.append(beta0)
        scale.append(0.5)
        lower.append(1e-3)
        upper.append(2.0)

    res = fit_least_squares(residual, p0, x_scale=scale, lower=lower, upper=upper)
    f_delta, n_c, q_res, beta = unpack(res.params)

    # log-space sigma -> linear sigma
    errs = {
        "f_delta_tls": f_delta * res.param_errors[0],
        "n_c": n_c * res.param_errors[1],
        "q_i_res": q_res * res.param_errors[2],
        "beta": float(res.param_errors[3]) if not beta_fixed else 0.0,
    }
    params = PowerModelParams(
        f_delta_tls=float(f_delta), n_c=float(n_c), beta=float(beta),
        q_i_res=float(q_res), temperature_k=float(series.temperature_k),
        f0_hz=float(series.f0_hz),
    )
    return PowerSweepFitResult(
        params=params,
        param_errors=errs,
        beta_fixed=beta_fixed,
        beta_unidentifiable=bool(not beta_fixed and errs["beta"] > beta),
        residual_rms=float(np.sqrt(res.cost / n.size)),
        n_iterations=res.n_iterations,
    )
