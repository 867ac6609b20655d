"""Resonator-side analysis: notch S21 model and fit, photon number, TLS saturation."""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy import optimize

from . import constants as const
from . import lindblad as lb
from .errors import (
    DegenerateFit,
    FitDiverged,
    InsufficientSpan,
    RegimeViolation,
    ValidationError,
)

MIN_FIT_SAMPLES = 8
MIN_SPAN_LINEWIDTHS = 3.0
BETA_BOUNDS = (0.05, 2.0)


@dataclass
class S21Trace:
    frequencies_hz: np.ndarray
    values: np.ndarray
    power_dbm_at_device: float = None

    def __post_init__(self):
        self.frequencies_hz = np.asarray(self.frequencies_hz, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.frequencies_hz.shape != self.values.shape or self.frequencies_hz.ndim != 1:
            raise ValidationError("frequencies and values must be 1-d and equal length")
        if len(self.frequencies_hz) and np.any(np.diff(self.frequencies_hz) <= 0):
            raise ValidationError("frequencies must be strictly ascending")

    def __len__(self):
        return len(self.frequencies_hz)


@dataclass
class ResonatorFit:
    a: float
    phi: float
    tau: float
    f0: float
    Q: float
    Qc: float
    df: float = 0.0
    f_start: float = None
    stderr: dict = field(default_factory=dict)
    residual_rms: float = float("nan")

    @property
    def inverse_Qi(self):
        return 1.0 / self.Q - (complex(1.0, 2.0 * self.df / self.f0) / self.Qc).real

    @property
    def Qi(self):
        inv = self.inverse_Qi
        return math.inf if inv == 0 else 1.0 / inv

    def as_dict(self):
        return {
            "a": self.a,
            "phi_rad": self.phi,
            "tau_s": self.tau,
            "f0_hz": self.f0,
            "q_loaded": self.Q,
            "q_coupling": self.Qc,
            "df_hz": self.df,
            "q_internal": self.Qi,
            "f_start_hz": self.f_start,
            "residual_rms": self.residual_rms,
            "stderr": dict(self.stderr),
        }


def s21_model(fit, f_hz, f_start=None):
    """Notch-type transmission with baseline, cable delay and asymmetry."""
    f = np.asarray(f_hz, dtype=float)
    fs = f_start if f_start is not None else fit.f_start
    if fs is None:
        fs = float(np.min(f)) if f.ndim else float(f)
    baseline = fit.a * np.exp(1j * (fit.phi + 2 * np.pi * (f - fs) * fit.tau))
    dip = (fit.Q / fit.Qc) * (1 + 2j * fit.df / fit.f0) / (1 + 2j * fit.Q * (f - fit.f0) / fit.f0)
    return baseline * (1 - dip)


def fit_circle(z):
    """Algebraic (Kasa) circle fit; returns complex center and radius."""
    x, y = z.real, z.imag
    m = np.column_stack([x, y, np.ones_like(x)])
    rhs = -(x * x + y * y)
    (d, e, f), *_ = np.linalg.lstsq(m, rhs, rcond=None)
    center = complex(-d / 2, -e / 2)
    radius = math.sqrt(max(abs(center) ** 2 - f, 0.0))
    return center, radius


def _edge_slice(n):
    k = max(3, n // 10)
    return np.r_[0:k], np.r_[n - k : n]


def _circle_residual(z):
    center, radius = fit_circle(z)
    return float(np.mean((np.abs(z - center) - radius) ** 2))


def _estimate_delay(f, z):
    """Cable delay: edge phase slope, then the delay that makes the data most circular."""
    fs = f[0]
    # slope within each edge separately; unwrapping across a near-critical dip
    # can add a full turn between the two edges
    tau0 = np.mean([
        np.polyfit(f[idx] - fs, np.unwrap(np.angle(z[idx])), 1)[0] for idx in _edge_slice(len(f))
    ]) / (2 * np.pi)
    span = f[-1] - f[0]
    width = 0.5 / span  # half a turn of phase across the span

    def cost(tau):
        return _circle_residual(z * np.exp(-2j * np.pi * (f - fs) * tau))

    res = optimize.minimize_scalar(cost, bounds=(tau0 - width, tau0 + width), method="bounded",
                                   options={"xatol": 1e-6 * width})
    return res.x if res.fun <= cost(tau0) else tau0


def initial_guess(trace):
    """Delay removal, algebraic circle fit, then a linear fit of the inverse Lorentzian."""
    f, z = trace.frequencies_hz, trace.values
    fs = f[0]
    tau = _estimate_delay(f, z)
    z1 = z * np.exp(-2j * np.pi * (f - fs) * tau)

    center, radius = fit_circle(z1)
    lo, hi = _edge_slice(len(f))
    edges = np.r_[lo, hi]
    theta = np.angle(np.mean(np.exp(1j * np.angle(z1[edges] - center))))
    off = center + radius * np.exp(1j * theta)
    w = 1 - z1 / off

    # w = A / (1 + 2iQ(f - f0)/f0)  =>  1/w = alpha + beta f, solved as w(alpha + beta f) = 1
    fc = f - fs
    m = np.column_stack([w, w * fc])
    (alpha, beta), *_ = np.linalg.lstsq(m, np.ones_like(w), rcond=None)
    ratio = alpha / beta if beta != 0 else complex(np.nan, np.nan)
    f0 = fs - ratio.real
    q = -f0 / (2 * ratio.imag) if ratio.imag != 0 else np.nan
    if np.isfinite(f0) and f[0] <= f0 <= f[-1] and q > 0:
        amp = 1.0 / (alpha + beta * (f0 - fs))
    else:
        k = int(np.argmax(np.abs(w)))
        f0, amp = f[k], w[k]
        half = np.abs(w) ** 2 >= 0.5 * np.abs(amp) ** 2
        q = f0 / max(np.ptp(f[half]), f[1] - f[0])
    if amp.real <= 0:
        amp = complex(abs(amp), 0.0)
    qc = q / amp.real
    df = f0 * amp.imag / (2 * amp.real)
    return ResonatorFit(
        a=abs(off), phi=float(np.angle(off)), tau=float(tau), f0=float(f0), Q=float(q),
        Qc=float(qc), df=float(df), f_start=float(fs),
    )


def _pack(g):
    return np.array([g.a, g.phi, g.tau, g.f0, math.log(g.Q), math.log(g.Qc), g.df / g.f0])


def _unpack(x, fs):
    a, phi, tau, f0, lq, lqc, eps = x
    return ResonatorFit(a, phi, tau, f0, math.exp(lq), math.exp(lqc), eps * f0, f_start=fs)


def _model_and_jacobian(x, f, fs):
    """Model values and d model / d x for x = (a, phi, tau, f0, ln Q, ln Qc, df/f0)."""
    a, phi, tau, f0, lq, lqc, eps = x
    q, qc = math.exp(lq), math.exp(lqc)
    base = a * np.exp(1j * (phi + 2 * np.pi * (f - fs) * tau))
    den = 1 + 2j * q * (f - f0) / f0
    k = (q / qc) * (1 + 2j * eps)
    dip = k / den
    s = base * (1 - dip)
    jac = np.empty((len(f), 7), dtype=complex)
    jac[:, 0] = s / a
    jac[:, 1] = 1j * s
    jac[:, 2] = 2j * np.pi * (f - fs) * s
    jac[:, 3] = -base * k * 2j * q * f / (f0 * f0 * den * den)
    jac[:, 4] = -base * dip / den
    jac[:, 5] = base * dip
    jac[:, 6] = -base * 2j * (q / qc) / den
    return s, jac


def fit_s21(trace, initial=None, weights=None, max_rel_residual=0.25):
    """Least-squares fit of the notch model to a complex trace.

    The guess comes from :func:`initial_guess` unless supplied. Parameters are
    refined by Levenberg-Marquardt on the stacked real and imaginary
    residuals, optionally weighted per point. Standard errors come from the
    Jacobian at the optimum scaled by the residual variance.
    """
    n = len(trace)
    if n < MIN_FIT_SAMPLES:
        raise ValidationError(f"need at least {MIN_FIT_SAMPLES} samples, got {n}")
    f, z = trace.frequencies_hz, trace.values
    fs = float(f[0])
    guess = initial if initial is not None else initial_guess(trace)
    if not (guess.Q > 0 and guess.Qc > 0 and guess.f0 > 0):
        raise FitDiverged("could not form a physical initial guess")
    span = f[-1] - f[0]
    sw = np.ones(n) if weights is None else np.sqrt(np.asarray(weights, dtype=float))

    # solve in shifted, rescaled variables so every step is O(1)
    x0 = _pack(guess)
    lw = guess.f0 / guess.Q
    scale = np.array([guess.a, 1.0, 1.0 / (2 * np.pi * max(span, lw)), lw, 1.0, 1.0, 1.0 / guess.Q])
    shift = np.zeros_like(x0)
    shift[3] = x0[3]

    def residual(y):
        s, _ = _model_and_jacobian(y * scale + shift, f, fs)
        d = (s - z) * sw
        return np.concatenate([d.real, d.imag])

    def jacobian(y):
        _, j = _model_and_jacobian(y * scale + shift, f, fs)
        j = j * sw[:, None] * scale
        return np.concatenate([j.real, j.imag])

    res = optimize.least_squares(
        residual, (x0 - shift) / scale, jac=jacobian, method="lm",
        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000,
    )
    x = res.x * scale + shift
    if not np.all(np.isfinite(x)) or res.status <= 0:
        raise FitDiverged(res.message)
    fit = _unpack(x, fs)
    if fit.phi > np.pi or fit.phi <= -np.pi:
        fit.phi = float(np.angle(np.exp(1j * fit.phi)))
    rms = float(np.sqrt(np.mean(np.abs(s21_model(fit, f, fs) - z) ** 2)))
    fit.residual_rms = rms
    if rms > max_rel_residual * fit.a:
        raise FitDiverged(f"rms residual {rms:.3g} exceeds {max_rel_residual:g} of baseline {fit.a:.3g}")
    if span < MIN_SPAN_LINEWIDTHS * fit.f0 / fit.Q:
        raise InsufficientSpan(
            f"span {span:.4g} Hz is below {MIN_SPAN_LINEWIDTHS:g} linewidths ({fit.f0 / fit.Q:.4g} Hz)"
        )
    fit.stderr = _standard_errors(res, scale, fit, n)
    return fit


def _standard_errors(res, scale, fit, n):
    dof = 2 * n - len(res.x)
    if dof <= 0:
        return {}
    s2 = 2 * res.cost / dof
    # invert in the well-conditioned solver variables y, then map to x = y * scale
    try:
        cov_y = np.linalg.pinv(res.jac.T @ res.jac) * s2
    except np.linalg.LinAlgError:
        return {}
    cov = cov_y * np.outer(scale, scale)
    sd = np.sqrt(np.clip(np.diag(cov), 0, None))
    qi = fit.Qi
    grad = np.zeros(len(res.x))
    if math.isfinite(qi):
        grad[4] = qi * qi / fit.Q
        grad[5] = -qi * qi / fit.Qc
    return {
        "a": sd[0],
        "phi": sd[1],
        "tau": sd[2],
        "f0": sd[3],
        "Q": fit.Q * sd[4],
        "Qc": fit.Qc * sd[5],
        "df": abs(fit.f0) * sd[6],
        "Qi": float(np.sqrt(max(grad @ cov @ grad, 0.0))),
    }


def geometric_mean_qi(qis):
    q = np.asarray(qis, dtype=float)
    if np.any(q <= 0):
        raise ValidationError("Qi values must be positive")
    return float(np.exp(np.mean(np.log(q))))


def photon_number(Pin_watts, f0_hz, Q, Qe):
    """Mean intracavity photon number for a side-coupled resonator on resonance."""
    w0 = 2 * np.pi * f0_hz
    return 2.0 * Q * Q * np.asarray(Pin_watts) / (const.HBAR * w0 * w0 * Qe)


def photon_number_from_rates(Pin_watts, f0_hz, kappa_i, kappa_e):
    """Same quantity written with internal/external energy decay rates (s^-1)."""
    w0 = 2 * np.pi * f0_hz
    return 2.0 * kappa_e * np.asarray(Pin_watts) / (const.HBAR * w0 * (kappa_i + kappa_e) ** 2)


def thermal_factor(f_hz, T_kelvin):
    """tanh(hbar w / 2 k_B T): thermal saturation of the resonant loss."""
    T = np.asarray(T_kelvin, dtype=float)
    if np.any(T <= 0):
        raise ValidationError("temperature must be > 0")
    return np.tanh(const.H * np.asarray(f_hz) / (2.0 * const.K_B * T))


@dataclass(frozen=True)
class SaturationFitParams:
    tan_delta0: float
    n_c: float
    beta: float = 1.0
    A_T: float = 1.0

    def __post_init__(self):
        if not (self.tan_delta0 > 0 and self.n_c > 0):
            raise ValidationError("tan_delta0 and n_c must be > 0")
        if not 0 < self.beta <= 2:
            raise ValidationError("beta must lie in (0, 2]")
        if not 0 < self.A_T <= 1:
            raise ValidationError("A_T must lie in (0, 1]")


def saturation_model(n_photons, p):
    n = np.asarray(n_photons, dtype=float)
    if np.any(n < 0):
        raise ValidationError("photon number must be >= 0")
    return p.tan_delta0 * p.A_T / np.sqrt(1.0 + (n / p.n_c) ** p.beta)


def fit_saturation_model(n_photons, tan_delta, A_T=1.0, beta_bounds=BETA_BOUNDS):
    """Nonlinear fit of tan_delta0, n_c and beta (bounded) in log space."""
    n = np.asarray(n_photons, dtype=float)
    t = np.asarray(tan_delta, dtype=float)
    if len(n) < 3 or np.any(n <= 0) or np.any(t <= 0):
        raise ValidationError("need >= 3 positive (n, tan_delta) points")

    def resid(x):
        td0, lnc, beta = math.exp(x[0]), x[1], x[2]
        model = td0 * A_T / np.sqrt(1.0 + np.exp(beta * (np.log(n) - lnc)))
        return np.log(model) - np.log(t)

    x0 = [math.log(t.max() / A_T), float(np.log(np.median(n))), 1.0]
    lower = [-np.inf, -np.inf, beta_bounds[0]]
    upper = [np.inf, np.inf, beta_bounds[1]]
    res = optimize.least_squares(resid, x0, bounds=(lower, upper))
    return SaturationFitParams(math.exp(res.x[0]), math.exp(res.x[1]), float(res.x[2]), A_T)


@dataclass(frozen=True)
class LogLogFit:
    a: float
    b_zero: float
    b_field: float
    nc_ratio: float
    a_stderr: float = float("nan")
    curvature: tuple = (0.0, 0.0)

    @property
    def beta(self):
        return 2.0 * self.a


def fit_saturation_loglog(zero_field, in_field, curvature_tol=0.05):
    """Joint fit of log10(tan_delta) = -a log10(n) + b with a shared slope.

    ``zero_field`` and ``in_field`` are ``(n, tan_delta)`` pairs of arrays
    measured on the same resonator. Returns the critical-photon-number ratio
    n_c(B=0)/n_c(B>0) = 10**((b_zero - b_field)/a).
    """
    n0, t0 = (np.asarray(v, dtype=float) for v in zero_field)
    n1, t1 = (np.asarray(v, dtype=float) for v in in_field)
    for n, t in ((n0, t0), (n1, t1)):
        if n.shape != t.shape or len(n) < 2:
            raise ValidationError("each field state needs >= 2 matching (n, tan_delta) points")
        if np.any(n <= 0) or np.any(t <= 0):
            raise ValidationError("photon numbers and loss tangents must be positive")
    x0, x1 = np.log10(n0), np.log10(n1)
    if np.ptp(np.r_[x0 - x0.mean(), x1 - x1.mean()]) == 0:
        raise DegenerateFit("photon numbers do not vary within a field state")
    m = np.zeros((len(x0) + len(x1), 3))
    m[:, 0] = -np.r_[x0, x1]
    m[: len(x0), 1] = 1.0
    m[len(x0) :, 2] = 1.0
    y = np.r_[np.log10(t0), np.log10(t1)]
    coef, *_ = np.linalg.lstsq(m, y, rcond=None)
    a, b0, b1 = (float(c) for c in coef)
    if not a > 0:
        raise DegenerateFit(f"fitted slope a = {a:.3g} is not positive")
    dof = len(y) - 3
    a_err = float("nan")
    if dof > 0:
        s2 = np.sum((m @ coef - y) ** 2) / dof
        a_err = float(np.sqrt(s2 * np.linalg.pinv(m.T @ m)[0, 0]))

    curv = []
    for x, t in ((x0, t0), (x1, t1)):
        curv.append(float(np.polyfit(x, np.log10(t), 2)[0]) if len(x) >= 4 else 0.0)
    if max(abs(c) for c in curv) > curvature_tol:
        warnings.warn(
            f"log-log curvature {curv} exceeds {curvature_tol}; data may not satisfy n >> n_c",
            RegimeViolation,
            stacklevel=2,
        )
    if not BETA_BOUNDS[0] <= 2 * a <= BETA_BOUNDS[1]:
        warnings.warn(f"implied beta = {2 * a:.3g} outside {BETA_BOUNDS}", RegimeViolation, stacklevel=2)
    return LogLogFit(a, b0, b1, 10.0 ** ((b0 - b1) / a), a_err, tuple(curv))


def temperature_from_excited_population(f_hz, p_excited):
    """Temperature of a two-level thermal state with excited fraction ``p_excited``."""
    if not 0 < p_excited < 0.5:
        raise ValidationError("excited population must lie in (0, 0.5)")
    return const.H * f_hz / (const.K_B * math.log((1 - p_excited) / p_excited))


def excited_population(f_hz, T_kelvin):
    return 1.0 / (1.0 + math.exp(const.H * f_hz / (const.K_B * T_kelvin)))


def predict_saturation_curve(
    params,
    n_photons,
    rabi_per_sqrt_photon,
    tan_delta_unsaturated=1.0,
    field_on=False,
    method="analytic",
):
    """Loss tangent vs photon number from the four-level steady state.

    The drive is |Omega|^2 = g^2 n with ``g = rabi_per_sqrt_photon`` (rad/s),
    and tan_delta scales with (rho_11 - rho_33) normalized to its undriven value.
    ``method='numeric'`` uses the full Liouvillian null space instead of the
    closed forms.
    """
    n = np.atleast_1d(np.asarray(n_photons, dtype=float))
    if np.any(n < 0):
        raise ValidationError("photon numbers must be >= 0")
    ref = lb.thermal_population_difference(params.nbar)
    out = np.empty_like(n)
    for i, ni in enumerate(n):
        p = params.with_omega(rabi_per_sqrt_photon * math.sqrt(ni))
        if method == "analytic":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", lb.ApproximationInvalid)
                rho = (lb.steady_state_analytic_field if field_on else lb.steady_state_analytic_zero_field)(p)
        elif method == "numeric":
            rho = lb.steady_state_numeric(lb.build_liouvillian(p, field_on), np.eye(4) / 4)
        else:
            raise ValidationError(f"unknown method {method!r}")
        out[i] = tan_delta_unsaturated * lb.population_difference(rho) / ref
    return out if np.ndim(n_photons) else float(out[0])


def critical_photon_number(params, rabi_per_sqrt_photon, field_on=False):
    """Photon number at which the predicted loss falls by sqrt(2)."""
    om = lb.critical_rabi_field(params) if field_on else lb.critical_rabi_zero_field(params)
    return (om / rabi_per_sqrt_photon) ** 2
