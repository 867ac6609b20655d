"""Driven, phonon-damped four-level acceptor dynamics.

Levels are labelled 1..4 (array indices 0..3): |1>, |2> form the lower orbital
branch and |3>, |4> the upper one. The resonant drive couples 1<->3 and 2<->4.
All rates and frequencies are angular (s^-1, rad/s) and the Hamiltonian is
stored as H/hbar. Density matrices are vectorized row-major, so
``vec(A rho B) = kron(A, B.T) vec(rho)``.
"""

from dataclasses import dataclass, replace
import math
import warnings

import numpy as np
from scipy import linalg, optimize
from scipy.integrate import solve_ivp

from . import constants as const
from .errors import (
    ApproximationInvalid,
    DegenerateSteadyState,
    StepFailure,
    ValidationError,
    ZeroTemperatureSaturation,
)

SQRT2 = math.sqrt(2.0)
# secular-approximation guard for the in-field closed forms
SECULAR_RATIO = 10.0


@dataclass(frozen=True)
class FourLevelParams:
    gamma_prime: float
    gamma_tilde: float = 0.0
    nbar: float = 0.0
    omega_rabi: complex = 0.0
    delta_big: float = 0.0
    delta_small: float = 0.0
    gamma_spin: float = 0.0  # |1> <-> |2> relaxation, neglected by default

    def __post_init__(self):
        if not self.gamma_prime > 0:
            raise ValidationError("gamma_prime must be > 0")
        if self.gamma_tilde < 0:
            raise ValidationError("gamma_tilde must be >= 0")
        if self.nbar < 0:
            raise ValidationError("nbar must be >= 0")
        if self.gamma_spin < 0:
            raise ValidationError("gamma_spin must be >= 0")

    @property
    def gamma_total(self):
        return self.gamma_prime + self.gamma_tilde

    @property
    def branching(self):
        return self.gamma_tilde / self.gamma_prime

    def pumping_rate(self):
        return 4.0 * abs(self.omega_rabi) ** 2 / ((1.0 + 2.0 * self.nbar) * self.gamma_total)

    def with_omega(self, omega):
        return replace(self, omega_rabi=omega)


@dataclass(frozen=True)
class Liouvillian:
    matrix: np.ndarray
    params: FourLevelParams
    field_on: bool

    def __call__(self, rho):
        return (self.matrix @ np.asarray(rho, dtype=complex).reshape(16)).reshape(4, 4)


def _ket_bra(i, j):
    op = np.zeros((4, 4), dtype=complex)
    op[i - 1, j - 1] = 1.0
    return op


def collapse_operators(p):
    """The eight phonon-assisted jump operators C1..C8 (rates folded in)."""
    n, gp, gt = p.nbar, p.gamma_prime, p.gamma_tilde
    return [
        math.sqrt(n * gp) * _ket_bra(3, 1),
        math.sqrt((n + 1) * gp) * _ket_bra(1, 3),
        math.sqrt(n * gt) * _ket_bra(3, 2),
        math.sqrt((n + 1) * gt) * _ket_bra(2, 3),
        math.sqrt(n * gt) * _ket_bra(4, 1),
        math.sqrt((n + 1) * gt) * _ket_bra(1, 4),
        math.sqrt(n * gp) * _ket_bra(4, 2),
        math.sqrt((n + 1) * gp) * _ket_bra(2, 4),
    ]


def spin_relaxation_operators(p):
    if p.gamma_spin == 0:
        return []
    g = math.sqrt(p.gamma_spin)
    return [g * _ket_bra(1, 2), g * _ket_bra(2, 1)]


def rotating_frame_hamiltonian(p, field_on):
    """H/hbar in rad/s for a resonant drive of the 1-3 and 2-4 transitions."""
    om = complex(p.omega_rabi)
    h = om.conjugate() * (_ket_bra(1, 3) + _ket_bra(2, 4)) + om * (_ket_bra(3, 1) + _ket_bra(4, 2))
    if field_on:
        h = h + p.delta_big * _ket_bra(2, 2) + p.delta_small * _ket_bra(4, 4)
    return h


def _dissipator(c):
    eye = np.eye(4)
    cdc = c.conj().T @ c
    return np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T)


def build_liouvillian(p, field_on=False):
    eye = np.eye(4)
    h = rotating_frame_hamiltonian(p, field_on)
    mat = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for c in collapse_operators(p) + spin_relaxation_operators(p):
        mat = mat + _dissipator(c)
    return Liouvillian(mat, p, bool(field_on))


def _as_matrix(L):
    return L.matrix if isinstance(L, Liouvillian) else np.asarray(L, dtype=complex)


def _normalize(rho):
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def steady_state_numeric(L, initial=None, rtol=1e-10):
    """Null vector of the Liouvillian, normalized to unit trace.

    When the null space is more than one dimensional the stationary state
    depends on where the system starts. Without ``initial`` this raises
    :class:`DegenerateSteadyState`; with it, ``initial`` is projected onto the
    null space with the biorthogonal spectral projector, which is the
    ``t -> inf`` limit of ``exp(L t)`` applied to ``initial``.
    """
    mat = _as_matrix(L)
    u, s, vh = linalg.svd(mat)
    k = int(np.sum(s <= rtol * s[0])) if s[0] > 0 else mat.shape[0]
    if k == 1:
        return _normalize(vh[-1].conj().reshape(4, 4))
    if k == 0:
        raise DegenerateSteadyState(0)
    if initial is None:
        raise DegenerateSteadyState(k)
    right = vh[-k:].conj().T
    left = u[:, -k:]
    proj = right @ np.linalg.solve(left.conj().T @ right, left.conj().T)
    return _normalize((proj @ np.asarray(initial, dtype=complex).reshape(16)).reshape(4, 4))


def populations(rho):
    return np.real(np.diag(rho)).copy()


def population_difference(rho):
    """rho_11 - rho_33, the quantity that sets the resonant loss."""
    return float(np.real(rho[0, 0] - rho[2, 2]))


def thermal_population_difference(nbar):
    return 1.0 / (4.0 * nbar + 2.0)


def steady_state_analytic_zero_field(p):
    r = p.pumping_rate()
    g = p.gamma_total
    n = p.nbar
    den = (1 + 2 * n) * g + 2 * r
    ground = 0.5 * ((1 + n) * g + r) / den
    excited = 0.5 * (n * g + r) / den
    return np.diag([ground, ground, excited, excited]).astype(complex)


def steady_state_analytic_field(p):
    """Closed-form populations with the 2-4 transition detuned out of resonance.

    Coherences on the detuned transitions are dropped, which requires
    |Delta - delta| >> |Omega|; an :class:`ApproximationInvalid` warning is
    issued below ``SECULAR_RATIO``.
    """
    om = abs(p.omega_rabi)
    if om > 0 and abs(p.delta_big - p.delta_small) < SECULAR_RATIO * om:
        warnings.warn(
            f"|Delta - delta| = {abs(p.delta_big - p.delta_small):.3g} is below "
            f"{SECULAR_RATIO:g} |Omega| = {SECULAR_RATIO * om:.3g}",
            ApproximationInvalid,
            stacklevel=2,
        )
    n, gp, gt = p.nbar, p.gamma_prime, p.gamma_tilde
    g = gp + gt
    r = p.pumping_rate()
    nn = n * (1 + n)
    den = r * (1 + 8 * nn) * gp + r * (1 + 2 * n) ** 2 * gt + 4 * nn * (1 + 2 * n) * gp * g
    if den == 0:
        # nbar = 0 and no drive: the zero-drive thermal state
        return steady_state_analytic_zero_field(p.with_omega(0.0))
    r11 = nn * (2 * (1 + n) * gp * g + r * (2 * gp + gt))
    r22 = (1 + n) * (2 * nn * gp * g + r * (gp + 2 * n * gp + gt + n * gt))
    r33 = nn * (2 * n * gp * g + r * (2 * gp + gt))
    r44 = n * (2 * nn * gp * g + r * (gp + 2 * n * gp + n * gt))
    return np.diag(np.array([r11, r22, r33, r44]) / den).astype(complex)


def critical_rabi_zero_field(p):
    """|Omega_c| (rad/s) at which rho_11 - rho_33 falls to 1/sqrt(2) of thermal."""
    g = p.gamma_total
    if not g > 0:
        raise ValidationError("gamma_prime + gamma_tilde must be > 0")
    sq = g**2 / 8.0 * (2 * p.nbar + 1) ** 2 * (SQRT2 - 1)
    return math.sqrt(sq)


def critical_rabi_field(p):
    """|Omega_c| (rad/s) with the 2-4 transition detuned (dark-state pumping)."""
    n, gp, gt = p.nbar, p.gamma_prime, p.gamma_tilde
    if n == 0:
        raise ZeroTemperatureSaturation(
            "at nbar = 0 dark-state pumping saturates at vanishing drive (Omega_c = 0)"
        )
    nn = n * (1 + n)
    num = nn * (1 + 2 * n) ** 2 * gp * (gp + gt) ** 2 * (SQRT2 - 1)
    den = gp + 8 * nn * gp + gt + 4 * nn * gt
    return math.sqrt(num / den)


def saturation_ratio(nbar, branching):
    """P_c(B=0) / P_c(B>0) = |Omega_c(B=0) / Omega_c(B>0)|^2."""
    if not nbar > 0:
        raise ValidationError("nbar must be > 0")
    if branching < 0:
        raise ValidationError("branching ratio must be >= 0")
    x = 8.0 * nbar * (nbar + 1.0)
    return 1.0 + 1.0 / x + branching / x + branching / 2.0


def nbar_from_temperature(f_hz, T_kelvin):
    if not (T_kelvin > 0 and f_hz > 0):
        raise ValidationError("frequency and temperature must be > 0")
    x = const.H * f_hz / (const.K_B * T_kelvin)
    if x > 700.0:
        return math.exp(-x)  # expm1 would overflow; 1/(e^x - 1) = e^-x here
    return 1.0 / math.expm1(x)


def temperature_from_nbar(f_hz, nbar):
    if not (nbar > 0 and f_hz > 0):
        raise ValidationError("frequency and nbar must be > 0")
    return const.H * f_hz / (const.K_B * math.log1p(1.0 / nbar))


def critical_rabi_numeric(p, field_on=False, initial=None):
    """Root-find the saturation condition on the full 16-component steady state.

    Useful outside the secular regime where the closed forms do not apply.
    """
    target = thermal_population_difference(p.nbar) / SQRT2
    guess = critical_rabi_zero_field(p)

    def excess(om):
        rho = steady_state_numeric(build_liouvillian(p.with_omega(om), field_on), initial)
        return population_difference(rho) - target

    hi = guess
    while excess(hi) > 0:
        hi *= 2.0
    return optimize.brentq(excess, 0.0, hi, xtol=1e-14 * hi, rtol=1e-13)


def evolve(L, rho0, t, method="expm", rtol=1e-10, atol=1e-12):
    """Propagate ``rho0`` for time ``t`` (s) under the Liouvillian."""
    if t < 0:
        raise ValidationError("t must be >= 0")
    mat = _as_matrix(L)
    v0 = np.asarray(rho0, dtype=complex).reshape(16)
    if t == 0:
        return v0.reshape(4, 4).copy()
    if method == "expm":
        v = linalg.expm(mat * t) @ v0
    elif method == "ode":
        sol = solve_ivp(
            lambda _, y: mat @ y, (0.0, t), v0, method="DOP853", rtol=rtol, atol=atol
        )
        if not sol.success:
            raise StepFailure(sol.message)
        v = sol.y[:, -1]
    else:
        raise ValidationError(f"unknown method {method!r}")
    rho = v.reshape(4, 4)
    if abs(np.trace(rho) - np.trace(v0.reshape(4, 4))) > 1e-9:
        raise StepFailure("trace drifted beyond 1e-9")
    return rho


def is_density_matrix(rho, tol=1e-10):
    rho = np.asarray(rho)
    if np.linalg.norm(rho - rho.conj().T) > tol:
        return False
    if abs(np.trace(rho) - 1.0) > tol:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() >= -tol)
