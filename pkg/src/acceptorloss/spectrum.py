"""Participation-weighted acceptor loss: susceptibility, P(f0), loss tangents.

Frequencies are ordinary (Hz). Dopant densities enter in cm^-3 and dipoles in
debye; both are converted to SI inside the formulas.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import stats

from . import constants as const
from . import kernels
from .acceptor import AcceptorParams
from .errors import DegenerateFit, InvalidStrainCell, NegativeWeight, ValidationError

SILICON_EPS_R = 11.7
DEFAULT_LINEWIDTH_HZ = 1e6
DEFAULT_BIN_WIDTH_HZ = 0.5e9
DEFAULT_MAX_HZ = 150e9
PARTICIPATION_TOL = 1e-6


@dataclass(frozen=True)
class DopantSpec:
    """Acceptor ensemble.

    ``dipole_debye`` is the effective dipole seen by the resonator field, so
    any orientation average (e.g. sqrt(1/3)) is already folded in.
    """

    concentration_cm3: float
    dipole_debye: float
    dielectric_constant: float = SILICON_EPS_R

    def __post_init__(self):
        if self.concentration_cm3 < 0:
            raise ValidationError("dopant concentration must be >= 0")
        if not self.dielectric_constant > 1:
            raise ValidationError("dielectric constant must be > 1")

    def chi_weight(self):
        """mu^2 N / (2 eps0 hbar) in s^-1: the frequency integral of chi''."""
        mu = const.debye_to_si(self.dipole_debye)
        n = const.per_cm3_to_per_m3(self.concentration_cm3)
        return mu * mu * n / (2.0 * const.EPS0 * const.HBAR)


@dataclass
class StrainField:
    """Cross-section cells with strain and electric-energy participation.

    positions_um: (n, 2); weights: (n,) participation p(r) dV per cell;
    strain: (n, 6) columns Sxx, Syy, Szz, Sxy, Syz, Szx.
    """

    positions_um: np.ndarray
    weights: np.ndarray
    strain: np.ndarray
    total_bulk_participation: float = None
    label: str = ""

    def __post_init__(self):
        self.positions_um = np.asarray(self.positions_um, dtype=float).reshape(-1, 2)
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        self.strain = np.ascontiguousarray(self.strain, dtype=float).reshape(-1, 6)
        n = len(self.weights)
        if len(self.positions_um) != n or len(self.strain) != n:
            raise ValidationError("positions, weights and strain differ in length")
        bad = np.flatnonzero(~(self.weights >= 0))
        if bad.size:
            raise NegativeWeight(f"negative or non-finite weight in cells {bad.tolist()}")
        total = float(self.weights.sum())
        if self.total_bulk_participation is None:
            self.total_bulk_participation = total
        if abs(total - self.total_bulk_participation) > PARTICIPATION_TOL:
            raise ValidationError(
                f"cell weights sum to {total:.9g}, metadata says {self.total_bulk_participation:.9g}"
            )
        if self.total_bulk_participation > 1 + PARTICIPATION_TOL:
            raise ValidationError("total bulk participation exceeds 1")

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class SplittingMap:
    weights: np.ndarray
    splitting_hz: np.ndarray

    @property
    def total(self):
        return float(self.weights.sum())


@dataclass
class LossSpectrum:
    bin_edges_hz: np.ndarray
    P_per_hz: np.ndarray
    label: str = field(default="")

    def __post_init__(self):
        self.bin_edges_hz = np.asarray(self.bin_edges_hz, dtype=float)
        self.P_per_hz = np.asarray(self.P_per_hz, dtype=float)
        if len(self.bin_edges_hz) != len(self.P_per_hz) + 1:
            raise ValidationError("need one more edge than bins")
        if np.any(np.diff(self.bin_edges_hz) <= 0):
            raise ValidationError("bin edges must be strictly ascending")
        if np.any(self.P_per_hz < 0):
            raise ValidationError("P(f0) must be >= 0")

    @property
    def widths_hz(self):
        return np.diff(self.bin_edges_hz)

    @property
    def centers_hz(self):
        return 0.5 * (self.bin_edges_hz[1:] + self.bin_edges_hz[:-1])

    @property
    def total(self):
        return float(np.sum(self.P_per_hz * self.widths_hz))

    def value_at(self, f_hz):
        """P (1/Hz) of the bin containing ``f_hz``; zero outside the edges."""
        f = np.asarray(f_hz, dtype=float)
        idx = np.searchsorted(self.bin_edges_hz, f, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.P_per_hz))
        out = np.where(inside, self.P_per_hz[np.clip(idx, 0, len(self.P_per_hz) - 1)], 0.0)
        return float(out) if out.ndim == 0 else out


def default_bins(width_hz=DEFAULT_BIN_WIDTH_HZ, max_hz=DEFAULT_MAX_HZ):
    n = int(round(max_hz / width_hz))
    return np.linspace(0.0, n * width_hz, n + 1)


def lorentzian(f_hz, f0_hz, linewidth_hz):
    """Unit-area Lorentzian in ordinary frequency; ``linewidth_hz`` is the FWHM."""
    hw = 0.5 * linewidth_hz
    return (hw / math.pi) / ((np.asarray(f_hz) - f0_hz) ** 2 + hw * hw)


def susceptibility_im(f_hz, f0_hz, linewidth_hz, dopant):
    if not linewidth_hz > 0:
        raise ValidationError("linewidth must be > 0")
    return dopant.chi_weight() * lorentzian(f_hz, f0_hz, linewidth_hz)


def splitting_map(strain_field, params=AcceptorParams()):
    """Orbital splitting of every cell at zero electric and magnetic field."""
    split_j = kernels.orbital_splittings(
        strain_field.strain,
        const.ev_to_joule(params.gamma_b),
        const.ev_to_joule(params.gamma_b_prime),
    )
    bad = np.flatnonzero(~np.isfinite(split_j))
    if bad.size:
        raise InvalidStrainCell(bad)
    return SplittingMap(strain_field.weights.copy(), split_j / const.H)


def weighted_participation(mapped, bins=None):
    """Histogram participation weights over splitting frequency, per Hz.

    Each cell contributes a delta at its splitting. Splittings beyond the
    supplied edges get an extra overflow (or underflow) bin so that no weight
    is lost.
    """
    edges = default_bins() if bins is None else np.asarray(bins, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValidationError("bins must be at least two strictly ascending edges")
    s = np.ascontiguousarray(mapped.splitting_hz, dtype=float)
    if s.size:
        hi, lo = s.max(), s.min()
        if hi > edges[-1]:
            edges = np.append(edges, np.nextafter(hi, np.inf))
        if lo < edges[0]:
            edges = np.insert(edges, 0, np.nextafter(lo, -np.inf))
    hist = kernels.weighted_histogram(s, np.ascontiguousarray(mapped.weights, dtype=float), edges)
    return LossSpectrum(edges, hist / np.diff(edges))


def loss_tangent_narrowband(P_per_hz, dopant):
    """mu^2 P N / (2 eps0 eps_r hbar) for a P(f0) that is flat over the linewidth."""
    if np.any(np.asarray(P_per_hz) < 0):
        raise ValidationError("P must be >= 0")
    return dopant.chi_weight() * np.asarray(P_per_hz) / dopant.dielectric_constant


def quality_factor(tan_delta):
    return 1.0 / tan_delta


def loss_tangent_full(spectrum, f_hz, linewidth_hz=DEFAULT_LINEWIDTH_HZ, dopant=None):
    """Frequency integral of P(f0) chi''(f, f0) / eps_r with P piecewise constant.

    Each bin's Lorentzian is integrated exactly over the bin, so a bin much
    wider than the linewidth reproduces the narrowband formula and a bin much
    narrower acts as a delta at its center.
    """
    if dopant is None:
        raise ValidationError("dopant is required")
    if not linewidth_hz > 0:
        raise ValidationError("linewidth must be > 0")
    f = np.atleast_1d(np.asarray(f_hz, dtype=float))[:, None]
    hw = 0.5 * linewidth_hz
    lo, hi = spectrum.bin_edges_hz[:-1], spectrum.bin_edges_hz[1:]
    frac = (np.arctan((hi - f) / hw) - np.arctan((lo - f) / hw)) / math.pi
    out = dopant.chi_weight() * (frac @ spectrum.P_per_hz) / dopant.dielectric_constant
    return float(out[0]) if np.ndim(f_hz) == 0 else out


@dataclass(frozen=True)
class DopingFit:
    """log10 Q = -log10(a rho) with the slope pinned to -1."""

    a: float  # cm^3
    log10_a_stderr: float
    dof: int

    def predicted_q(self, concentration_cm3):
        return 1.0 / (self.a * np.asarray(concentration_cm3, dtype=float))

    def confidence_band(self, concentration_cm3, level=0.95):
        """Lower and upper Q at each concentration from the intercept uncertainty."""
        q = self.predicted_q(concentration_cm3)
        if self.dof < 1:
            return q, q
        k = stats.t.ppf(0.5 + level / 2.0, self.dof) * self.log10_a_stderr
        return q * 10.0**-k, q * 10.0**k


def doping_fit(points):
    """Fit ``[(concentration_cm3, Q), ...]`` to Q = 1 / (a rho)."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 2:
        raise ValidationError("need at least two (concentration, Q) points")
    if np.any(arr <= 0):
        raise ValidationError("concentrations and Q must be positive")
    rho, q = arr.T
    if np.all(rho == rho[0]):
        raise DegenerateFit("all concentrations are equal")
    # log10 a = -(log10 Q + log10 rho), least squares gives the mean
    y = -(np.log10(q) + np.log10(rho))
    log_a = float(y.mean())
    dof = len(y) - 1
    stderr = float(y.std(ddof=1) / math.sqrt(len(y))) if dof > 0 else 0.0
    return DopingFit(10.0**log_a, stderr, dof)


def compare_loss_channels(
    tls_density_per_cm3_per_ghz,
    tls_participation,
    acceptor_density_per_cm3_per_ghz,
    acceptor_participation,
):
    """Acceptor-to-TLS loss ratio for equal dipoles."""
    vals = (
        tls_density_per_cm3_per_ghz,
        tls_participation,
        acceptor_density_per_cm3_per_ghz,
        acceptor_participation,
    )
    if any(not v > 0 for v in vals):
        raise ValidationError("densities and participations must be positive")
    return (acceptor_density_per_cm3_per_ghz * acceptor_participation) / (
        tls_density_per_cm3_per_ghz * tls_participation
    )


def synthetic_strain_map(
    half_width_um=120.0,
    depth_um=60.0,
    nx=241,
    ny=121,
    edges_um=(25.0, 58.75),
    peak_strain=2e-5,
    decay_um=3.0,
    total_participation=0.92,
):
    """Illustrative thermal-strain cross-section under a coplanar waveguide.

    Not measured or simulated data: strain falls off as a Lorentzian in the
    distance from each metal edge (peak ``peak_strain``), and the participation
    weight follows the same edge-concentrated profile of |E|^2. Weights are
    normalized to ``total_participation``.
    """
    x = np.linspace(0.0, half_width_um, nx)
    y = np.linspace(0.0, depth_um, ny)
    xx, yy = np.meshgrid(x, y, indexing="xy")
    strain = np.zeros(xx.shape + (6,))
    energy = np.zeros(xx.shape)
    for k, edge in enumerate(edges_um):
        dx = xx - edge
        r2 = dx * dx + yy * yy + (0.25 * decay_um) ** 2
        prof = decay_um**2 / (r2 + decay_um**2)
        ang = np.arctan2(yy, dx)
        sign = 1.0 if k % 2 == 0 else -1.0
        strain[..., 2] += sign * peak_strain * prof * np.cos(ang) ** 2
        strain[..., 0] -= 0.5 * sign * peak_strain * prof * np.cos(ang) ** 2
        strain[..., 1] -= 0.5 * sign * peak_strain * prof * np.sin(ang) ** 2
        strain[..., 5] += 0.6 * peak_strain * prof * np.sin(2 * ang)
        strain[..., 4] += 0.15 * peak_strain * prof * np.cos(ang)
        energy += 1.0 / (r2 + (2 * decay_um) ** 2)
    weights = energy / energy.sum() * total_participation
    positions = np.stack([xx.ravel(), yy.ravel()], axis=1)
    return StrainField(
        positions,
        weights.ravel(),
        strain.reshape(-1, 6),
        total_participation,
        label="synthetic edge-strain map (illustrative, not from measurement)",
    )
