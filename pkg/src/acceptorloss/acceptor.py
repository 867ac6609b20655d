"""Boron acceptor (effective spin-3/2) and standard-tunneling-model Hamiltonians.

All matrices are written in the angular-momentum basis ordered
``m = +3/2, +1/2, -1/2, -3/2`` and carry energies in joules.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import constants as const
from .errors import ValidationError


@dataclass(frozen=True)
class SpinOperators:
    Jx: np.ndarray
    Jy: np.ndarray
    Jz: np.ndarray

    def __iter__(self):
        return iter((self.Jx, self.Jy, self.Jz))


@dataclass(frozen=True)
class AcceptorParams:
    """Linear-response coefficients of the boron ground state.

    g1, g2 are dimensionless g-factors, p_b is the electric dipole in debye,
    gamma_b and gamma_b_prime are deformation potentials in eV.
    """

    g1: float = -1.07
    g2: float = -0.03
    p_b: float = 0.26
    gamma_b: float = -1.42
    gamma_b_prime: float = -3.7


@dataclass(frozen=True)
class StrainTensor:
    Sxx: float = 0.0
    Syy: float = 0.0
    Szz: float = 0.0
    Sxy: float = 0.0
    Syz: float = 0.0
    Szx: float = 0.0

    @classmethod
    def from_array(cls, values):
        values = [float(v) for v in values]
        if len(values) != 6:
            raise ValidationError("strain tensor needs six components")
        return cls(*values)

    def as_array(self):
        return np.array([self.Sxx, self.Syy, self.Szz, self.Sxy, self.Syz, self.Szx])

    def matrix(self):
        return np.array(
            [
                [self.Sxx, self.Sxy, self.Szx],
                [self.Sxy, self.Syy, self.Syz],
                [self.Szx, self.Syz, self.Szz],
            ]
        )

    def __mul__(self, c):
        return StrainTensor.from_array(c * self.as_array())

    __rmul__ = __mul__


@dataclass(frozen=True)
class FieldVector:
    """Cartesian vector; tesla for magnetic fields, V/m for electric fields."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValidationError(f"non-finite field components {self}")

    def as_array(self):
        return np.array([self.x, self.y, self.z], dtype=float)

    def __mul__(self, c):
        return FieldVector(c * self.x, c * self.y, c * self.z)

    __rmul__ = __mul__


@dataclass(frozen=True)
class TlsParams:
    """Standard tunneling model defect.

    eps0 and delta0 are energies expressed as frequencies (E/h, Hz); gamma is
    the deformation potential in eV and p the electric dipole in debye.
    """

    eps0: float
    delta0: float
    gamma: float = 1.0
    p: float = 3.0

    def __post_init__(self):
        if self.delta0 < 0:
            raise ValidationError("tunneling energy delta0 must be >= 0")

    @property
    def splitting_hz(self):
        return math.hypot(self.eps0, self.delta0)


@dataclass(frozen=True)
class LevelStructure:
    eigenvalues: np.ndarray  # J, ascending
    eigenvectors: np.ndarray  # columns, same basis as the Hamiltonian
    orbital_splitting_hz: float
    zeeman_lower_hz: float
    zeeman_upper_hz: float
    hamiltonian: np.ndarray = field(repr=False, default=None)


_SPIN = None


def build_spin_operators():
    """Spin-3/2 matrices from the ladder operators."""
    global _SPIN
    if _SPIN is None:
        j = 1.5
        m = np.array([1.5, 0.5, -0.5, -1.5])
        jp = np.zeros((4, 4), dtype=complex)
        # J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>; index i-1 holds m+1
        for i in range(1, 4):
            jp[i - 1, i] = math.sqrt(j * (j + 1) - m[i] * (m[i] + 1))
        jm = jp.conj().T
        jx = 0.5 * (jp + jm)
        jy = -0.5j * (jp - jm)
        jz = np.diag(m).astype(complex)
        for op in (jx, jy, jz):
            op.flags.writeable = False
        _SPIN = SpinOperators(jx, jy, jz)
    return _SPIN


def _anticommutator(a, b):
    return a @ b + b @ a


def hamiltonian_magnetic(params, B):
    """Zeeman term mu_B [g1 (J.B) + g2 (Jx^3 Bx + Jy^3 By + Jz^3 Bz)] in joules."""
    jx, jy, jz = build_spin_operators()
    linear = jx * B.x + jy * B.y + jz * B.z
    cubic = (jx @ jx @ jx) * B.x + (jy @ jy @ jy) * B.y + (jz @ jz @ jz) * B.z
    return const.MU_B * (params.g1 * linear + params.g2 * cubic)


def hamiltonian_electric(params, E):
    """Stark term (p_B / sqrt 3)(Ex {Jy,Jz} + Ey {Jz,Jx} + Ez {Jx,Jy}) in joules."""
    jx, jy, jz = build_spin_operators()
    p = const.debye_to_si(params.p_b) / math.sqrt(3.0)
    return p * (
        E.x * _anticommutator(jy, jz)
        + E.y * _anticommutator(jz, jx)
        + E.z * _anticommutator(jx, jy)
    )


def hamiltonian_strain(params, S):
    """Bir-Pikus strain term in joules."""
    jx, jy, jz = build_spin_operators()
    gb = const.ev_to_joule(params.gamma_b)
    gbp = const.ev_to_joule(params.gamma_b_prime) / math.sqrt(3.0)
    return gb * (S.Sxx * jx @ jx + S.Syy * jy @ jy + S.Szz * jz @ jz) + gbp * (
        S.Sxy * _anticommutator(jx, jy)
        + S.Syz * _anticommutator(jy, jz)
        + S.Szx * _anticommutator(jz, jx)
    )


def acceptor_hamiltonian(params, S=None, E=None, B=None):
    h = np.zeros((4, 4), dtype=complex)
    if S is not None:
        h = h + hamiltonian_strain(params, S)
    if E is not None:
        h = h + hamiltonian_electric(params, E)
    if B is not None:
        h = h + hamiltonian_magnetic(params, B)
    return h


def level_structure(params, S=None, E=None, B=None):
    """Diagonalize H_S + H_E + H_B.

    The orbital splitting is the gap between the means of the upper and lower
    eigenvalue pairs, which stays meaningful when the Zeeman term splits the
    Kramers doublets. Eigenvectors inside a degenerate pair are not
    canonicalized.
    """
    h = acceptor_hamiltonian(params, S, E, B)
    h = 0.5 * (h + h.conj().T)
    w, v = np.linalg.eigh(h)
    w_hz = w / const.H
    return LevelStructure(
        eigenvalues=w,
        eigenvectors=v,
        orbital_splitting_hz=0.5 * (w_hz[2] + w_hz[3]) - 0.5 * (w_hz[0] + w_hz[1]),
        zeeman_lower_hz=w_hz[1] - w_hz[0],
        zeeman_upper_hz=w_hz[3] - w_hz[2],
        hamiltonian=h,
    )


_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
_SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def tls_hamiltonian(params, S=0.0, E=0.0):
    """Two-level STM Hamiltonian (joules) in the energy eigenbasis of the unperturbed TLS.

    ``S`` and ``E`` are the projections of strain and electric field on the
    defect's elastic and electric dipoles (dimensionless, V/m).
    """
    de = params.splitting_hz
    if de == 0:
        raise ValidationError("TLS splitting sqrt(eps0^2 + delta0^2) must be nonzero")
    coupling = const.ev_to_joule(params.gamma) * S + const.debye_to_si(params.p) * E
    de_j = const.hz_to_joule(de)
    return 0.5 * de_j * _SIGMA_Z + coupling * (
        (params.eps0 / de) * _SIGMA_Z + (params.delta0 / de) * _SIGMA_X
    )
