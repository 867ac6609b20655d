"""Physical constants (CODATA 2018, exact where SI defines them) and unit converters.

Every module pulls constants from here so there is a single table to audit.
"""

import math

import scipy.constants as _sc

H = _sc.h  # J s
HBAR = _sc.hbar  # J s
K_B = _sc.k  # J / K
MU_B = _sc.physical_constants["Bohr magneton"][0]  # J / T
EPS0 = _sc.epsilon_0  # F / m
E_CHARGE = _sc.e  # C
EV = _sc.e  # J per eV
DEBYE = 1e-21 / _sc.c  # C m per debye
GAUSS = 1e-4  # T per gauss

CONSTANTS = {
    "h_J_s": H,
    "hbar_J_s": HBAR,
    "k_B_J_per_K": K_B,
    "mu_B_J_per_T": MU_B,
    "epsilon_0_F_per_m": EPS0,
    "debye_C_m": DEBYE,
    "eV_J": EV,
}


def joule_to_hz(energy):
    return energy / H


def hz_to_joule(freq):
    return freq * H


def ev_to_joule(energy_ev):
    return energy_ev * EV


def joule_to_ev(energy):
    return energy / EV


def debye_to_si(dipole_debye):
    return dipole_debye * DEBYE


def per_cm3_to_per_m3(density):
    return density * 1e6


def dbm_to_watts(power_dbm):
    return 1e-3 * 10.0 ** (power_dbm / 10.0)


def watts_to_dbm(power_w):
    return 10.0 * math.log10(power_w / 1e-3)
