"""Regenerate the small input files used by the README examples.

Run from the repository root: ``python3 sample_data/make_sample_data.py``.
Output is deterministic (fixed seed).
"""

import pathlib

import numpy as np

from acceptorloss.formats import write_s21_csv, write_table
from acceptorloss.resonator import ResonatorFit, S21Trace, SaturationFitParams, s21_model, saturation_model

HERE = pathlib.Path(__file__).resolve().parent
rng = np.random.default_rng(2024)

# notch trace: Qi = 2e5, Qc = 5e4, SNR 100
truth = ResonatorFit(a=0.7, phi=0.4, tau=1.5e-9, f0=6.1e9, Q=4e4, Qc=5e4, df=2e3)
lw = truth.f0 / truth.Q
f = np.linspace(truth.f0 - 5 * lw, truth.f0 + 5 * lw, 801)
z = s21_model(truth, f)
z += truth.a / (100 * np.sqrt(2)) * (rng.standard_normal(f.size) + 1j * rng.standard_normal(f.size))
write_s21_csv(S21Trace(f, z), HERE / "s21_notch.csv")

# Q vs doping with Q = 1/(a N), a = 3e-22 cm^3, 5 % scatter
n = np.array([3e14, 1e15, 3e15, 1e16, 3e16])
write_table(HERE / "doping.csv", {"concentration_cm3": n, "q": np.exp(0.05 * rng.standard_normal(5)) / (3e-22 * n)})

# loss vs photon number, zero field n_c = 1e3 and in field n_c = 1e2
photons, tan_delta, field_on = [], [], []
n_ph = np.logspace(5, 7, 12)
for on, nc in ((0, 1e3), (1, 1e2)):
    t = saturation_model(n_ph, SaturationFitParams(1e-6, nc, 1.0))
    photons += list(n_ph)
    tan_delta += list(t * np.exp(0.03 * rng.standard_normal(n_ph.size)))
    field_on += [on] * n_ph.size
write_table(HERE / "saturation.csv", {"photons": photons, "tan_delta": tan_delta, "field_on": field_on})
