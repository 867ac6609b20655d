"""Command implementations shared by the CLI and the sweep runner.

Each command takes a :class:`RunConfig` and returns ``(outputs, curves)``:
a dict of named scalars (and short lists) for the record, and a dict of
``name -> {column: array}`` tables to be written as flat CSV files.
"""

import math
import warnings

import numpy as np

from . import constants as const
from . import lindblad as lb
from . import resonator as rs
from . import spectrum as sp
from .acceptor import AcceptorParams, FieldVector, StrainTensor, level_structure
from .config import ConfigError
from .formats import SHIPPED_STRAIN_MAP, parse_s21_csv, parse_strain_map, read_table
from .errors import ValidationError


def _require(config, dotted):
    value = config.get(dotted)
    if value is None:
        raise ConfigError(f"{dotted} is required for this command")
    return value


def acceptor_params(config):
    a = config.acceptor
    return AcceptorParams(a.g1, a.g2, a.p_b_debye, a.gamma_b_ev, a.gamma_b_prime_ev)


def dopant(config):
    d = config.dopant
    return sp.DopantSpec(d.concentration_cm3, d.dipole_debye, d.dielectric_constant)


def resolved_nbar(config):
    lbs, cond = config.lindblad, config.conditions
    if lbs.nbar is not None:
        return lbs.nbar
    if cond.temperature_k is not None:
        return lb.nbar_from_temperature(cond.f0_ghz * 1e9, cond.temperature_k)
    return 0.0


def zeeman_detunings(config):
    """(Delta, delta) in rad/s for an acceptor whose orbital splitting equals f0.

    Explicit config values win. Otherwise uniaxial Szz strain is chosen so the
    zero-field orbital splitting is f0, a field of ``field_gauss`` is applied
    along z, and the lower/upper Kramers splittings give Delta and delta.
    """
    lbs, cond = config.lindblad, config.conditions
    if lbs.delta_big_rad_per_s is not None and lbs.delta_small_rad_per_s is not None:
        return lbs.delta_big_rad_per_s, lbs.delta_small_rad_per_s
    params = acceptor_params(config)
    szz = const.hz_to_joule(cond.f0_ghz * 1e9) / (2 * abs(const.ev_to_joule(params.gamma_b)))
    ls = level_structure(params, S=StrainTensor(Szz=szz), B=FieldVector(z=cond.field_gauss * const.GAUSS))
    big = lbs.delta_big_rad_per_s
    small = lbs.delta_small_rad_per_s
    big = 2 * math.pi * ls.zeeman_lower_hz if big is None else big
    small = 2 * math.pi * ls.zeeman_upper_hz if small is None else small
    return big, small


def four_level_params(config):
    lbs = config.lindblad
    big, small = zeeman_detunings(config)
    return lb.FourLevelParams(
        gamma_prime=lbs.gamma_prime_per_s,
        gamma_tilde=lbs.gamma_tilde_per_s,
        nbar=resolved_nbar(config),
        omega_rabi=lbs.omega_rabi_rad_per_s,
        delta_big=big,
        delta_small=small,
    )


def field_on(config):
    return config.conditions.field_gauss != 0


def cmd_simulate_steady(config):
    p = four_level_params(config)
    on = field_on(config)
    rho = lb.steady_state_numeric(lb.build_liouvillian(p, on), np.eye(4) / 4)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ana = lb.steady_state_analytic_field(p) if on else lb.steady_state_analytic_zero_field(p)
    out = {
        "field_on": on,
        "nbar": p.nbar,
        "delta_big_rad_per_s": p.delta_big if on else 0.0,
        "delta_small_rad_per_s": p.delta_small if on else 0.0,
        "populations": lb.populations(rho).tolist(),
        "populations_analytic": lb.populations(ana).tolist(),
        "population_difference": lb.population_difference(rho),
        "population_difference_thermal": lb.thermal_population_difference(p.nbar),
        "max_abs_analytic_error": float(np.max(np.abs(lb.populations(rho) - lb.populations(ana)))),
        "_warnings": [str(w.message) for w in caught],
    }
    return out, {}


def cmd_critical_rabi(config):
    p = four_level_params(config)
    out = {"nbar": p.nbar, "omega_c_zero_field_rad_per_s": lb.critical_rabi_zero_field(p)}
    if p.nbar > 0:
        out["omega_c_field_rad_per_s"] = lb.critical_rabi_field(p)
        out["saturation_ratio"] = lb.saturation_ratio(p.nbar, p.branching)
    else:
        out["omega_c_field_rad_per_s"] = 0.0
        out["_warnings"] = ["nbar = 0: in-field critical Rabi frequency vanishes"]
    out["omega_c_zero_field_numeric_rad_per_s"] = lb.critical_rabi_numeric(p, False, np.eye(4) / 4)
    return out, {}


def cmd_saturation_ratio(config):
    nbar = resolved_nbar(config)
    b = config.lindblad.gamma_tilde_per_s / config.lindblad.gamma_prime_per_s
    return {"nbar": nbar, "branching": b, "saturation_ratio": lb.saturation_ratio(nbar, b)}, {}


def _spectrum_from_config(config):
    path = config.paths.strain_map_csv or SHIPPED_STRAIN_MAP
    field = parse_strain_map(path)
    s = config.spectrum
    bins = sp.default_bins(s.bin_width_ghz * 1e9, s.max_ghz * 1e9)
    mapped = sp.splitting_map(field, acceptor_params(config))
    return field, mapped, sp.weighted_participation(mapped, bins), path


def cmd_spectrum_build(config):
    field, mapped, spec, path = _spectrum_from_config(config)
    f0 = config.conditions.f0_ghz * 1e9
    out = {
        "strain_map": path,
        "label": field.label,
        "cells": len(field),
        "total_bulk_participation": field.total_bulk_participation,
        "spectrum_total": spec.total,
        "max_splitting_ghz": float(mapped.splitting_hz.max() / 1e9),
        "p_per_ghz_at_f0": spec.value_at(f0) * 1e9,
    }
    return out, {"spectrum": {"f0_hz": spec.centers_hz, "P_per_hz": spec.P_per_hz}}


def cmd_loss_estimate(config):
    d = dopant(config)
    f0 = config.conditions.f0_ghz * 1e9
    out = {"f0_ghz": config.conditions.f0_ghz}
    if config.spectrum.p_per_ghz is not None:
        p_hz = config.spectrum.p_per_ghz / 1e9
        out["p_per_ghz"] = config.spectrum.p_per_ghz
    else:
        *_, spec, path = _spectrum_from_config(config)
        p_hz = spec.value_at(f0)
        out["p_per_ghz"] = p_hz * 1e9
        out["strain_map"] = path
        full = sp.loss_tangent_full(spec, f0, config.spectrum.linewidth_mhz * 1e6, d)
        out["tan_delta_full"] = float(full)
        out["q_full"] = sp.quality_factor(full) if full > 0 else math.inf
    td = float(sp.loss_tangent_narrowband(p_hz, d))
    out["tan_delta"] = td
    out["q"] = sp.quality_factor(td) if td > 0 else math.inf
    return out, {}


def cmd_doping_fit(config):
    path = _require(config, "paths.doping_csv")
    t = read_table(path, required=("concentration_cm3", "q"))
    fit = sp.doping_fit(np.column_stack([t["concentration_cm3"], t["q"]]))
    grid = np.logspace(
        math.floor(np.log10(t["concentration_cm3"].min())) - 1,
        math.ceil(np.log10(max(t["concentration_cm3"].max(), config.dopant.concentration_cm3))) + 1,
        41,
    )
    lo, hi = fit.confidence_band(grid)
    out = {
        "a_cm3": fit.a,
        "log10_a_stderr": fit.log10_a_stderr,
        "dof": fit.dof,
        "predicted_q_at_concentration": float(fit.predicted_q(config.dopant.concentration_cm3)),
        "concentration_cm3": config.dopant.concentration_cm3,
    }
    return out, {"doping": {"concentration_cm3": grid, "q": fit.predicted_q(grid), "q_lo95": lo, "q_hi95": hi}}


def cmd_sat_fit(config):
    path = _require(config, "paths.saturation_csv")
    t = read_table(path, required=("photons", "tan_delta", "field_on"))
    zero = t["field_on"] == 0
    sat = config.saturation
    out = {}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if zero.all() or (~zero).all():
            A = 1.0
            if config.conditions.temperature_k is not None:
                A = float(rs.thermal_factor(config.conditions.f0_ghz * 1e9, config.conditions.temperature_k))
            p = rs.fit_saturation_model(t["photons"], t["tan_delta"], A_T=A)
            out.update(tan_delta0=p.tan_delta0, n_c_photons=p.n_c, beta=p.beta, A_T=p.A_T)
            curves = {"fit": {"photons": t["photons"], "tan_delta": rs.saturation_model(t["photons"], p)}}
        else:
            fit = rs.fit_saturation_loglog(
                (t["photons"][zero], t["tan_delta"][zero]),
                (t["photons"][~zero], t["tan_delta"][~zero]),
                curvature_tol=sat.curvature_tol,
            )
            out.update(
                slope_a=fit.a, slope_a_stderr=fit.a_stderr, beta=fit.beta, b_zero=fit.b_zero,
                b_field=fit.b_field, nc_ratio=fit.nc_ratio, curvature=list(fit.curvature),
            )
            n = t["photons"]
            curves = {"fit": {
                "photons": n,
                "tan_delta_zero_field": 10 ** (fit.b_zero - fit.a * np.log10(n)),
                "tan_delta_field": 10 ** (fit.b_field - fit.a * np.log10(n)),
            }}
    out["_warnings"] = [str(w.message) for w in caught]
    return out, curves


def _photons(config, q, qc):
    r = config.resonator
    pin_dbm = _require(config, "resonator.source_power_dbm")
    device_dbm = pin_dbm - r.attenuation_db
    pw = const.dbm_to_watts(device_dbm)
    n = float(rs.photon_number(pw, config.conditions.f0_ghz * 1e9, q, qc))
    return device_dbm, pw, n


def cmd_photon_calib(config):
    q = _require(config, "resonator.q_loaded")
    qc = _require(config, "resonator.q_coupling")
    if not (q > 0 and qc > 0):
        raise ValidationError("q_loaded and q_coupling must be > 0")
    device_dbm, pw, n = _photons(config, q, qc)
    out = {
        "source_power_dbm": config.resonator.source_power_dbm,
        "attenuation_db": config.resonator.attenuation_db,
        "device_power_dbm": device_dbm,
        "device_power_w": pw,
        "photons": n,
        "field_gauss": config.conditions.field_gauss,
    }
    sat = config.saturation
    if sat.tan_delta0 is not None and sat.n_c_photons is not None:
        A = 1.0
        if config.conditions.temperature_k is not None:
            A = float(rs.thermal_factor(config.conditions.f0_ghz * 1e9, config.conditions.temperature_k))
        p = rs.SaturationFitParams(sat.tan_delta0, sat.n_c_photons, sat.beta, A)
        out["tan_delta_model"] = float(rs.saturation_model(n, p))
    g = config.lindblad.coupling_rad_per_s_per_sqrt_photon
    if g is not None:
        p = four_level_params(config)
        out["tan_delta_relative_lindblad"] = float(
            rs.predict_saturation_curve(p, n, g, 1.0, field_on(config), method="numeric")
        )
    return out, {}


def cmd_fit_s21(config):
    path = _require(config, "paths.s21_csv")
    trace = parse_s21_csv(path)
    fit = rs.fit_s21(trace, max_rel_residual=config.resonator.max_rel_residual)
    out = fit.as_dict()
    out["samples"] = len(trace)
    if config.resonator.source_power_dbm is not None:
        device_dbm, pw, n = _photons(config, fit.Q, fit.Qc)
        out.update(device_power_dbm=device_dbm, photons=n)
    model = rs.s21_model(fit, trace.frequencies_hz)
    curves = {"s21": {
        "freq_hz": trace.frequencies_hz,
        "data_re": trace.values.real,
        "data_im": trace.values.imag,
        "model_re": model.real,
        "model_im": model.imag,
    }}
    return out, curves


COMMANDS = {
    "fit-s21": cmd_fit_s21,
    "photon-calib": cmd_photon_calib,
    "simulate-steady": cmd_simulate_steady,
    "critical-rabi": cmd_critical_rabi,
    "saturation-ratio": cmd_saturation_ratio,
    "loss-estimate": cmd_loss_estimate,
    "spectrum-build": cmd_spectrum_build,
    "doping-fit": cmd_doping_fit,
    "sat-fit": cmd_sat_fit,
}
