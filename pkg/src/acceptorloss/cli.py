"""Command-line entry point.

Every command reads an optional JSON config (``--config``), applies flag
overrides on top, runs, and writes ``<out>/<command>.json`` plus any curve
tables as ``<out>/<command>_<name>.csv``. Exit status is 0 on success, 2 for
invalid input and 3 for numerical failure.
"""

import argparse
import json
import os
import sys

from . import __version__
from .commands import COMMANDS
from .config import ConfigError, RunConfig, load_config
from .errors import NumericalError, ValidationError
from .formats import write_table
from .sweep import run_command, run_sweep, write_sweep

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
DEFAULT_OUT = "acceptorloss-out"

# flag name -> (config key, help)
FLAGS = {
    "f0-ghz": ("conditions.f0_ghz", "resonator / transition frequency (GHz)"),
    "temperature-k": ("conditions.temperature_k", "bath temperature (K)"),
    "field-gauss": ("conditions.field_gauss", "magnetic field along z (G); nonzero selects the in-field model"),
    "gamma-prime-per-s": ("lindblad.gamma_prime_per_s", "decay rate 3->1, 4->2 (1/s)"),
    "gamma-tilde-per-s": ("lindblad.gamma_tilde_per_s", "decay rate 3->2, 4->1 (1/s)"),
    "nbar": ("lindblad.nbar", "thermal phonon occupancy (overrides temperature)"),
    "omega-rabi-rad-per-s": ("lindblad.omega_rabi_rad_per_s", "drive Rabi frequency |Omega| (rad/s)"),
    "delta-big-rad-per-s": ("lindblad.delta_big_rad_per_s", "lower-branch Zeeman splitting (rad/s)"),
    "delta-small-rad-per-s": ("lindblad.delta_small_rad_per_s", "upper-branch Zeeman splitting (rad/s)"),
    "coupling-rad-per-s-per-sqrt-photon": (
        "lindblad.coupling_rad_per_s_per_sqrt_photon", "single-photon Rabi coupling g (rad/s)"),
    "concentration-cm3": ("dopant.concentration_cm3", "acceptor concentration (cm^-3)"),
    "dipole-debye": ("dopant.dipole_debye", "effective dipole incl. orientation factor (D)"),
    "dielectric-constant": ("dopant.dielectric_constant", "relative permittivity"),
    "p-per-ghz": ("spectrum.p_per_ghz", "weighted participation at f0 (1/GHz)"),
    "bin-width-ghz": ("spectrum.bin_width_ghz", "spectrum bin width (GHz)"),
    "max-ghz": ("spectrum.max_ghz", "spectrum upper edge (GHz)"),
    "linewidth-mhz": ("spectrum.linewidth_mhz", "homogeneous FWHM linewidth (MHz)"),
    "source-power-dbm": ("resonator.source_power_dbm", "power at the source, before attenuation (dBm)"),
    "attenuation-db": ("resonator.attenuation_db", "total input-line attenuation (dB)"),
    "q-loaded": ("resonator.q_loaded", "loaded quality factor"),
    "q-coupling": ("resonator.q_coupling", "coupling quality factor"),
    "max-rel-residual": ("resonator.max_rel_residual", "fit rejection threshold, fraction of baseline"),
    "tan-delta0": ("saturation.tan_delta0", "unsaturated loss tangent"),
    "n-c-photons": ("saturation.n_c_photons", "critical photon number"),
    "beta": ("saturation.beta", "saturation exponent"),
    "curvature-tol": ("saturation.curvature_tol", "log-log curvature warning threshold"),
}
LINDBLAD_FLAGS = [
    "f0-ghz", "temperature-k", "field-gauss", "gamma-prime-per-s", "gamma-tilde-per-s", "nbar",
    "omega-rabi-rad-per-s", "delta-big-rad-per-s", "delta-small-rad-per-s",
]
COMMAND_FLAGS = {
    "fit-s21": ["source-power-dbm", "attenuation-db", "f0-ghz", "max-rel-residual"],
    "photon-calib": [
        "source-power-dbm", "attenuation-db", "q-loaded", "q-coupling", "tan-delta0", "n-c-photons",
        "beta", "coupling-rad-per-s-per-sqrt-photon",
    ] + LINDBLAD_FLAGS,
    "simulate-steady": LINDBLAD_FLAGS,
    "critical-rabi": LINDBLAD_FLAGS,
    "saturation-ratio": ["f0-ghz", "temperature-k", "nbar", "gamma-prime-per-s", "gamma-tilde-per-s"],
    "loss-estimate": [
        "concentration-cm3", "dipole-debye", "dielectric-constant", "p-per-ghz", "f0-ghz",
        "linewidth-mhz", "bin-width-ghz", "max-ghz",
    ],
    "spectrum-build": ["bin-width-ghz", "max-ghz", "f0-ghz"],
    "doping-fit": ["concentration-cm3"],
    "sat-fit": ["f0-ghz", "temperature-k", "curvature-tol"],
}
HELP = {
    "fit-s21": "fit a complex S21 trace (freq_hz,re,im or freq_hz,mag_db,phase_rad)",
    "photon-calib": "source power -> device power -> intracavity photon number (and model loss)",
    "simulate-steady": "four-level steady state, numeric and closed form",
    "critical-rabi": "critical Rabi frequencies with and without field",
    "saturation-ratio": "ratio of zero-field to in-field saturation power",
    "loss-estimate": "acceptor loss tangent and Q from participation and doping",
    "spectrum-build": "strain map -> weighted participation spectrum P(f0)",
    "doping-fit": "fit Q = 1/(a rho) across doping levels",
    "sat-fit": "fit power-dependent loss (single state, or shared-slope two-field log-log)",
}
# commands that read a file: flag -> config key
INPUT_FLAGS = {
    "fit-s21": ("input", "paths.s21_csv"),
    "doping-fit": ("input", "paths.doping_csv"),
    "sat-fit": ("input", "paths.saturation_csv"),
    "loss-estimate": ("strain-map", "paths.strain_map_csv"),
    "spectrum-build": ("strain-map", "paths.strain_map_csv"),
}


def _set_pair(text):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected section.key=value, got {text!r}")
    try:
        value = json.loads(value)
    except json.JSONDecodeError:
        pass
    return key.strip(), value


def _axis(text):
    """``key=v1,v2,...`` or ``key=linspace:start:stop:num`` or ``key=logspace:...``."""
    key, sep, spec = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=spec, got {text!r}")
    kind, _, rest = spec.partition(":")
    try:
        if kind in ("linspace", "logspace"):
            a, b, n = rest.split(":")
            return {"key": key, kind: [float(a), float(b), int(n)]}
        return {"key": key, "values": [float(v) for v in spec.split(",")]}
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad axis spec {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--out", metavar="DIR", help=f"output directory (default $ACCEPTORLOSS_OUT or ./{DEFAULT_OUT})")
    common.add_argument("--workers", type=int, default=1, metavar="N", help="worker processes for sweeps")
    common.add_argument("--set", dest="overrides", action="append", type=_set_pair, default=[],
                        metavar="SECTION.KEY=VALUE", help="override any config key (repeatable)")
    common.add_argument("--quiet", action="store_true", help="do not print the summary")

    parser = argparse.ArgumentParser(prog="acceptorloss", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=HELP[name])
        if name in INPUT_FLAGS:
            flag, key = INPUT_FLAGS[name]
            p.add_argument(f"--{flag}", dest=f"flag:{key}", metavar="PATH", help=f"sets {key}")
        for flag in COMMAND_FLAGS[name]:
            key, help_ = FLAGS[flag]
            p.add_argument(f"--{flag}", dest=f"flag:{key}", type=float, help=f"{help_} [{key}]")
    sw = sub.add_parser("sweep", parents=[common], help="Cartesian sweep of any command over config keys")
    sw.add_argument("--command", dest="sweep_command", choices=sorted(COMMANDS),
                    help="command evaluated at each point [sweep.command]")
    sw.add_argument("--axis", dest="axes", action="append", type=_axis, default=None,
                    metavar="KEY=SPEC", help="axis: key=v1,v2 | key=linspace:a:b:n | key=logspace:a:b:n")
    return parser


def resolve_config(args):
    config = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    for dest, value in vars(args).items():
        if dest.startswith("flag:") and value is not None:
            overrides[dest[5:]] = value
    overrides.update(dict(args.overrides))
    return config.with_overrides(overrides) if overrides else config


def output_dir(args):
    out = args.out or os.environ.get("ACCEPTORLOSS_OUT") or DEFAULT_OUT
    os.makedirs(out, exist_ok=True)
    return out


def _summary(outputs):
    lines = []
    for k, v in outputs.items():
        if isinstance(v, float):
            lines.append(f"  {k} = {v:.6g}")
        elif isinstance(v, (int, str, bool)) or v is None:
            lines.append(f"  {k} = {v}")
        elif isinstance(v, list) and len(v) <= 8 and all(isinstance(x, float) for x in v):
            lines.append(f"  {k} = [{', '.join(f'{x:.6g}' for x in v)}]")
    return "\n".join(lines)


def run(argv=None):
    args = build_parser().parse_args(argv)
    config = resolve_config(args)
    out = output_dir(args)
    if args.command == "sweep":
        records = run_sweep(config, args.sweep_command, args.axes, workers=args.workers)
        jsonl, csv_path = os.path.join(out, "sweep.jsonl"), os.path.join(out, "sweep.csv")
        write_sweep(records, jsonl, csv_path)
        failed = sum(r.error is not None for r in records)
        if not args.quiet:
            print(f"sweep: {len(records)} points, {failed} failed -> {jsonl}")
        return EXIT_OK
    record, curves = run_command(config, args.command)
    path = os.path.join(out, f"{args.command}.json")
    with open(path, "w") as fh:
        fh.write(record.to_json(indent=2) + "\n")
    for name, table in curves.items():
        write_table(os.path.join(out, f"{args.command}_{name}.csv"), table)
    if not args.quiet:
        print(f"{args.command} -> {path}")
        print(_summary(record.outputs))
        for w in record.warnings:
            print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def main(argv=None):
    try:
        return run(argv)
    except (ValidationError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
