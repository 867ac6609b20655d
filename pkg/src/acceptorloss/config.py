"""Run configuration and result records.

Configs are JSON objects made of named sections. Every physical quantity
carries its unit in the key name, unknown keys are rejected, and missing keys
take the defaults below. The canonical form (all sections, all keys, sorted,
compact) is what gets hashed into each :class:`ResultRecord`.
"""

from dataclasses import asdict, dataclass, field, fields
import hashlib
import json
import math
import os
import time

from .errors import ValidationError

SCHEMA_VERSION = 1


class ConfigError(ValidationError):
    pass


@dataclass(frozen=True)
class AcceptorSection:
    g1: float = -1.07
    g2: float = -0.03
    p_b_debye: float = 0.26
    gamma_b_ev: float = -1.42
    gamma_b_prime_ev: float = -3.7


@dataclass(frozen=True)
class ConditionsSection:
    f0_ghz: float = 6.0
    temperature_k: float = None
    field_gauss: float = 0.0


@dataclass(frozen=True)
class LindbladSection:
    gamma_prime_per_s: float = 1.0e6
    gamma_tilde_per_s: float = 1.0e6
    nbar: float = None  # None: from conditions.temperature_k, or 0
    omega_rabi_rad_per_s: float = 0.0
    delta_big_rad_per_s: float = None  # None: from the Zeeman splitting at field_gauss
    delta_small_rad_per_s: float = None
    coupling_rad_per_s_per_sqrt_photon: float = None


@dataclass(frozen=True)
class DopantSection:
    concentration_cm3: float = 2.5e15
    dipole_debye: float = 0.26 * math.sqrt(1.0 / 3.0)
    dielectric_constant: float = 11.7


@dataclass(frozen=True)
class SpectrumSection:
    p_per_ghz: float = None
    bin_width_ghz: float = 0.5
    max_ghz: float = 150.0
    linewidth_mhz: float = 1.0


@dataclass(frozen=True)
class ResonatorSection:
    source_power_dbm: float = None
    attenuation_db: float = 85.0
    q_loaded: float = None
    q_coupling: float = None
    max_rel_residual: float = 0.25


@dataclass(frozen=True)
class SaturationSection:
    tan_delta0: float = None
    n_c_photons: float = None
    beta: float = 1.0
    curvature_tol: float = 0.05


@dataclass(frozen=True)
class PathsSection:
    s21_csv: str = None
    strain_map_csv: str = None  # None: the shipped synthetic map
    doping_csv: str = None
    saturation_csv: str = None


@dataclass(frozen=True)
class SweepSection:
    command: str = None
    axes: list = None


SECTIONS = {
    "acceptor": AcceptorSection,
    "conditions": ConditionsSection,
    "lindblad": LindbladSection,
    "dopant": DopantSection,
    "spectrum": SpectrumSection,
    "resonator": ResonatorSection,
    "saturation": SaturationSection,
    "paths": PathsSection,
    "sweep": SweepSection,
}
_STR_KEYS = {"command"} | {f.name for f in fields(PathsSection)}


def _coerce(section, key, value):
    if value is None:
        return None
    if key == "axes":
        if not isinstance(value, list):
            raise ConfigError("sweep.axes must be a list")
        return [dict(a) for a in value]
    if key in _STR_KEYS:
        if not isinstance(value, str):
            raise ConfigError(f"{section}.{key} must be a string")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite")
    return value


@dataclass(frozen=True)
class RunConfig:
    schema_version: int = SCHEMA_VERSION
    acceptor: AcceptorSection = field(default_factory=AcceptorSection)
    conditions: ConditionsSection = field(default_factory=ConditionsSection)
    lindblad: LindbladSection = field(default_factory=LindbladSection)
    dopant: DopantSection = field(default_factory=DopantSection)
    spectrum: SpectrumSection = field(default_factory=SpectrumSection)
    resonator: ResonatorSection = field(default_factory=ResonatorSection)
    saturation: SaturationSection = field(default_factory=SaturationSection)
    paths: PathsSection = field(default_factory=PathsSection)
    sweep: SweepSection = field(default_factory=SweepSection)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - set(SECTIONS) - {"schema_version"}
        if unknown:
            raise ConfigError(f"unknown config sections {sorted(unknown)}")
        version = data.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
        kwargs = {}
        for name, kind in SECTIONS.items():
            block = data.get(name, {})
            if not isinstance(block, dict):
                raise ConfigError(f"section {name!r} must be an object")
            allowed = {f.name for f in fields(kind)}
            bad = set(block) - allowed
            if bad:
                raise ConfigError(f"unknown keys in {name!r}: {sorted(bad)}")
            kwargs[name] = kind(**{k: _coerce(name, k, v) for k, v in block.items()})
        return cls(**kwargs)

    def to_dict(self):
        return asdict(self)

    def canonical_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def hash(self):
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def get(self, dotted):
        section, key = _split_key(dotted)
        return getattr(getattr(self, section), key)

    def with_overrides(self, overrides):
        """Copy with ``{"section.key": value}`` overrides applied and validated."""
        data = self.to_dict()
        for dotted, value in overrides.items():
            section, key = _split_key(dotted)
            data[section][key] = value
        return RunConfig.from_dict(data)


def _split_key(dotted):
    parts = dotted.split(".")
    if len(parts) != 2 or parts[0] not in SECTIONS:
        raise ConfigError(f"config key {dotted!r} is not of the form section.key")
    if parts[1] not in {f.name for f in fields(SECTIONS[parts[0]])}:
        raise ConfigError(f"unknown config key {dotted!r}")
    return parts[0], parts[1]


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return RunConfig.from_dict(data)


def save_config(config, path):
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def timestamp():
    """UTC ISO timestamp; honours SOURCE_DATE_EPOCH for reproducible output."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = int(epoch) if epoch else int(time.time())
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


@dataclass
class ResultRecord:
    run_id: str
    config_hash: str
    command: str
    outputs: dict
    version: str
    timestamp: str
    point: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    error: str = None

    @classmethod
    def create(cls, config, command, outputs, point=None, warnings=(), error=None):
        from . import __version__

        h = config.hash()
        rid = hashlib.sha256(f"{command}:{h}".encode()).hexdigest()[:16]
        return cls(rid, h, command, outputs, __version__, timestamp(), dict(point or {}),
                   list(warnings), error)

    def to_dict(self):
        return asdict(self)

    def to_json(self, indent=None):
        return json.dumps(_jsonable(self.to_dict()), sort_keys=True, indent=indent)


def _jsonable(obj):
    """Plain JSON types; non-finite floats become strings so output stays valid JSON."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj

