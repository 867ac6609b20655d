"""Cartesian parameter sweeps over config keys.

An axis is ``{"key": "section.key", ...}`` with exactly one of
``"values": [...]``, ``"linspace": [start, stop, num]`` or
``"logspace": [start, stop, num]``. The logspace endpoints are the values
themselves, not exponents. Points are evaluated row-major in axis
declaration order, and the returned records keep that order whatever the
worker count.
"""

from concurrent.futures import ProcessPoolExecutor
import csv
import itertools
import math

import numpy as np

from .commands import COMMANDS
from .config import ConfigError, RunConfig, ResultRecord, _jsonable, _split_key
from .errors import AcceptorLossError

MAX_AXES = 3


def axis_values(axis):
    if not isinstance(axis, dict) or "key" not in axis:
        raise ConfigError(f"axis {axis!r} needs a 'key'")
    _split_key(axis["key"])
    kinds = [k for k in ("values", "linspace", "logspace") if k in axis]
    extra = set(axis) - {"key", "values", "linspace", "logspace"}
    if len(kinds) != 1 or extra:
        raise ConfigError(f"axis {axis['key']!r} needs exactly one of values/linspace/logspace")
    kind = kinds[0]
    spec = axis[kind]
    if kind == "values":
        vals = [float(v) for v in spec]
        if not vals:
            raise ConfigError(f"axis {axis['key']!r} has no values")
    else:
        if len(spec) != 3 or int(spec[2]) != spec[2] or spec[2] < 1:
            raise ConfigError(f"{kind} for {axis['key']!r} must be [start, stop, num]")
        start, stop, num = float(spec[0]), float(spec[1]), int(spec[2])
        if kind == "logspace":
            if not (start > 0 and stop > 0):
                raise ConfigError(f"logspace for {axis['key']!r} needs positive endpoints")
            vals = np.geomspace(start, stop, num).tolist()
        else:
            vals = np.linspace(start, stop, num).tolist()
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"axis {axis['key']!r} has non-finite values")
    return vals


def sweep_points(axes):
    if not axes:
        raise ConfigError("sweep needs at least one axis")
    if len(axes) > MAX_AXES:
        raise ConfigError(f"at most {MAX_AXES} sweep axes, got {len(axes)}")
    keys = [a.get("key") if isinstance(a, dict) else None for a in axes]
    grids = [axis_values(a) for a in axes]
    if len(set(keys)) != len(keys):
        raise ConfigError("sweep axes repeat a key")
    return [dict(zip(keys, combo)) for combo in itertools.product(*grids)]


def run_command(config, command):
    """Run one command and wrap the result in a :class:`ResultRecord`."""
    outputs, curves = COMMANDS[command](config)
    warns = outputs.pop("_warnings", [])
    return ResultRecord.create(config, command, outputs, warnings=warns), curves


def _run_point(args):
    base, command, point = args
    config = RunConfig.from_dict(base)
    try:
        config = config.with_overrides(point)
        record, _ = run_command(config, command)
        record.point = point
    except (AcceptorLossError, ValueError, ArithmeticError) as exc:
        record = ResultRecord.create(config, command, {}, point=point,
                                     error=f"{type(exc).__name__}: {exc}")
    return record.to_dict()


def run_sweep(config, command=None, axes=None, workers=1):
    """Evaluate ``command`` at every point; failures become records with ``error`` set."""
    command = command or config.sweep.command
    axes = axes if axes is not None else config.sweep.axes
    if command not in COMMANDS:
        raise ConfigError(f"sweep command must be one of {sorted(COMMANDS)}, got {command!r}")
    points = sweep_points(axes or [])
    base = config.to_dict()
    jobs = [(base, command, p) for p in points]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            dicts = list(pool.map(_run_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        dicts = [_run_point(j) for j in jobs]
    return [ResultRecord(**d) for d in dicts]


def write_sweep(records, jsonl_path, csv_path):
    with open(jsonl_path, "w") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")
    point_keys = list(records[0].point) if records else []
    out_keys = []
    for r in records:
        for k, v in r.outputs.items():
            if k not in out_keys and _scalar(v):
                out_keys.append(k)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index"] + point_keys + out_keys + ["error"])
        for i, r in enumerate(records):
            row = [i] + [r.point.get(k) for k in point_keys]
            row += [_jsonable(r.outputs.get(k)) for k in out_keys]
            w.writerow([_fmt(x) for x in row] + [r.error or ""])


def _scalar(v):
    return isinstance(v, (int, float, bool)) or v is None


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return "" if x is None else str(x)
