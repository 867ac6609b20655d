"""Text file formats: S21 traces, strain maps, loss spectra and flat curve tables.

All formats are comma-separated with a required header row. Lines starting
with ``#`` are comments, except ``# key = value`` lines in a strain map which
carry metadata.
"""

import csv
import math
import os

import numpy as np

from .errors import NegativeWeight, NonMonotonicFrequency, SchemaError
from .resonator import S21Trace
from .spectrum import StrainField

S21_COLUMNS = {
    ("freq_hz", "re", "im"): "complex",
    ("freq_hz", "mag_db", "phase_rad"): "polar",
}
STRAIN_COLUMNS = ("x_um", "y_um", "weight", "sxx", "syy", "szz", "sxy", "syz", "szx")
SHIPPED_STRAIN_MAP = os.path.join(os.path.dirname(__file__), "data", "synthetic_strain_map.csv")


def _records(path):
    """Yield (line_number, stripped_text) for non-blank lines."""
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if text:
                yield lineno, text


def _split(text):
    return [c.strip() for c in next(csv.reader([text]))]


def _floats(cells, lineno, what):
    try:
        vals = [float(c) for c in cells]
    except ValueError:
        raise SchemaError(f"{what}: non-numeric value in {cells}", lineno) from None
    if not all(math.isfinite(v) for v in vals):
        raise SchemaError(f"{what}: non-finite value in {cells}", lineno)
    return vals


def parse_s21_csv(path, power_dbm_at_device=None):
    """Read a transmission trace.

    Columns are ``freq_hz,re,im`` or ``freq_hz,mag_db,phase_rad``; the layout
    is picked from the header. Frequencies must be strictly ascending.
    """
    header, rows = None, []
    last_f = -math.inf
    for lineno, text in _records(path):
        if text.startswith("#"):
            continue
        cells = _split(text)
        if header is None:
            key = tuple(c.lower() for c in cells)
            if key not in S21_COLUMNS:
                raise SchemaError(
                    f"header {cells} is not one of {[','.join(k) for k in S21_COLUMNS]}", lineno
                )
            header = S21_COLUMNS[key]
            continue
        if len(cells) != 3:
            raise SchemaError(f"expected 3 columns, found {len(cells)}", lineno)
        f, u, v = _floats(cells, lineno, "S21 row")
        if f <= last_f:
            raise NonMonotonicFrequency(f"frequency {f!r} does not exceed previous {last_f!r}", lineno)
        last_f = f
        rows.append((f, u, v))
    if header is None:
        raise SchemaError("missing header row")
    if not rows:
        raise SchemaError("no data rows")
    f, u, v = np.array(rows).T
    if header == "complex":
        z = u + 1j * v
    else:
        z = 10.0 ** (u / 20.0) * np.exp(1j * v)
    return S21Trace(f, z, power_dbm_at_device)


def write_s21_csv(trace, path, polar=False):
    f, z = trace.frequencies_hz, trace.values
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if polar:
            w.writerow(["freq_hz", "mag_db", "phase_rad"])
            rows = zip(f, 20 * np.log10(np.abs(z)), np.angle(z))
        else:
            w.writerow(["freq_hz", "re", "im"])
            rows = zip(f, z.real, z.imag)
        for row in rows:
            w.writerow([repr(float(x)) for x in row])


def parse_strain_map(path):
    """Read a strain map into a :class:`StrainField`.

    Metadata lines ``# total_bulk_participation = <value>`` and
    ``# label = <text>`` are optional. Without the first, the total is the
    sum of the weights. Row indices in errors count data rows from 0.
    """
    meta, header, cells_out = {}, None, []
    for lineno, text in _records(path):
        if text.startswith("#"):
            body = text[1:].strip()
            if "=" in body:
                k, _, v = body.partition("=")
                meta[k.strip()] = v.strip()
            continue
        cells = _split(text)
        if header is None:
            if tuple(c.lower() for c in cells) != STRAIN_COLUMNS:
                raise SchemaError(f"header must be {','.join(STRAIN_COLUMNS)}, got {cells}", lineno)
            header = cells
            continue
        row = len(cells_out)
        if len(cells) != len(STRAIN_COLUMNS):
            raise SchemaError(
                f"row {row}: expected {len(STRAIN_COLUMNS)} columns, found {len(cells)}", lineno
            )
        vals = _floats(cells, lineno, f"row {row}")
        if vals[2] < 0:
            raise NegativeWeight(f"row {row}: negative weight {vals[2]!r}", lineno)
        cells_out.append(vals)
    if header is None:
        raise SchemaError("missing header row")
    if not cells_out:
        raise SchemaError("no cells")
    total = None
    if "total_bulk_participation" in meta:
        try:
            total = float(meta["total_bulk_participation"])
        except ValueError:
            raise SchemaError(f"bad total_bulk_participation {meta['total_bulk_participation']!r}") from None
    arr = np.array(cells_out)
    return StrainField(arr[:, :2], arr[:, 2], arr[:, 3:], total, meta.get("label", ""))


def write_strain_map(strain_field, path):
    with open(path, "w", newline="") as fh:
        if strain_field.label:
            fh.write(f"# label = {strain_field.label}\n")
        fh.write(f"# total_bulk_participation = {strain_field.total_bulk_participation!r}\n")
        w = csv.writer(fh)
        w.writerow(STRAIN_COLUMNS)
        for pos, wt, s in zip(strain_field.positions_um, strain_field.weights, strain_field.strain):
            w.writerow([f"{pos[0]:.6g}", f"{pos[1]:.6g}", f"{wt:.12g}"] + [f"{x:.8g}" for x in s])


def write_loss_spectrum(spectrum, path):
    """Two columns: bin center (Hz) and P (1/Hz)."""
    write_table(path, {"f0_hz": spectrum.centers_hz, "P_per_hz": spectrum.P_per_hz})


def write_table(path, columns):
    """Flat CSV of equal-length columns, in insertion order."""
    names = list(columns)
    data = [np.asarray(columns[n]).reshape(-1) for n in names]
    if len({len(d) for d in data}) > 1:
        raise ValueError("columns differ in length")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*data):
            w.writerow([_cell(x) for x in row])


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "" if x is None else str(x)


def read_table(path, required=()):
    """Read a headed numeric CSV (``#`` comments allowed) into a dict of arrays."""
    header, rows = None, []
    for lineno, text in _records(path):
        if text.startswith("#"):
            continue
        cells = _split(text)
        if header is None:
            header = [c.lower() for c in cells]
            missing = [c for c in required if c not in header]
            if missing:
                raise SchemaError(f"missing columns {missing}", lineno)
            continue
        if len(cells) != len(header):
            raise SchemaError(f"expected {len(header)} columns, found {len(cells)}", lineno)
        rows.append(_floats(cells, lineno, "row"))
    if header is None or not rows:
        raise SchemaError(f"{path}: no header or no data rows")
    arr = np.array(rows)
    return {name: arr[:, i] for i, name in enumerate(header)}
