"""CSV/JSON serialisation of sweep tables, ratio tables and single reports."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .errors import ValidationError
from .sweep import RatioTable, SweepTable
from .transfer import MetricsReport

SWEEP_HEADER = (
    "axis",
    "axis_value",
    "rel_signal",
    "noise_shot",
    "noise_gain",
    "noise_dissipative_re",
    "noise_total_re",
    "rel_snr",
    "xi",
    "error",
)
RATIO_HEADER = ("axis", "axis_value", "s_ratio", "n_ratio", "snr_ratio", "error")
FORMATS = ("csv", "json")


def fmt(x: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(x), ".17g")


def sweep_records(table: SweepTable) -> list[dict]:
    out = []
    for row in table.rows:
        rec = dict.fromkeys(SWEEP_HEADER)
        rec["axis"] = table.axis
        rec["axis_value"] = row.axis_value
        rec["error"] = row.error or ""
        r = row.report
        if r is not None:
            rec.update(
                rel_signal=r.rel_signal_per_photon,
                noise_shot=r.noise.shot,
                noise_gain=r.noise.reflective_gain,
                noise_dissipative_re=r.noise.dissipative.real,
                noise_total_re=r.noise.total_measured,
                rel_snr=r.rel_snr_per_photon,
                xi=r.noise.xi,
            )
        out.append(rec)
    return out


def ratio_records(table: RatioTable) -> list[dict]:
    out = []
    for row in table.rows:
        rec = {"axis": table.axis, "axis_value": row.axis_value, "error": row.error or ""}
        for name in ("s_ratio", "n_ratio", "snr_ratio"):
            v = getattr(row, name)
            rec[name] = None if (row.error and row.error != "DIV0") or math.isnan(v) else v
        out.append(rec)
    return out


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return fmt(v)
    return str(v)


def write_csv(records: list[dict], header, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for rec in records:
        w.writerow([_csv_cell(rec.get(k)) for k in header])


def render_records(records: list[dict], header, format: str) -> str:
    if format not in FORMATS:
        raise ValidationError(f"format must be one of {FORMATS}", key="format")
    if format == "json":
        return json.dumps([{k: rec.get(k) for k in header} for rec in records], indent=1) + "\n"
    buf = io.StringIO()
    write_csv(records, header, buf)
    return buf.getvalue()


def _write(text: str, path) -> None:
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def emit_table(table, path=None, format: str = "csv") -> str:
    """Serialise a :class:`SweepTable` or :class:`RatioTable`.

    Writes to ``path`` (stdout when ``None`` or ``"-"``) and returns the text.
    Error rows keep their axis value and error code; numeric fields are left
    empty (``null`` in JSON).
    """
    if not table.rows:
        raise ValidationError("refusing to emit an empty table", key="table")
    if isinstance(table, RatioTable):
        records, header = ratio_records(table), RATIO_HEADER
    else:
        records, header = sweep_records(table), SWEEP_HEADER
    text = render_records(records, header, format)
    _write(text, path)
    return text


def read_table(path) -> list[dict]:
    """Parse a CSV written by :func:`emit_table` or :func:`emit_record`.

    Numbers become floats, blanks ``None``; other cells stay strings.
    """
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        rec = {}
        for k, v in row.items():
            if k in ("axis", "error", "series"):
                rec[k] = v
            elif v == "":
                rec[k] = None
            else:
                try:
                    rec[k] = float(v)
                except ValueError:
                    rec[k] = v
        out.append(rec)
    return out


def report_record(report: MetricsReport) -> dict:
    chi = report.chi
    rec = {}
    for i in range(2):
        for j in range(2):
            rec[f"chi{i + 1}{j + 1}_re"] = float(chi[i, j].real)
            rec[f"chi{i + 1}{j + 1}_im"] = float(chi[i, j].imag)
    n = report.noise
    rec.update(
        lambda_re=report.lambda_reduced.real,
        lambda_im=report.lambda_reduced.imag,
        homodyne_angle=report.homodyne_angle,
        rel_signal=report.rel_signal_per_photon,
        noise_shot=n.shot,
        noise_gain=n.reflective_gain,
        noise_dissipative_re=n.dissipative.real,
        noise_dissipative_im=n.dissipative.imag,
        noise_total_re=n.total_measured,
        noise_total_im=n.total_complex.imag,
        xi=n.xi,
        rel_snr=report.rel_snr_per_photon,
        n_tot=report.n_tot_reduced,
    )
    return rec


def emit_record(record: dict, path=None, format: str = "csv") -> str:
    text = render_records([record], tuple(record), format)
    if format == "json":
        text = json.dumps(record, indent=1) + "\n"
    _write(text, path)
    return text
